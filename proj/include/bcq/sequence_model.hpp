#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bcq/space.hpp"

namespace bcq {

enum class Family { kConstant, kGeometric, kPower };

// Per-block marginal law p_n for n >= 1, from a small family of closed forms
// whose convergence behavior is decidable analytically.
class ProbFormula {
 public:
  static ProbFormula constant(Rational c);
  // p_n = c * r^(n-1)
  static ProbFormula geometric(Rational c, Rational r);
  // p_n = c * n^(-s); s must be a nonnegative integer so sums stay rational
  static ProbFormula power(Rational c, long s);

  Family family() const { return family_; }
  const Rational& c() const { return c_; }
  const Rational& r() const { return r_; }
  long s() const { return s_; }

  Rational value(long n) const;  // p_n, n >= 1

  bool series_converges() const;
  bool tends_to_zero() const;

  // Rigorous upper bound on the tail sum from `from` onward, when the family
  // admits one (geometric exact; power s >= 2 by integral comparison;
  // otherwise only the degenerate zero sequence).
  std::optional<Rational> tail_upper_bound(long from) const;

  std::string describe() const;

  friend bool operator==(const ProbFormula&, const ProbFormula&) = default;

 private:
  ProbFormula(Family f, Rational c, Rational r, long s);
  Family family_;
  Rational c_, r_;
  long s_ = 0;
};

struct BernoulliComponent {
  Rational weight;
  ProbFormula p;
};

struct MarkovComponent {
  Rational weight;
  Rational pi1;  // P(I_1 = 1)
  Rational q0;   // P(I_{n+1} = 1 | I_n = 0)
  Rational q1;   // P(I_{n+1} = 1 | I_n = 1)
};

struct ExplicitModel {
  FiniteProbabilitySpace space;
  Partition partition;
  std::vector<Event> events;
};

class SequenceModel;

struct Materialized {
  FiniteProbabilitySpace space;
  Partition partition;
  std::vector<Event> events;
};

struct MaterializeOptions {
  long horizon_cap = 20;
  std::uint64_t space_cap = 0;  // 0 means effective_space_cap()
};

// Event sequence with conditioning structure. Mixture variants condition on
// the latent component (one block per component, positive weight by
// construction); the explicit variant conditions on its stored partition.
class SequenceModel {
 public:
  enum class Kind { kExplicit, kMixtureBernoulli, kMixtureMarkov };

  // Default state holds no data; every query on it is invalid input.
  SequenceModel() = default;

  static SequenceModel explicit_model(FiniteProbabilitySpace space, Partition f,
                                      std::vector<Event> events);
  static SequenceModel mixture_bernoulli(std::vector<BernoulliComponent> components);
  static SequenceModel mixture_markov(std::vector<MarkovComponent> components);

  Kind kind() const { return kind_; }
  std::size_t block_count() const;
  Rational block_weight(std::size_t b) const;
  bool block_is_null(std::size_t b) const;

  // Largest usable event index; unbounded for mixture variants.
  std::optional<long> max_index() const;

  // P(A_n | F)
  BlockFunction cond_marginal(long n) const;
  // P(A_n^c ... A_{n+m-1}^c A_{n+m} | F); m = 0 degenerates to the marginal.
  BlockFunction pattern_probability(long n, long m) const;
  // P(A_from^c ... A_to^c | F), the all-miss run.
  BlockFunction run_probability(long from, long to) const;
  // P(U_{i=from..to} A_i | F) = 1 - run.
  BlockFunction union_probability(long from, long to) const;
  // P(A_i A_k | F)
  BlockFunction pairwise_joint(long i, long k) const;

  Materialized materialize(long horizon, const MaterializeOptions& opts = {}) const;

  const std::vector<BernoulliComponent>& bernoulli_components() const;
  const std::vector<MarkovComponent>& markov_components() const;
  const ExplicitModel& explicit_data() const;

  // Markov chain marginal pi_n on one component.
  Rational markov_marginal(std::size_t component, long n) const;

  std::string block_label(std::size_t b) const;

 private:
  Kind kind_ = Kind::kExplicit;
  std::variant<std::monostate, ExplicitModel, std::vector<BernoulliComponent>,
               std::vector<MarkovComponent>>
      data_;
};

// Family-analytic nature of the marginal series on one block. Explicit
// families are finite, so neither limit notion applies to them.
enum class SeriesNature { kDivergent, kConvergent, kFiniteFamily };

SeriesNature marginal_series_nature(const SequenceModel& model, std::size_t block);

// Whether P(A_n|F) -> 0 on the block, decided from the family parameters
// alone. nullopt for explicit families.
std::optional<bool> marginals_vanish(const SequenceModel& model, std::size_t block);

// Streaming view of the marginals P(A_n|F) on one block: O(1) state, exact
// partial sums, usable far beyond any materialization horizon. On a null
// block every value is the sentinel 0.
class MarginalScanner {
 public:
  MarginalScanner(const SequenceModel& model, std::size_t block);
  // The model must outlive the scanner.
  MarginalScanner(SequenceModel&&, std::size_t) = delete;

  bool has_next() const;
  void advance();  // moves to index()+1; requires has_next()

  long index() const { return n_; }                        // 0 before the first advance
  const Rational& last() const { return p_; }              // p_n at the current index
  const Rational& partial_sum() const { return sum_; }     // sum of p_1..p_n

 private:
  const SequenceModel* model_;
  std::size_t block_;
  long n_ = 0;
  long limit_ = -1;  // -1: unbounded
  Rational p_, sum_;
  Rational aux_;         // geometric running value / Markov pi_n
  Rational block_mass_;  // explicit models: P(block)
};

// Streaming second-moment state on one block: after advancing to j it holds
// S_j = sum of marginals and D_j = the full double sum over i,k <= j of
// P(A_i A_k | F), both exact, in O(1) work per step for mixture models.
class CorrelationScanner {
 public:
  CorrelationScanner(const SequenceModel& model, std::size_t block);
  // The model must outlive the scanner.
  CorrelationScanner(SequenceModel&&, std::size_t) = delete;

  bool has_next() const;
  void advance();

  long index() const { return marg_.index(); }
  const Rational& marginal_sum() const { return marg_.partial_sum(); }
  const Rational& double_sum() const { return d_; }

 private:
  const SequenceModel* model_;
  std::size_t block_;
  MarginalScanner marg_;
  Rational d_;
  Rational cross_;  // sum over i < j of P(A_i A_j | F)
  // Explicit models intersect stored events directly instead.
  Rational explicit_block_mass_;
};

// Streaming prefix run probabilities on one block: after advancing to n it
// holds P(A_1^c ... A_n^c | F) exactly, in O(1) work per step for mixture
// models. On a null block the value is the sentinel 1 (union 0).
class RunScanner {
 public:
  RunScanner(const SequenceModel& model, std::size_t block);
  // The model must outlive the scanner.
  RunScanner(SequenceModel&&, std::size_t) = delete;

  bool has_next() const { return marg_.has_next(); }
  void advance();

  long index() const { return marg_.index(); }
  const Rational& run() const { return run_; }  // 1 before the first advance
  Rational union_prefix() const { return Rational(1) - run_; }

 private:
  const SequenceModel* model_;
  std::size_t block_;
  MarginalScanner marg_;
  Rational run_{1};
  Event survivors_;  // explicit models: block outcomes missed by every event so far
  Rational block_mass_;
};

}  // namespace bcq
