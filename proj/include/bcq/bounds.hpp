#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bcq/bound_report.hpp"
#include "bcq/rates.hpp"
#include "bcq/sequence_model.hpp"

namespace bcq {

inline Rational default_enclosure_width() { return Rational::pow10(-9); }

// Partial sums S_H = sum_{n=1}^{H} P(A_n^c ... A_{n+m-1}^c A_{n+m} | F) per
// block, with a rigorous upper bound on the remainder past H whenever the
// family admits one (exact for explicit families, closed form for geometric,
// integral comparison for power exponents >= 2).
struct GeneralizedBcResult {
  BlockFunction partial_sums;
  std::vector<std::optional<Rational>> tail_bounds;
  BoundReport report;
};

GeneralizedBcResult generalized_bc_series(const SequenceModel& model, long m, long H);

// Exact telescoping identity over the first N steps:
// sum P(A_n A_{n+1}^c|F) - sum P(A_n^c A_{n+1}|F) = P(A_1|F) - P(A_{N+1}|F).
BoundReport switch_identity_check(const SequenceModel& model, long N);

// One block's power coefficient at horizon H: the exponent alpha with
// joint = base^alpha * rest, where base = P(A_n^c|F), rest = P(∩_{i=n+1}^{H}
// A_i^c|F), joint = P(∩_{i=n}^{H} A_i^c|F).
struct CoefficientBlock {
  Verdict verdict = Verdict::kInapplicable;
  std::optional<Enclosure> alpha;
  bool alpha_one_exact = false;  // defining relation holds exactly with alpha = 1
  Rational base, joint, rest;
  std::string note;
};

struct PowerCoefficientResult {
  long n = 0;
  long horizon = 0;
  std::vector<CoefficientBlock> blocks;
  BoundReport report;
};

PowerCoefficientResult power_coefficient(const SequenceModel& model, long n, long H,
                                         const Rational& width = default_enclosure_width());

// Exact test of joint == base^alpha * rest for rational alpha, via the
// cross-powered integer identity. Requires base, joint, rest > 0.
bool power_relation_holds(const Rational& base, const Rational& joint, const Rational& rest,
                          const Rational& alpha);

// Chain coefficient in two algebraic forms: from survival probabilities
// (complement form) and from hit probabilities (displayed form), with a flag
// when the two provably differ.
struct MarkovCoefficientBlock {
  Verdict verdict = Verdict::kInapplicable;
  std::optional<Enclosure> complement_form;
  std::optional<Enclosure> displayed_form;
  bool disagree = false;  // enclosures are disjoint, so the forms differ
  std::string note;
};

struct MarkovCoefficientResult {
  long n = 0;
  std::vector<MarkovCoefficientBlock> blocks;
  BoundReport report;
};

MarkovCoefficientResult markov_power_coefficient(
    const SequenceModel& model, long n, const Rational& width = default_enclosure_width());

// Verifies, per block, the k-step product identity
//   P(∩_{i=n}^{H}A_i^c|F) = prod_{i=n}^{n+k-1} P(A_i^c|F)^{alpha_i} * P(∩_{i=n+k}^{H}A_i^c|F)
// as an enclosure identity in log space, and the exponential upper bound
//   P(∩_{i=n}^{H}A_i^c|F) <= exp(-sum alpha_i P(A_i|F)) * P(∩_{i=n+k}^{H}A_i^c|F).
BoundReport theorem21_recursion_check(const SequenceModel& model, long n, long k, long H);

// Partial sums sum_{n=1}^{H-1} alpha_n(H) * P(A_n|F) per block, as enclosures;
// terms with an undefined coefficient are skipped and counted.
struct WeightedSeriesResult {
  std::vector<std::optional<Enclosure>> partial_sums;
  std::vector<long> skipped_terms;  // per block: count of undefined-coefficient terms
  BoundReport report;
};

WeightedSeriesResult weighted_divergence_series(const SequenceModel& model, long H);

// P(∪_{k=1}^{n} A_k|F) >= (sum_k P(A_k|F))^2 / sum_{i,k} P(A_i A_k|F), exactly.
BoundReport chung_erdos(const SequenceModel& model, long n);

// sum_{i,k<=n} P(A_i A_k|F) / (sum_{k<=n} P(A_k|F))^2 per block, checked >= 1.
struct SecondMomentResult {
  BlockFunction ratios;
  BoundReport report;
};

SecondMomentResult second_moment_ratio(const SequenceModel& model, long n);

// Convergence-rate certificate check at level l, horizon m: on blocks where
// phi(l) is defined and below m, verifies the premise
// sum_{i=phi(l)}^{m} P(A_i|F) <= 2^-l and the conclusion
// P(∪_{i=phi(l)}^{m} A_i|F) <= 2^-l.
BoundReport first_bc_quantitative(const SequenceModel& model, const RateFunction& phi,
                                  long l, long m);

// Divergence-rate certificate check: with M = n+N-1 and j = psi(M), verifies
// the premise sum_{i<=j} P(A_i|F) >= M and the conclusion
// P(∪_{i=n}^{j} A_i|F) >= 1 - e^{-N}; the union from 1 is reported alongside.
BoundReport second_bc_quantitative(const SequenceModel& model, const RateFunction& psi,
                                   long n, long N);

// Builds the correlation schedule n_1 = phi(1,1), n_k = phi(k, max(n_{k-1},k))
// up to m = max(psi(2n), l+3) and checks P(∪_{i=n}^{n_m} A_i|F) >= 1 - 2^-l
// exactly, re-verifying each consulted ratio premise.
struct ErdosRenyiResult {
  struct Schedule {
    long m = 0;
    std::vector<long> indices;  // n_1 .. n_m
  };
  std::vector<std::optional<Schedule>> schedules;
  BoundReport report;
};

ErdosRenyiResult erdos_renyi_schedule(const SequenceModel& model, const RateFunction& psi,
                                      const CorrelationRate& phi2, long n, long l);

inline constexpr long kDefaultWitnessBudget = 10000;

// Searches for the least n > m such that for every j in [n, g(n)]:
//   P(∪_{k=1}^{n} A_k|F) + 2^-l >= (sum_{k<=j} P(A_k|F))^2 / sum_{i,k<=j} P(A_iA_k|F).
// phi is a divergence-rate table used for the premise side; g must satisfy
// g(i) > i at every consulted i.
struct KochenStoneResult {
  struct Witness {
    long n = 0;
    long window_end = 0;
    Rational min_margin;            // smallest slack across the window
    std::vector<Rational> margins;  // slack at each j in [n, g(n)]
  };
  std::vector<std::optional<Witness>> witnesses;
  BoundReport report;
};

KochenStoneResult kochen_stone_quantitative(const SequenceModel& model,
                                            const RateFunction& phi, long m, long l,
                                            const std::function<long(long)>& g,
                                            const std::string& g_label = "g",
                                            long n_budget = kDefaultWitnessBudget);

}  // namespace bcq
