#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcq/sequence_model.hpp"

namespace bcq {

// Counter-based substream: every (seed, component, trial) triple keys an
// independent deterministic sequence, so trials can be re-run or split in any
// order without changing a single draw.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t component, std::uint64_t trial);

  std::uint64_t next_word();

  // Exact Bernoulli(p): compares an infinitely refined uniform in [0,1)
  // against p, drawing further words only on digit ties, so the hit
  // probability is exactly p rather than a 2^-64 grid approximation.
  bool bernoulli(const Rational& p);

 private:
  std::uint64_t state_;
};

// The event asked of every sampled path (1-based indices, as in the queries
// answered exactly by the model backends).
struct Query {
  enum class Kind { kUnion, kPattern, kPairwise };

  Kind kind = Kind::kUnion;
  long a = 1;
  long b = 1;

  static Query union_range(long from, long to);
  static Query pattern(long n, long m);  // A_n^c ... A_{n+m-1}^c A_{n+m}
  static Query pairwise(long i, long k);

  long max_index() const;
  bool evaluate(const std::vector<bool>& path) const;
  std::string describe() const;
};

struct SimulationPlan {
  // The model must outlive the plan.
  SimulationPlan(const SequenceModel& model, long horizon, long trials, std::uint64_t seed,
                 Query query);
  SimulationPlan(SequenceModel&&, long, long, std::uint64_t, Query) = delete;

  const SequenceModel& model() const { return *model_; }
  long horizon() const { return horizon_; }
  long trials() const { return trials_; }
  std::uint64_t seed() const { return seed_; }
  const Query& query() const { return query_; }

 private:
  const SequenceModel* model_;
  long horizon_;
  long trials_;
  std::uint64_t seed_;
  Query query_;
};

// Distribution-free Hoeffding half-width at confidence 1 - delta.
double hoeffding_epsilon(long trials, double delta);

struct Estimate {
  std::vector<std::optional<Rational>> points;  // per block: hit count / trials
  long trials = 0;
  double delta = 0;
  double epsilon = 0;
  std::string query;
};

// One indicator path of the given component, horizon bits long.
std::vector<bool> sample_path(const SequenceModel& model, std::size_t component, long horizon,
                              RandomStream& stream);

// Stratified estimation: component b's estimate uses only component-b paths,
// so mixture weights never blur the conditional value.
Estimate estimate_query(const SimulationPlan& plan, double delta = 0.01);

enum class Trend { kApproachingOne, kRising, kPlateau };

const char* trend_name(Trend t);

struct HorizonSweep {
  std::vector<long> horizons;
  std::vector<Estimate> estimates;           // one per horizon
  std::vector<std::optional<Trend>> trends;  // per block
};

// Re-estimates the plan's union query with its right endpoint swept across
// the given ascending horizons; the plan's own horizon must cover the last.
HorizonSweep horizon_sweep(const SimulationPlan& plan, const std::vector<long>& horizons,
                           double delta = 0.01);

}  // namespace bcq
