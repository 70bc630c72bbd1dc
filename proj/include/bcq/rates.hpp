#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bcq/sequence_model.hpp"

namespace bcq {

inline constexpr long kDefaultScanBudget = 1000000;

enum class RateStatus { kApplicable, kInapplicable, kBudgetExhausted };

const char* rate_status_name(RateStatus s);

// One block's level -> index table. Entries are least witnesses; a table may
// be a truncated prefix when the scan budget (or an explicit family) ran out.
struct RateTable {
  RateStatus status = RateStatus::kInapplicable;
  std::string provenance;
  long level_min = 0;
  std::vector<long> entries;

  std::optional<long> at(long level) const {
    if (level < level_min) return std::nullopt;
    std::size_t i = static_cast<std::size_t>(level - level_min);
    if (i >= entries.size()) return std::nullopt;
    return entries[i];
  }
};

class RateFunction {
 public:
  RateFunction() = default;
  explicit RateFunction(std::vector<RateTable> tables) : tables_(std::move(tables)) {}

  std::size_t block_count() const { return tables_.size(); }
  const RateTable& table(std::size_t b) const;
  std::optional<long> at(std::size_t b, long level) const;
  bool any_applicable() const;

 private:
  std::vector<RateTable> tables_;
};

// psi: per block, psi(N) = least n with sum_{i<=n} P(A_i|F) >= N, for
// N = 1..N_max. Analytically convergent blocks are inapplicable unscanned.
RateFunction divergence_rate(const SequenceModel& model, long N_max,
                             long n_budget = kDefaultScanBudget);

// phi: per block, phi(l) = least n whose rigorous tail upper bound from n is
// <= 2^-l, for l = 0..l_max. Families without a tail bound are inapplicable.
RateFunction convergence_rate(const SequenceModel& model, long l_max);

struct CorrelationEntry {
  RateStatus status = RateStatus::kInapplicable;
  long index = 0;          // phi(l, n), >= n when applicable
  Rational achieved_ratio; // second-moment ratio at the index
  std::string note;
};

// phi(l, n): least j >= n with the second-moment ratio <= 1 + 2^-l, found by
// exact scanning with memoized per-block prefix sums.
class CorrelationRate {
 public:
  explicit CorrelationRate(const SequenceModel& model, long j_budget = kDefaultScanBudget);
  // The model must outlive the rate extractor.
  explicit CorrelationRate(SequenceModel&&, long = kDefaultScanBudget) = delete;

  CorrelationEntry at(std::size_t block, long level, long n) const;
  const SequenceModel& model() const { return *model_; }
  long budget() const { return j_budget_; }

 private:
  struct Prefix {
    std::vector<Rational> s;  // s[j-1] = sum of marginals through j
    std::vector<Rational> d;  // d[j-1] = double sum through j
    bool ended = false;       // explicit family ran out
  };
  const Prefix& grow(std::size_t block, long j) const;

  const SequenceModel* model_;
  long j_budget_;
  mutable std::vector<Prefix> prefixes_;
  mutable std::vector<std::unique_ptr<CorrelationScanner>> scanners_;
};

}  // namespace bcq
