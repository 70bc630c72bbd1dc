#include "bcq/rates.hpp"

#include <functional>
#include <memory>

#include "bcq/error.hpp"

namespace bcq {

const char* rate_status_name(RateStatus s) {
  switch (s) {
    case RateStatus::kApplicable:
      return "applicable";
    case RateStatus::kInapplicable:
      return "inapplicable";
    case RateStatus::kBudgetExhausted:
      return "budget-exhausted";
  }
  return "unknown";
}

const RateTable& RateFunction::table(std::size_t b) const {
  if (b >= tables_.size()) throw InvalidInput("block index out of range");
  return tables_[b];
}

std::optional<long> RateFunction::at(std::size_t b, long level) const {
  const RateTable& t = table(b);
  if (t.status == RateStatus::kInapplicable) return std::nullopt;
  return t.at(level);
}

bool RateFunction::any_applicable() const {
  for (const auto& t : tables_) {
    if (t.status != RateStatus::kInapplicable) return true;
  }
  return false;
}

namespace {

enum class SeriesSum { kDivergent, kConvergent, kFiniteFamily };

struct SeriesClass {
  SeriesSum sum;
  std::string provenance;
};

SeriesClass classify_block(const SequenceModel& model, std::size_t b) {
  std::string desc;
  switch (model.kind()) {
    case SequenceModel::Kind::kMixtureBernoulli:
      desc = model.bernoulli_components()[b].p.describe();
      break;
    case SequenceModel::Kind::kMixtureMarkov: {
      const MarkovComponent& c = model.markov_components()[b];
      desc = "markov(" + c.pi1.str() + "," + c.q0.str() + "," + c.q1.str() + ")";
      break;
    }
    case SequenceModel::Kind::kExplicit:
      desc = "explicit family of " + std::to_string(model.explicit_data().events.size()) +
             " events";
      break;
  }
  switch (marginal_series_nature(model, b)) {
    case SeriesNature::kDivergent:
      return {SeriesSum::kDivergent, desc};
    case SeriesNature::kConvergent:
      return {SeriesSum::kConvergent, desc};
    case SeriesNature::kFiniteFamily:
      return {SeriesSum::kFiniteFamily, desc};
  }
  throw Error("unreachable");
}

}  // namespace

RateFunction divergence_rate(const SequenceModel& model, long N_max, long n_budget) {
  if (N_max < 1) throw InvalidInput("N_max must be >= 1");
  if (n_budget < 1) throw InvalidInput("scan budget must be >= 1");
  std::vector<RateTable> tables;
  for (std::size_t b = 0; b < model.block_count(); ++b) {
    RateTable t;
    t.level_min = 1;
    if (model.block_is_null(b)) {
      t.status = RateStatus::kInapplicable;
      t.provenance = "null block";
      tables.push_back(std::move(t));
      continue;
    }
    SeriesClass cls = classify_block(model, b);
    if (cls.sum == SeriesSum::kConvergent) {
      t.status = RateStatus::kInapplicable;
      t.provenance = cls.provenance + ": series convergent, no divergence rate";
      tables.push_back(std::move(t));
      continue;
    }
    t.status = RateStatus::kApplicable;
    t.provenance = cls.provenance;
    MarginalScanner scan(model, b);
    for (long N = 1; N <= N_max; ++N) {
      const Rational target(N);
      bool stopped = false;
      while (scan.partial_sum() < target) {
        if (!scan.has_next()) {
          t.status = RateStatus::kBudgetExhausted;
          t.provenance += "; family ends before level " + std::to_string(N);
          stopped = true;
          break;
        }
        if (scan.index() >= n_budget) {
          t.status = RateStatus::kBudgetExhausted;
          t.provenance += "; scan budget " + std::to_string(n_budget) +
                          " reached before level " + std::to_string(N);
          stopped = true;
          break;
        }
        scan.advance();
      }
      if (stopped) break;
      t.entries.push_back(scan.index());
    }
    tables.push_back(std::move(t));
  }
  return RateFunction(std::move(tables));
}

namespace {

// Least n >= lo with bound(n) <= target, assuming the bound is nonincreasing
// in n and eventually drops below any positive target.
template <typename BoundFn>
long least_index_at_most(BoundFn&& bound, const Rational& target, long lo) {
  long hi = lo;
  while (bound(hi) > target) {
    if (hi > (1L << 60)) throw Error("tail bound failed to drop below the target");
    lo = hi + 1;
    hi *= 2;
  }
  while (lo < hi) {
    long mid = lo + (hi - lo) / 2;
    if (bound(mid) <= target) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace

RateFunction convergence_rate(const SequenceModel& model, long l_max) {
  if (l_max < 0) throw InvalidInput("l_max must be >= 0");
  std::vector<RateTable> tables;
  for (std::size_t b = 0; b < model.block_count(); ++b) {
    RateTable t;
    t.level_min = 0;
    if (model.block_is_null(b)) {
      t.status = RateStatus::kInapplicable;
      t.provenance = "null block";
      tables.push_back(std::move(t));
      continue;
    }

    std::function<Rational(long)> bound;
    std::string why_not;
    switch (model.kind()) {
      case SequenceModel::Kind::kMixtureBernoulli: {
        const ProbFormula& f = model.bernoulli_components()[b].p;
        if (f.tail_upper_bound(1).has_value()) {
          bound = [f](long n) { return *f.tail_upper_bound(n); };
          t.provenance = f.describe() + ": closed-form tail bound";
        } else {
          why_not = f.describe() + ": no finite tail bound";
        }
        break;
      }
      case SequenceModel::Kind::kMixtureMarkov: {
        const MarkovComponent& c = model.markov_components()[b];
        if (c.q0.sign() > 0 || (c.q1.is_one() && c.pi1.sign() > 0)) {
          why_not = "markov marginals do not vanish, series divergent";
        } else if (c.pi1.is_zero()) {
          bound = [](long) { return Rational(0); };
          t.provenance = "markov: identically zero marginals";
        } else {
          // q0 = 0, q1 < 1: pi_n = pi1 * q1^(n-1), an exact geometric tail.
          Rational pi1 = c.pi1, q1 = c.q1;
          bound = [pi1, q1](long n) { return pi1 * q1.pow(n - 1) / (Rational(1) - q1); };
          t.provenance = "markov: geometric tail pi1*q1^(n-1)/(1-q1)";
        }
        break;
      }
      case SequenceModel::Kind::kExplicit: {
        const auto& ex = model.explicit_data();
        const long len = static_cast<long>(ex.events.size());
        auto suffix = std::make_shared<std::vector<Rational>>(len + 2, Rational(0));
        for (long n = len; n >= 1; --n) {
          Rational p = conditional_probability(ex.space, ex.partition, ex.events[n - 1]).value(b);
          (*suffix)[n] = (*suffix)[n + 1] + p;
        }
        bound = [suffix, len](long n) {
          return n > len ? Rational(0) : (*suffix)[n];
        };
        t.provenance = "explicit family: exact finite suffix sums";
        break;
      }
    }

    if (!bound) {
      t.status = RateStatus::kInapplicable;
      t.provenance = why_not;
      tables.push_back(std::move(t));
      continue;
    }
    t.status = RateStatus::kApplicable;
    long prev = 1;
    for (long l = 0; l <= l_max; ++l) {
      prev = least_index_at_most(bound, Rational::pow2(-l), prev);
      t.entries.push_back(prev);
    }
    tables.push_back(std::move(t));
  }
  return RateFunction(std::move(tables));
}

CorrelationRate::CorrelationRate(const SequenceModel& model, long j_budget)
    : model_(&model), j_budget_(j_budget) {
  if (j_budget < 1) throw InvalidInput("scan budget must be >= 1");
  prefixes_.resize(model.block_count());
  scanners_.resize(model.block_count());
}

const CorrelationRate::Prefix& CorrelationRate::grow(std::size_t block, long j) const {
  Prefix& pre = prefixes_[block];
  if (!scanners_[block]) {
    scanners_[block] = std::make_unique<CorrelationScanner>(*model_, block);
  }
  CorrelationScanner& scan = *scanners_[block];
  while (static_cast<long>(pre.s.size()) < j && !pre.ended) {
    if (!scan.has_next()) {
      pre.ended = true;
      break;
    }
    scan.advance();
    pre.s.push_back(scan.marginal_sum());
    pre.d.push_back(scan.double_sum());
  }
  return pre;
}

CorrelationEntry CorrelationRate::at(std::size_t block, long level, long n) const {
  if (block >= model_->block_count()) throw InvalidInput("block index out of range");
  if (level < 0) throw InvalidInput("level must be >= 0");
  if (n < 1) throw InvalidInput("lower bound must be >= 1");
  CorrelationEntry out;
  if (model_->block_is_null(block)) {
    out.status = RateStatus::kInapplicable;
    out.note = "null block";
    return out;
  }
  const Rational target = Rational(1) + Rational::pow2(-level);
  for (long j = n; j <= j_budget_; ++j) {
    const Prefix& pre = grow(block, j);
    if (static_cast<long>(pre.s.size()) < j) {
      out.status = RateStatus::kBudgetExhausted;
      out.note = "family ends at " + std::to_string(pre.s.size()) + " without a witness";
      return out;
    }
    const Rational& s = pre.s[j - 1];
    if (s.is_zero()) continue;
    const Rational s2 = s * s;
    if (pre.d[j - 1] <= target * s2) {
      out.status = RateStatus::kApplicable;
      out.index = j;
      out.achieved_ratio = pre.d[j - 1] / s2;
      return out;
    }
  }
  out.status = RateStatus::kBudgetExhausted;
  out.note = "no witness up to the scan budget " + std::to_string(j_budget_);
  return out;
}

}  // namespace bcq
