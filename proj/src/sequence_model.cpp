#include "bcq/sequence_model.hpp"

#include <algorithm>

#include "bcq/error.hpp"

namespace bcq {
namespace {

void check_unit_interval(const Rational& v, const char* what) {
  if (v.sign() < 0 || v > Rational(1)) {
    throw InvalidInput(std::string(what) + " = " + v.str() + " outside [0,1]");
  }
}

}  // namespace

ProbFormula::ProbFormula(Family f, Rational c, Rational r, long s)
    : family_(f), c_(std::move(c)), r_(std::move(r)), s_(s) {}

ProbFormula ProbFormula::constant(Rational c) {
  check_unit_interval(c, "constant c");
  return ProbFormula(Family::kConstant, std::move(c), Rational(0), 0);
}

ProbFormula ProbFormula::geometric(Rational c, Rational r) {
  check_unit_interval(c, "geometric c");
  check_unit_interval(r, "geometric r");
  return ProbFormula(Family::kGeometric, std::move(c), std::move(r), 0);
}

ProbFormula ProbFormula::power(Rational c, long s) {
  check_unit_interval(c, "power c");
  if (s < 0) throw InvalidInput("power s = " + std::to_string(s) + " must be a nonnegative integer");
  return ProbFormula(Family::kPower, std::move(c), Rational(0), s);
}

Rational ProbFormula::value(long n) const {
  if (n < 1) throw InvalidInput("sequence index " + std::to_string(n) + " must be >= 1");
  switch (family_) {
    case Family::kConstant:
      return c_;
    case Family::kGeometric:
      return c_ * r_.pow(n - 1);
    case Family::kPower:
      return c_ * Rational(n).pow(-s_);
  }
  throw Error("unreachable");
}

bool ProbFormula::series_converges() const {
  if (c_.is_zero()) return true;
  switch (family_) {
    case Family::kConstant:
      return false;
    case Family::kGeometric:
      return r_ < Rational(1);
    case Family::kPower:
      return s_ >= 2;
  }
  throw Error("unreachable");
}

bool ProbFormula::tends_to_zero() const {
  if (c_.is_zero()) return true;
  switch (family_) {
    case Family::kConstant:
      return false;
    case Family::kGeometric:
      return r_ < Rational(1);
    case Family::kPower:
      return s_ >= 1;
  }
  throw Error("unreachable");
}

std::optional<Rational> ProbFormula::tail_upper_bound(long from) const {
  if (from < 1) throw InvalidInput("tail start must be >= 1");
  if (c_.is_zero()) return Rational(0);
  switch (family_) {
    case Family::kConstant:
      return std::nullopt;
    case Family::kGeometric: {
      if (r_ >= Rational(1)) return std::nullopt;
      if (r_.is_zero()) return from == 1 ? c_ : Rational(0);
      // Exact tail of the geometric series.
      return c_ * r_.pow(from - 1) / (Rational(1) - r_);
    }
    case Family::kPower: {
      if (s_ < 2) return std::nullopt;
      // sum_{i>=n} i^{-s} <= n^{-s} + integral_n^inf x^{-s} dx
      Rational n(from);
      return c_ * (n.pow(1 - s_) / Rational(s_ - 1) + n.pow(-s_));
    }
  }
  throw Error("unreachable");
}

std::string ProbFormula::describe() const {
  switch (family_) {
    case Family::kConstant:
      return "constant(" + c_.str() + ")";
    case Family::kGeometric:
      return "geometric(" + c_.str() + "," + r_.str() + ")";
    case Family::kPower:
      return "power(" + c_.str() + "," + std::to_string(s_) + ")";
  }
  throw Error("unreachable");
}

SequenceModel SequenceModel::explicit_model(FiniteProbabilitySpace space, Partition f,
                                            std::vector<Event> events) {
  if (f.outcome_count() != space.size()) {
    throw InvalidInput("partition outcome count does not match the space");
  }
  for (const Event& e : events) space.validate(e);
  SequenceModel m;
  m.kind_ = Kind::kExplicit;
  m.data_ = ExplicitModel{std::move(space), std::move(f), std::move(events)};
  return m;
}

namespace {

void check_weights_sum_one(const std::vector<Rational>& weights) {
  if (weights.empty()) throw InvalidInput("mixture needs at least one component");
  Rational total(0);
  for (const Rational& w : weights) {
    if (w.sign() <= 0) throw InvalidInput("component weight " + w.str() + " must be positive");
    total += w;
  }
  if (!total.is_one()) {
    throw InvalidInput("component weights sum " + total.str() + " != 1");
  }
}

}  // namespace

SequenceModel SequenceModel::mixture_bernoulli(std::vector<BernoulliComponent> components) {
  std::vector<Rational> ws;
  for (const auto& c : components) ws.push_back(c.weight);
  check_weights_sum_one(ws);
  SequenceModel m;
  m.kind_ = Kind::kMixtureBernoulli;
  m.data_ = std::move(components);
  return m;
}

SequenceModel SequenceModel::mixture_markov(std::vector<MarkovComponent> components) {
  std::vector<Rational> ws;
  for (const auto& c : components) {
    ws.push_back(c.weight);
    check_unit_interval(c.pi1, "pi1");
    check_unit_interval(c.q0, "q0");
    check_unit_interval(c.q1, "q1");
  }
  check_weights_sum_one(ws);
  SequenceModel m;
  m.kind_ = Kind::kMixtureMarkov;
  m.data_ = std::move(components);
  return m;
}

const std::vector<BernoulliComponent>& SequenceModel::bernoulli_components() const {
  if (kind_ != Kind::kMixtureBernoulli) throw InvalidInput("not a Bernoulli mixture model");
  return std::get<std::vector<BernoulliComponent>>(data_);
}

const std::vector<MarkovComponent>& SequenceModel::markov_components() const {
  if (kind_ != Kind::kMixtureMarkov) throw InvalidInput("not a Markov mixture model");
  return std::get<std::vector<MarkovComponent>>(data_);
}

const ExplicitModel& SequenceModel::explicit_data() const {
  if (kind_ != Kind::kExplicit || !std::holds_alternative<ExplicitModel>(data_)) {
    throw InvalidInput("not an explicit model");
  }
  return std::get<ExplicitModel>(data_);
}

std::size_t SequenceModel::block_count() const {
  switch (kind_) {
    case Kind::kExplicit:
      return explicit_data().partition.block_count();
    case Kind::kMixtureBernoulli:
      return bernoulli_components().size();
    case Kind::kMixtureMarkov:
      return markov_components().size();
  }
  throw Error("unreachable");
}

Rational SequenceModel::block_weight(std::size_t b) const {
  if (b >= block_count()) throw InvalidInput("block index out of range");
  switch (kind_) {
    case Kind::kExplicit: {
      const auto& ex = explicit_data();
      return probability(ex.space, ex.partition.block(b));
    }
    case Kind::kMixtureBernoulli:
      return bernoulli_components()[b].weight;
    case Kind::kMixtureMarkov:
      return markov_components()[b].weight;
  }
  throw Error("unreachable");
}

bool SequenceModel::block_is_null(std::size_t b) const {
  return block_weight(b).is_zero();
}

std::optional<long> SequenceModel::max_index() const {
  if (kind_ == Kind::kExplicit) {
    return static_cast<long>(explicit_data().events.size());
  }
  return std::nullopt;
}

std::string SequenceModel::block_label(std::size_t b) const {
  switch (kind_) {
    case Kind::kExplicit:
      return "block" + std::to_string(b);
    case Kind::kMixtureBernoulli:
      return "component" + std::to_string(b) + ":" + bernoulli_components()[b].p.describe();
    case Kind::kMixtureMarkov: {
      const auto& c = markov_components()[b];
      return "component" + std::to_string(b) + ":markov(" + c.pi1.str() + "," + c.q0.str() +
             "," + c.q1.str() + ")";
    }
  }
  throw Error("unreachable");
}

namespace {

void check_model_index(const SequenceModel& model, long n) {
  if (n < 1) throw InvalidInput("sequence index " + std::to_string(n) + " must be >= 1");
  if (auto mx = model.max_index(); mx && n > *mx) {
    throw InvalidInput("index " + std::to_string(n) + " beyond the explicit family of " +
                       std::to_string(*mx) + " events");
  }
}

}  // namespace

Rational SequenceModel::markov_marginal(std::size_t component, long n) const {
  const auto& comps = markov_components();
  if (component >= comps.size()) throw InvalidInput("component index out of range");
  if (n < 1) throw InvalidInput("sequence index must be >= 1");
  const MarkovComponent& c = comps[component];
  Rational pi = c.pi1;
  for (long k = 1; k < n; ++k) {
    pi = pi * c.q1 + (Rational(1) - pi) * c.q0;
  }
  return pi;
}

BlockFunction SequenceModel::cond_marginal(long n) const {
  check_model_index(*this, n);
  switch (kind_) {
    case Kind::kExplicit: {
      const auto& ex = explicit_data();
      return conditional_probability(ex.space, ex.partition, ex.events[n - 1]);
    }
    case Kind::kMixtureBernoulli: {
      std::vector<Rational> vals;
      for (const auto& c : bernoulli_components()) vals.push_back(c.p.value(n));
      return BlockFunction(std::move(vals));
    }
    case Kind::kMixtureMarkov: {
      std::vector<Rational> vals;
      for (std::size_t b = 0; b < markov_components().size(); ++b) {
        vals.push_back(markov_marginal(b, n));
      }
      return BlockFunction(std::move(vals));
    }
  }
  throw Error("unreachable");
}

BlockFunction SequenceModel::pattern_probability(long n, long m) const {
  if (m < 0) throw InvalidInput("pattern gap must be >= 0");
  check_model_index(*this, n);
  check_model_index(*this, n + m);
  switch (kind_) {
    case Kind::kExplicit: {
      const auto& ex = explicit_data();
      Event acc = Event::full(ex.space.size());
      for (long i = n; i < n + m; ++i) {
        acc = event_intersection(acc, event_complement(ex.events[i - 1], ex.space.size()));
      }
      acc = event_intersection(acc, ex.events[n + m - 1]);
      return conditional_probability(ex.space, ex.partition, acc);
    }
    case Kind::kMixtureBernoulli: {
      std::vector<Rational> vals;
      for (const auto& c : bernoulli_components()) {
        Rational prod(1);
        for (long i = n; i < n + m; ++i) prod *= Rational(1) - c.p.value(i);
        vals.push_back(prod * c.p.value(n + m));
      }
      return BlockFunction(std::move(vals));
    }
    case Kind::kMixtureMarkov: {
      std::vector<Rational> vals;
      for (std::size_t b = 0; b < markov_components().size(); ++b) {
        const MarkovComponent& c = markov_components()[b];
        if (m == 0) {
          vals.push_back(markov_marginal(b, n));
        } else {
          Rational miss = Rational(1) - c.q0;
          vals.push_back((Rational(1) - markov_marginal(b, n)) * miss.pow(m - 1) * c.q0);
        }
      }
      return BlockFunction(std::move(vals));
    }
  }
  throw Error("unreachable");
}

BlockFunction SequenceModel::run_probability(long from, long to) const {
  if (from > to) throw InvalidInput("run range start exceeds end");
  check_model_index(*this, from);
  check_model_index(*this, to);
  switch (kind_) {
    case Kind::kExplicit: {
      const auto& ex = explicit_data();
      Event acc = Event::full(ex.space.size());
      for (long i = from; i <= to; ++i) {
        acc = event_intersection(acc, event_complement(ex.events[i - 1], ex.space.size()));
      }
      return conditional_probability(ex.space, ex.partition, acc);
    }
    case Kind::kMixtureBernoulli: {
      std::vector<Rational> vals;
      for (const auto& c : bernoulli_components()) {
        Rational prod(1);
        for (long i = from; i <= to; ++i) prod *= Rational(1) - c.p.value(i);
        vals.push_back(prod);
      }
      return BlockFunction(std::move(vals));
    }
    case Kind::kMixtureMarkov: {
      std::vector<Rational> vals;
      for (std::size_t b = 0; b < markov_components().size(); ++b) {
        const MarkovComponent& c = markov_components()[b];
        Rational miss = Rational(1) - c.q0;
        vals.push_back((Rational(1) - markov_marginal(b, from)) * miss.pow(to - from));
      }
      return BlockFunction(std::move(vals));
    }
  }
  throw Error("unreachable");
}

BlockFunction SequenceModel::union_probability(long from, long to) const {
  if (kind_ == Kind::kExplicit) {
    if (from > to) throw InvalidInput("union range start exceeds end");
    check_model_index(*this, from);
    check_model_index(*this, to);
    const auto& ex = explicit_data();
    Event acc;
    for (long i = from; i <= to; ++i) acc = event_union(acc, ex.events[i - 1]);
    return conditional_probability(ex.space, ex.partition, acc);
  }
  BlockFunction run = run_probability(from, to);
  std::vector<Rational> vals;
  for (std::size_t b = 0; b < run.block_count(); ++b) {
    vals.push_back(Rational(1) - run.value(b));
  }
  return BlockFunction(std::move(vals));
}

BlockFunction SequenceModel::pairwise_joint(long i, long k) const {
  check_model_index(*this, i);
  check_model_index(*this, k);
  if (i == k) return cond_marginal(i);
  long lo = std::min(i, k), hi = std::max(i, k);
  switch (kind_) {
    case Kind::kExplicit: {
      const auto& ex = explicit_data();
      return conditional_probability(ex.space, ex.partition,
                                     event_intersection(ex.events[i - 1], ex.events[k - 1]));
    }
    case Kind::kMixtureBernoulli: {
      std::vector<Rational> vals;
      for (const auto& c : bernoulli_components()) {
        vals.push_back(c.p.value(lo) * c.p.value(hi));
      }
      return BlockFunction(std::move(vals));
    }
    case Kind::kMixtureMarkov: {
      std::vector<Rational> vals;
      for (std::size_t b = 0; b < markov_components().size(); ++b) {
        const MarkovComponent& c = markov_components()[b];
        // a_s = P(I_{t+s} = 1 | I_t = 1) for the homogeneous chain
        Rational a = c.q1;
        for (long s = 1; s < hi - lo; ++s) a = a * c.q1 + (Rational(1) - a) * c.q0;
        vals.push_back(markov_marginal(b, lo) * a);
      }
      return BlockFunction(std::move(vals));
    }
  }
  throw Error("unreachable");
}

Materialized SequenceModel::materialize(long horizon, const MaterializeOptions& opts) const {
  if (kind_ == Kind::kExplicit) {
    const auto& ex = explicit_data();
    return Materialized{ex.space, ex.partition, ex.events};
  }
  if (horizon < 1) throw InvalidInput("horizon must be >= 1");
  if (horizon > opts.horizon_cap) {
    throw ResourceLimit("horizon " + std::to_string(horizon) + " exceeds the cap of " +
                        std::to_string(opts.horizon_cap));
  }
  const std::uint64_t cap = opts.space_cap ? opts.space_cap : effective_space_cap();
  const std::size_t comps = block_count();
  if (horizon >= 62 || (static_cast<std::uint64_t>(comps) << horizon) > cap) {
    throw ResourceLimit("materialization needs " + std::to_string(comps) + " * 2^" +
                        std::to_string(horizon) + " outcomes, over the cap of " +
                        std::to_string(cap));
  }
  const std::uint64_t paths = std::uint64_t{1} << horizon;
  std::vector<Rational> weights;
  weights.reserve(comps * paths);
  for (std::size_t b = 0; b < comps; ++b) {
    const Rational wb = block_weight(b);
    if (kind_ == Kind::kMixtureBernoulli) {
      const ProbFormula& p = bernoulli_components()[b].p;
      std::vector<Rational> pv;
      for (long n = 1; n <= horizon; ++n) pv.push_back(p.value(n));
      for (std::uint64_t path = 0; path < paths; ++path) {
        Rational w = wb;
        for (long n = 1; n <= horizon; ++n) {
          bool hit = (path >> (n - 1)) & 1;
          w *= hit ? pv[n - 1] : Rational(1) - pv[n - 1];
        }
        weights.push_back(std::move(w));
      }
    } else {
      const MarkovComponent& c = markov_components()[b];
      for (std::uint64_t path = 0; path < paths; ++path) {
        bool prev = path & 1;
        Rational w = wb * (prev ? c.pi1 : Rational(1) - c.pi1);
        for (long n = 2; n <= horizon; ++n) {
          bool hit = (path >> (n - 1)) & 1;
          const Rational& stay = prev ? c.q1 : c.q0;
          w *= hit ? stay : Rational(1) - stay;
          prev = hit;
        }
        weights.push_back(std::move(w));
      }
    }
  }
  FiniteProbabilitySpace space(std::move(weights));

  std::vector<Event> blocks;
  for (std::size_t b = 0; b < comps; ++b) {
    std::vector<std::uint32_t> ids(paths);
    for (std::uint64_t p = 0; p < paths; ++p) {
      ids[p] = static_cast<std::uint32_t>(b * paths + p);
    }
    blocks.emplace_back(std::move(ids));
  }
  Partition partition(space.size(), std::move(blocks));

  std::vector<Event> events;
  for (long n = 1; n <= horizon; ++n) {
    std::vector<std::uint32_t> ids;
    ids.reserve(comps * paths / 2);
    for (std::size_t b = 0; b < comps; ++b) {
      for (std::uint64_t p = 0; p < paths; ++p) {
        if ((p >> (n - 1)) & 1) ids.push_back(static_cast<std::uint32_t>(b * paths + p));
      }
    }
    events.emplace_back(std::move(ids));
  }
  return Materialized{std::move(space), std::move(partition), std::move(events)};
}

SeriesNature marginal_series_nature(const SequenceModel& model, std::size_t block) {
  if (block >= model.block_count()) throw InvalidInput("block index out of range");
  switch (model.kind()) {
    case SequenceModel::Kind::kExplicit:
      return SeriesNature::kFiniteFamily;
    case SequenceModel::Kind::kMixtureBernoulli:
      return model.bernoulli_components()[block].p.series_converges()
                 ? SeriesNature::kConvergent
                 : SeriesNature::kDivergent;
    case SequenceModel::Kind::kMixtureMarkov: {
      const MarkovComponent& c = model.markov_components()[block];
      // q0 > 0 pulls the chain toward a positive stationary level; with
      // q0 = 0 the marginal is pi1 * q1^(n-1), divergent only when frozen at
      // a positive value.
      bool divergent = c.q0.sign() > 0 || (c.q1.is_one() && c.pi1.sign() > 0);
      return divergent ? SeriesNature::kDivergent : SeriesNature::kConvergent;
    }
  }
  throw Error("unreachable");
}

std::optional<bool> marginals_vanish(const SequenceModel& model, std::size_t block) {
  if (block >= model.block_count()) throw InvalidInput("block index out of range");
  switch (model.kind()) {
    case SequenceModel::Kind::kExplicit:
      return std::nullopt;
    case SequenceModel::Kind::kMixtureBernoulli:
      return model.bernoulli_components()[block].p.tends_to_zero();
    case SequenceModel::Kind::kMixtureMarkov: {
      const MarkovComponent& c = model.markov_components()[block];
      return c.q0.is_zero() && (c.q1 < Rational(1) || c.pi1.is_zero());
    }
  }
  throw Error("unreachable");
}

MarginalScanner::MarginalScanner(const SequenceModel& model, std::size_t block)
    : model_(&model), block_(block) {
  if (block >= model.block_count()) throw InvalidInput("block index out of range");
  if (auto mx = model.max_index()) limit_ = *mx;
  if (model.kind() == SequenceModel::Kind::kExplicit) {
    block_mass_ = model.block_weight(block);
  }
}

bool MarginalScanner::has_next() const { return limit_ < 0 || n_ < limit_; }

void MarginalScanner::advance() {
  if (!has_next()) throw InvalidInput("scanner advanced past the end of an explicit family");
  ++n_;
  switch (model_->kind()) {
    case SequenceModel::Kind::kExplicit: {
      const auto& ex = model_->explicit_data();
      if (block_mass_.is_zero()) {
        p_ = Rational(0);
      } else {
        p_ = probability(ex.space,
                         event_intersection(ex.events[n_ - 1], ex.partition.block(block_))) /
             block_mass_;
      }
      break;
    }
    case SequenceModel::Kind::kMixtureBernoulli: {
      const ProbFormula& f = model_->bernoulli_components()[block_].p;
      if (f.family() == Family::kGeometric) {
        aux_ = n_ == 1 ? f.c() : aux_ * f.r();
        p_ = aux_;
      } else {
        p_ = f.value(n_);
      }
      break;
    }
    case SequenceModel::Kind::kMixtureMarkov: {
      const MarkovComponent& c = model_->markov_components()[block_];
      aux_ = n_ == 1 ? c.pi1 : aux_ * c.q1 + (Rational(1) - aux_) * c.q0;
      p_ = aux_;
      break;
    }
  }
  sum_ += p_;
}

CorrelationScanner::CorrelationScanner(const SequenceModel& model, std::size_t block)
    : model_(&model), block_(block), marg_(model, block) {
  if (model.kind() == SequenceModel::Kind::kExplicit) {
    explicit_block_mass_ = model.block_weight(block);
  }
}

bool CorrelationScanner::has_next() const { return marg_.has_next(); }

void CorrelationScanner::advance() {
  const long j = marg_.index();  // moving to j + 1
  switch (model_->kind()) {
    case SequenceModel::Kind::kExplicit: {
      marg_.advance();
      const auto& ex = model_->explicit_data();
      cross_ = Rational(0);
      if (!explicit_block_mass_.is_zero()) {
        Event a_new = event_intersection(ex.events[j], ex.partition.block(block_));
        for (long i = 1; i <= j; ++i) {
          cross_ += probability(ex.space, event_intersection(ex.events[i - 1], a_new));
        }
        cross_ /= explicit_block_mass_;
      }
      break;
    }
    case SequenceModel::Kind::kMixtureBernoulli: {
      const Rational s_before = marg_.partial_sum();
      marg_.advance();
      cross_ = marg_.last() * s_before;
      break;
    }
    case SequenceModel::Kind::kMixtureMarkov: {
      const MarkovComponent& c = model_->markov_components()[block_];
      const Rational pi_j = marg_.last();
      const Rational s_jm1 = marg_.partial_sum() - pi_j;
      if (j == 0) {
        cross_ = Rational(0);
      } else {
        cross_ = (c.q1 - c.q0) * cross_ + c.q0 * s_jm1 + pi_j * c.q1;
      }
      marg_.advance();
      break;
    }
  }
  d_ += Rational(2) * cross_ + marg_.last();
}

RunScanner::RunScanner(const SequenceModel& model, std::size_t block)
    : model_(&model), block_(block), marg_(model, block) {
  if (model.kind() == SequenceModel::Kind::kExplicit) {
    block_mass_ = model.block_weight(block);
    survivors_ = model.explicit_data().partition.block(block);
  }
}

void RunScanner::advance() {
  marg_.advance();
  switch (model_->kind()) {
    case SequenceModel::Kind::kExplicit: {
      const auto& ex = model_->explicit_data();
      survivors_ = event_difference(survivors_, ex.events[marg_.index() - 1]);
      if (!block_mass_.is_zero()) run_ = probability(ex.space, survivors_) / block_mass_;
      break;
    }
    case SequenceModel::Kind::kMixtureBernoulli:
      run_ *= Rational(1) - marg_.last();
      break;
    case SequenceModel::Kind::kMixtureMarkov: {
      const MarkovComponent& c = model_->markov_components()[block_];
      run_ *= marg_.index() == 1 ? Rational(1) - c.pi1 : Rational(1) - c.q0;
      break;
    }
  }
}

}  // namespace bcq
