#include "bcq/montecarlo.hpp"

#include <cmath>

#include "bcq/error.hpp"

namespace bcq {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t component, std::uint64_t trial) {
  std::uint64_t s = mix64(seed + kGolden);
  s = mix64(s ^ (component + kGolden));
  state_ = mix64(s ^ (trial + kGolden));
}

std::uint64_t RandomStream::next_word() {
  std::uint64_t z = (state_ += kGolden);
  return mix64(z);
}

bool RandomStream::bernoulli(const Rational& p) {
  if (p.sign() < 0 || p > Rational(1)) throw InvalidInput("bernoulli parameter must lie in [0,1]");
  if (p.is_zero()) return false;
  if (p.is_one()) return true;
  // Compare a uniform X = 0.w1 w2 ... (base 2^64 digits) against p digit by
  // digit; a tie on a digit defers to the next word, so P(X < p) = p exactly.
  mpz_class num = p.raw().get_num();
  const mpz_class& den = p.raw().get_den();
  while (true) {
    num <<= 64;
    mpz_class digit = num / den;
    mpz_class rest = num - digit * den;
    mpz_class w(static_cast<unsigned long>(next_word()));
    if (w < digit) return true;
    if (w > digit || rest == 0) return false;
    num = std::move(rest);
  }
}

Query Query::union_range(long from, long to) {
  if (from < 1 || to < from) throw InvalidInput("union range must satisfy 1 <= from <= to");
  return Query{Kind::kUnion, from, to};
}

Query Query::pattern(long n, long m) {
  if (n < 1 || m < 0) throw InvalidInput("pattern query needs n >= 1 and m >= 0");
  return Query{Kind::kPattern, n, m};
}

Query Query::pairwise(long i, long k) {
  if (i < 1 || k < 1) throw InvalidInput("pairwise indices must be >= 1");
  return Query{Kind::kPairwise, i, k};
}

long Query::max_index() const {
  switch (kind) {
    case Kind::kUnion:
      return b;
    case Kind::kPattern:
      return a + b;
    case Kind::kPairwise:
      return a > b ? a : b;
  }
  throw Error("unreachable");
}

bool Query::evaluate(const std::vector<bool>& path) const {
  switch (kind) {
    case Kind::kUnion:
      for (long i = a; i <= b; ++i) {
        if (path[static_cast<std::size_t>(i - 1)]) return true;
      }
      return false;
    case Kind::kPattern:
      for (long i = a; i < a + b; ++i) {
        if (path[static_cast<std::size_t>(i - 1)]) return false;
      }
      return path[static_cast<std::size_t>(a + b - 1)];
    case Kind::kPairwise:
      return path[static_cast<std::size_t>(a - 1)] && path[static_cast<std::size_t>(b - 1)];
  }
  throw Error("unreachable");
}

std::string Query::describe() const {
  switch (kind) {
    case Kind::kUnion:
      return "union[" + std::to_string(a) + ".." + std::to_string(b) + "]";
    case Kind::kPattern:
      return "pattern(n=" + std::to_string(a) + ",m=" + std::to_string(b) + ")";
    case Kind::kPairwise:
      return "pairwise(" + std::to_string(a) + "," + std::to_string(b) + ")";
  }
  throw Error("unreachable");
}

SimulationPlan::SimulationPlan(const SequenceModel& model, long horizon, long trials,
                               std::uint64_t seed, Query query)
    : model_(&model), horizon_(horizon), trials_(trials), seed_(seed), query_(query) {
  if (model.kind() == SequenceModel::Kind::kExplicit) {
    throw InvalidInput("explicit families are enumerated exactly and are not simulated");
  }
  if (horizon < 1) throw InvalidInput("horizon must be >= 1");
  if (trials < 1) throw InvalidInput("trials must be >= 1");
  if (query.max_index() > horizon) {
    throw InvalidInput("query reaches index " + std::to_string(query.max_index()) +
                       " beyond horizon " + std::to_string(horizon));
  }
}

double hoeffding_epsilon(long trials, double delta) {
  if (trials < 1) throw InvalidInput("trials must be >= 1");
  if (!(delta > 0.0) || !(delta < 1.0)) throw InvalidInput("delta must lie in (0,1)");
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(trials)));
}

std::vector<bool> sample_path(const SequenceModel& model, std::size_t component, long horizon,
                              RandomStream& stream) {
  if (horizon < 1) throw InvalidInput("horizon must be >= 1");
  if (component >= model.block_count()) throw InvalidInput("component index out of range");
  std::vector<bool> path(static_cast<std::size_t>(horizon));
  switch (model.kind()) {
    case SequenceModel::Kind::kExplicit:
      throw InvalidInput("explicit families are enumerated exactly and are not simulated");
    case SequenceModel::Kind::kMixtureBernoulli: {
      const ProbFormula& f = model.bernoulli_components()[component].p;
      for (long n = 1; n <= horizon; ++n) {
        path[static_cast<std::size_t>(n - 1)] = stream.bernoulli(f.value(n));
      }
      return path;
    }
    case SequenceModel::Kind::kMixtureMarkov: {
      const MarkovComponent& c = model.markov_components()[component];
      bool cur = stream.bernoulli(c.pi1);
      path[0] = cur;
      for (long n = 2; n <= horizon; ++n) {
        cur = stream.bernoulli(cur ? c.q1 : c.q0);
        path[static_cast<std::size_t>(n - 1)] = cur;
      }
      return path;
    }
  }
  throw Error("unreachable");
}

Estimate estimate_query(const SimulationPlan& plan, double delta) {
  const SequenceModel& model = plan.model();
  Estimate out;
  out.trials = plan.trials();
  out.delta = delta;
  out.epsilon = hoeffding_epsilon(plan.trials(), delta);
  out.query = plan.query().describe();
  for (std::size_t b = 0; b < model.block_count(); ++b) {
    if (model.block_is_null(b)) {
      out.points.emplace_back();
      continue;
    }
    long hits = 0;
    for (long t = 1; t <= plan.trials(); ++t) {
      RandomStream stream(plan.seed(), b, static_cast<std::uint64_t>(t));
      std::vector<bool> path = sample_path(model, b, plan.horizon(), stream);
      if (plan.query().evaluate(path)) ++hits;
    }
    out.points.emplace_back(Rational(hits, plan.trials()));
  }
  return out;
}

const char* trend_name(Trend t) {
  switch (t) {
    case Trend::kApproachingOne:
      return "approaching-one";
    case Trend::kRising:
      return "rising";
    case Trend::kPlateau:
      return "plateau";
  }
  throw Error("unreachable");
}

HorizonSweep horizon_sweep(const SimulationPlan& plan, const std::vector<long>& horizons,
                           double delta) {
  if (plan.query().kind != Query::Kind::kUnion) {
    throw InvalidInput("horizon sweep varies a union query's right endpoint");
  }
  if (horizons.empty()) throw InvalidInput("at least one horizon is required");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < plan.query().a) {
      throw InvalidInput("horizons must not precede the union start");
    }
    if (i > 0 && horizons[i] <= horizons[i - 1]) {
      throw InvalidInput("horizons must be strictly ascending");
    }
  }
  if (horizons.back() > plan.horizon()) {
    throw InvalidInput("plan horizon does not cover the last sweep point");
  }

  HorizonSweep out;
  out.horizons = horizons;
  for (long H : horizons) {
    SimulationPlan step(plan.model(), plan.horizon(), plan.trials(), plan.seed(),
                        Query::union_range(plan.query().a, H));
    out.estimates.push_back(estimate_query(step, delta));
  }

  const std::size_t B = plan.model().block_count();
  const double eps = out.estimates.back().epsilon;
  for (std::size_t b = 0; b < B; ++b) {
    if (plan.model().block_is_null(b)) {
      out.trends.emplace_back();
      continue;
    }
    double last = out.estimates.back().points[b]->to_double();
    double mid = out.estimates[out.estimates.size() / 2].points[b]->to_double();
    if (last + 2.0 * eps >= 1.0) {
      out.trends.emplace_back(Trend::kApproachingOne);
    } else if (last - mid > eps) {
      // Still gaining over the second half of the sweep.
      out.trends.emplace_back(Trend::kRising);
    } else {
      out.trends.emplace_back(Trend::kPlateau);
    }
  }
  return out;
}

}  // namespace bcq
