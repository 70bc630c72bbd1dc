#include "bcq/rates.hpp"

#include "doctest.h"
#include "test_support.hpp"

using bcq::CorrelationRate;
using bcq::Event;
using bcq::FiniteProbabilitySpace;
using bcq::InvalidInput;
using bcq::MarginalScanner;
using bcq::Partition;
using bcq::ProbFormula;
using bcq::Rational;
using bcq::RateFunction;
using bcq::RateStatus;
using bcq::SequenceModel;

namespace {

SequenceModel bernoulli_of(ProbFormula f) {
  return SequenceModel::mixture_bernoulli({{Rational(1), std::move(f)}});
}

}  // namespace

TEST_CASE("divergence rate closed forms") {
  RateFunction psi = bcq::divergence_rate(bernoulli_of(ProbFormula::constant(Rational(1, 2))), 5);
  REQUIRE(psi.table(0).status == RateStatus::kApplicable);
  for (long N = 1; N <= 5; ++N) CHECK(psi.at(0, N) == 2 * N);

  RateFunction ones = bcq::divergence_rate(bernoulli_of(ProbFormula::constant(Rational(1))), 4);
  for (long N = 1; N <= 4; ++N) CHECK(ones.at(0, N) == N);

  // Harmonic series crossings: H_1 = 1, H_4 > 2, H_11 > 3.
  RateFunction harmonic = bcq::divergence_rate(bernoulli_of(ProbFormula::power(Rational(1), 1)), 3);
  CHECK(harmonic.at(0, 1) == 1);
  CHECK(harmonic.at(0, 2) == 4);
  CHECK(harmonic.at(0, 3) == 11);
}

TEST_CASE("divergence rate flags convergent blocks without scanning") {
  RateFunction psi =
      bcq::divergence_rate(bernoulli_of(ProbFormula::geometric(Rational(1, 2), Rational(1, 2))), 3);
  CHECK(psi.table(0).status == RateStatus::kInapplicable);
  CHECK(psi.table(0).provenance.find("convergent") != std::string::npos);
  CHECK(!psi.at(0, 1).has_value());
  CHECK(!psi.any_applicable());
}

TEST_CASE("divergence rate distinguishes budget exhaustion") {
  auto model = bernoulli_of(ProbFormula::constant(Rational(1, 100)));
  RateFunction cut = bcq::divergence_rate(model, 2, 50);
  CHECK(cut.table(0).status == RateStatus::kBudgetExhausted);
  CHECK(cut.table(0).entries.empty());

  RateFunction partial = bcq::divergence_rate(model, 2, 150);
  CHECK(partial.table(0).status == RateStatus::kBudgetExhausted);
  REQUIRE(partial.table(0).entries.size() == 1);
  CHECK(partial.at(0, 1) == 100);
  CHECK(!partial.at(0, 2).has_value());
}

TEST_CASE("divergence rate on markov components") {
  auto stay = SequenceModel::mixture_markov(
      {{Rational(1), Rational(1, 2), Rational(0), Rational(1)}});
  RateFunction psi = bcq::divergence_rate(stay, 3);
  for (long N = 1; N <= 3; ++N) CHECK(psi.at(0, N) == 2 * N);

  auto decaying = SequenceModel::mixture_markov(
      {{Rational(1), Rational(1, 2), Rational(0), Rational(1, 2)}});
  CHECK(bcq::divergence_rate(decaying, 3).table(0).status == RateStatus::kInapplicable);

  auto driven = SequenceModel::mixture_markov(
      {{Rational(1), Rational(0), Rational(1, 4), Rational(1, 2)}});
  RateFunction d = bcq::divergence_rate(driven, 2);
  CHECK(d.table(0).status == RateStatus::kApplicable);
}

TEST_CASE("mixture blocks are rated independently") {
  auto mix = SequenceModel::mixture_bernoulli(
      {{Rational(1, 2), ProbFormula::constant(Rational(1, 2))},
       {Rational(1, 2), ProbFormula::geometric(Rational(1, 2), Rational(1, 2))}});
  RateFunction psi = bcq::divergence_rate(mix, 3);
  CHECK(psi.table(0).status == RateStatus::kApplicable);
  CHECK(psi.table(1).status == RateStatus::kInapplicable);
  CHECK(psi.any_applicable());
}

TEST_CASE("convergence rate closed forms") {
  RateFunction phi =
      bcq::convergence_rate(bernoulli_of(ProbFormula::geometric(Rational(1, 2), Rational(1, 2))), 8);
  REQUIRE(phi.table(0).status == RateStatus::kApplicable);
  for (long l = 0; l <= 8; ++l) CHECK(phi.at(0, l) == l + 1);

  CHECK(bcq::convergence_rate(bernoulli_of(ProbFormula::constant(Rational(1, 2))), 4)
            .table(0).status == RateStatus::kInapplicable);

  // power(1,2): bound from n is 1/n + 1/n^2; least n with bound <= 1, 1/2, 1/4.
  RateFunction pw = bcq::convergence_rate(bernoulli_of(ProbFormula::power(Rational(1), 2)), 2);
  CHECK(pw.at(0, 0) == 2);
  CHECK(pw.at(0, 1) == 3);
  CHECK(pw.at(0, 2) == 5);
}

TEST_CASE("convergence rate on markov and explicit models") {
  auto decaying = SequenceModel::mixture_markov(
      {{Rational(1), Rational(1, 2), Rational(0), Rational(1, 2)}});
  // Tail from n: pi1 q1^{n-1}/(1-q1) = 2^{-n} * 2 = 2^{-(n-1)}, same as the
  // geometric family above.
  RateFunction phi = bcq::convergence_rate(decaying, 6);
  for (long l = 0; l <= 6; ++l) CHECK(phi.at(0, l) == l + 1);

  auto driven = SequenceModel::mixture_markov(
      {{Rational(1), Rational(0), Rational(1, 4), Rational(1, 2)}});
  CHECK(bcq::convergence_rate(driven, 3).table(0).status == RateStatus::kInapplicable);

  FiniteProbabilitySpace space(std::vector<Rational>(4, Rational(1, 4)));
  auto exp_model = SequenceModel::explicit_model(
      space, Partition::trivial(4), {Event({0, 1}), Event({0}), Event({1})});
  // Marginals 1/2, 1/4, 1/4; suffix sums 1, 1/2, 1/4, 0.
  RateFunction pe = bcq::convergence_rate(exp_model, 3);
  CHECK(pe.at(0, 0) == 1);
  CHECK(pe.at(0, 1) == 2);
  CHECK(pe.at(0, 2) == 3);
  CHECK(pe.at(0, 3) == 4);  // only the empty tail is small enough
}

TEST_CASE("rate tables are sound and monotone on random models") {
  bcq::testing::Gen gen(0x5eed0401);
  for (int iter = 0; iter < 25; ++iter) {
    SequenceModel model = gen.flip() ? bcq::testing::random_bernoulli_mixture(gen, 3)
                                     : bcq::testing::random_markov_mixture(gen, 3);
    RateFunction psi = bcq::divergence_rate(model, 4, 5000);
    RateFunction phi = bcq::convergence_rate(model, 5);
    for (std::size_t b = 0; b < model.block_count(); ++b) {
      const auto& pt = psi.table(b);
      long prev = 0;
      for (std::size_t i = 0; i < pt.entries.size(); ++i) {
        const long level = pt.level_min + static_cast<long>(i);
        const long idx = pt.entries[i];
        CHECK(idx >= prev);
        prev = idx;
        MarginalScanner scan(model, b);
        for (long n = 1; n <= idx; ++n) scan.advance();
        CHECK(scan.partial_sum() >= Rational(level));
        // Least witness: one step earlier the sum is still short.
        if (idx > 1) {
          MarginalScanner before(model, b);
          for (long n = 1; n < idx; ++n) before.advance();
          CHECK(before.partial_sum() < Rational(level));
        }
      }
      const auto& ft = phi.table(b);
      prev = 0;
      for (std::size_t i = 0; i < ft.entries.size(); ++i) {
        CHECK(ft.entries[i] >= prev);
        prev = ft.entries[i];
      }
    }
  }
}

TEST_CASE("correlation rate matches the constant closed form") {
  auto model = bernoulli_of(ProbFormula::constant(Rational(1, 2)));
  CorrelationRate rate(model, 10000);
  for (long l = 0; l <= 4; ++l) {
    for (long n : {1L, 3L, 10L}) {
      auto e = rate.at(0, l, n);
      REQUIRE(e.status == RateStatus::kApplicable);
      long expected = std::max(n, 1L << l);
      CHECK(e.index == expected);
      CHECK(e.achieved_ratio == Rational(1) + Rational(1, expected));
    }
  }
}

TEST_CASE("correlation rate exhausts on perfectly correlated events") {
  FiniteProbabilitySpace space({Rational(1, 4), Rational(3, 4)});
  std::vector<Event> repeated(6, Event({0}));
  auto model = SequenceModel::explicit_model(space, Partition::trivial(2), repeated);
  CorrelationRate rate(model, 10000);
  auto e = rate.at(0, 1, 1);
  CHECK(e.status == RateStatus::kBudgetExhausted);
  CHECK(e.note.find("family ends") != std::string::npos);

  auto half = bernoulli_of(ProbFormula::constant(Rational(1, 2)));
  CorrelationRate budget(half, 3);
  auto miss = budget.at(0, 3, 1);  // needs j >= 8, budget 3
  CHECK(miss.status == RateStatus::kBudgetExhausted);
}

TEST_CASE("correlation rate entries satisfy their defining inequality") {
  bcq::testing::Gen gen(0x5eed0402);
  for (int iter = 0; iter < 15; ++iter) {
    SequenceModel model = gen.flip() ? bcq::testing::random_bernoulli_mixture(gen, 2)
                                     : bcq::testing::random_markov_mixture(gen, 2);
    CorrelationRate rate(model, 300);
    for (std::size_t b = 0; b < model.block_count(); ++b) {
      for (long l : {0L, 1L, 2L}) {
        auto e = rate.at(b, l, 2);
        if (e.status != RateStatus::kApplicable) continue;
        CHECK(e.index >= 2);
        CHECK(e.achieved_ratio <= Rational(1) + Rational::pow2(-l));
        // Re-derive the ratio directly at the witness.
        bcq::CorrelationScanner scan(model, b);
        for (long j = 0; j < e.index; ++j) scan.advance();
        CHECK(scan.double_sum() ==
              e.achieved_ratio * scan.marginal_sum() * scan.marginal_sum());
      }
    }
  }
}

TEST_CASE("rate argument validation") {
  auto m = bernoulli_of(ProbFormula::constant(Rational(1, 2)));
  CHECK_THROWS_AS(bcq::divergence_rate(m, 0), InvalidInput);
  CHECK_THROWS_AS(bcq::convergence_rate(m, -1), InvalidInput);
  CorrelationRate rate(m, 100);
  CHECK_THROWS_AS(rate.at(5, 0, 1), InvalidInput);
  CHECK_THROWS_AS(rate.at(0, -1, 1), InvalidInput);
  CHECK_THROWS_AS(rate.at(0, 0, 0), InvalidInput);
}
