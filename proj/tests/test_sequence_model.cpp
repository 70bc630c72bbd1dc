#include "bcq/sequence_model.hpp"

#include "doctest.h"
#include "test_support.hpp"

using bcq::BernoulliComponent;
using bcq::BlockFunction;
using bcq::CorrelationScanner;
using bcq::Event;
using bcq::Family;
using bcq::FiniteProbabilitySpace;
using bcq::InvalidInput;
using bcq::MarginalScanner;
using bcq::MarkovComponent;
using bcq::Materialized;
using bcq::Partition;
using bcq::ProbFormula;
using bcq::Rational;
using bcq::ResourceLimit;
using bcq::SequenceModel;

namespace {

SequenceModel const_half() {
  return SequenceModel::mixture_bernoulli({{Rational(1), ProbFormula::constant(Rational(1, 2))}});
}

SequenceModel geom_half() {
  return SequenceModel::mixture_bernoulli(
      {{Rational(1), ProbFormula::geometric(Rational(1, 2), Rational(1, 2))}});
}

SequenceModel markov_example() {
  return SequenceModel::mixture_markov(
      {{Rational(1), Rational(1, 2), Rational(1, 4), Rational(3, 4)}});
}

SequenceModel s4_explicit() {
  FiniteProbabilitySpace space(std::vector<Rational>(4, Rational(1, 4)));
  Partition f2(4, {Event({0, 1}), Event({2, 3})});
  return SequenceModel::explicit_model(std::move(space), std::move(f2),
                                       {Event({2, 3}), Event({1, 3})});
}

}  // namespace

TEST_CASE("prob formula values and validation") {
  auto g = ProbFormula::geometric(Rational(1, 2), Rational(1, 2));
  CHECK(g.value(1) == Rational(1, 2));
  CHECK(g.value(3) == Rational(1, 8));
  auto p = ProbFormula::power(Rational(1), 2);
  CHECK(p.value(3) == Rational(1, 9));
  CHECK(ProbFormula::power(Rational(1, 2), 0).value(7) == Rational(1, 2));
  CHECK(ProbFormula::constant(Rational(1, 3)).value(100) == Rational(1, 3));
  auto r0 = ProbFormula::geometric(Rational(1, 3), Rational(0));
  CHECK(r0.value(1) == Rational(1, 3));
  CHECK(r0.value(2) == Rational(0));
  CHECK_THROWS_AS(g.value(0), InvalidInput);
  CHECK_THROWS_AS(ProbFormula::constant(Rational(3, 2)), InvalidInput);
  CHECK_THROWS_AS(ProbFormula::geometric(Rational(1, 2), Rational(-1, 2)), InvalidInput);
  CHECK_THROWS_AS(ProbFormula::power(Rational(1, 2), -1), InvalidInput);
}

TEST_CASE("prob formula analytic classification") {
  CHECK(!ProbFormula::constant(Rational(1, 2)).series_converges());
  CHECK(!ProbFormula::constant(Rational(1, 2)).tends_to_zero());
  CHECK(ProbFormula::constant(Rational(0)).series_converges());
  CHECK(ProbFormula::geometric(Rational(1, 2), Rational(1, 2)).series_converges());
  CHECK(!ProbFormula::geometric(Rational(1, 2), Rational(1)).series_converges());
  CHECK(ProbFormula::power(Rational(1), 2).series_converges());
  CHECK(!ProbFormula::power(Rational(1), 1).series_converges());
  CHECK(ProbFormula::power(Rational(1), 1).tends_to_zero());
  CHECK(!ProbFormula::power(Rational(1), 0).tends_to_zero());
}

TEST_CASE("tail upper bounds are rigorous and exact where promised") {
  auto g = ProbFormula::geometric(Rational(1, 2), Rational(1, 2));
  // Exact geometric tail: sum_{i>=n} 2^{-i} = 2^{-(n-1)}.
  CHECK(g.tail_upper_bound(1) == Rational(1));
  CHECK(g.tail_upper_bound(4) == Rational(1, 8));
  CHECK(!ProbFormula::constant(Rational(1, 2)).tail_upper_bound(5).has_value());
  CHECK(!ProbFormula::power(Rational(1), 1).tail_upper_bound(5).has_value());
  CHECK(ProbFormula::constant(Rational(0)).tail_upper_bound(5) == Rational(0));

  auto pw = ProbFormula::power(Rational(1), 2);
  auto bound = pw.tail_upper_bound(4);
  REQUIRE(bound.has_value());
  // True tail sum_{i>=4} i^{-2} = pi^2/6 - 1 - 1/4 - 1/9 ~ 0.2838; bound is
  // 1/4 + 1/16 = 5/16, above the tail and below the previous term's bound.
  CHECK(*bound == Rational(5, 16));
  Rational partial(0);
  for (long i = 4; i <= 2000; ++i) partial += pw.value(i);
  CHECK(partial < *bound);
}

TEST_CASE("mixture construction validates weights and parameters") {
  CHECK_THROWS_AS(SequenceModel::mixture_bernoulli({}), InvalidInput);
  CHECK_THROWS_AS(SequenceModel::mixture_bernoulli(
                      {{Rational(1, 2), ProbFormula::constant(Rational(1, 2))}}),
                  InvalidInput);
  CHECK_THROWS_AS(SequenceModel::mixture_markov(
                      {{Rational(1), Rational(3, 2), Rational(0), Rational(0)}}),
                  InvalidInput);
  auto two = SequenceModel::mixture_bernoulli(
      {{Rational(1, 2), ProbFormula::constant(Rational(1, 2))},
       {Rational(1, 2), ProbFormula::geometric(Rational(1, 2), Rational(1, 2))}});
  CHECK(two.block_count() == 2);
  CHECK(two.block_weight(1) == Rational(1, 2));
  CHECK(!two.block_is_null(0));
}

TEST_CASE("cond marginal closed forms") {
  CHECK(geom_half().cond_marginal(3).value(0) == Rational(1, 8));
  CHECK(markov_example().cond_marginal(2).value(0) == Rational(1, 2));
  // pi_3 = 1/2*3/4 + 1/2*1/4 = 1/2 again: this chain is stationary at 1/2.
  CHECK(markov_example().cond_marginal(3).value(0) == Rational(1, 2));
  auto ex = s4_explicit();
  BlockFunction m1 = ex.cond_marginal(1);
  CHECK(m1.value(0) == Rational(0));
  CHECK(m1.value(1) == Rational(1));
  CHECK_THROWS_AS(ex.cond_marginal(3), InvalidInput);
  CHECK_THROWS_AS(ex.cond_marginal(0), InvalidInput);
}

TEST_CASE("pattern probability closed forms") {
  CHECK(geom_half().pattern_probability(1, 1).value(0) == Rational(1, 8));
  CHECK(geom_half().pattern_probability(2, 1).value(0) == Rational(3, 32));
  CHECK(geom_half().pattern_probability(2, 0).value(0) ==
        geom_half().cond_marginal(2).value(0));
  CHECK(markov_example().pattern_probability(1, 1).value(0) == Rational(1, 8));
  CHECK(markov_example().pattern_probability(1, 3).value(0) ==
        Rational(1, 2) * Rational(3, 4) * Rational(3, 4) * Rational(1, 4));
}

TEST_CASE("union and run closed forms") {
  CHECK(const_half().union_probability(1, 2).value(0) == Rational(3, 4));
  CHECK(const_half().union_probability(3, 3).value(0) == Rational(1, 2));
  CHECK(markov_example().union_probability(1, 2).value(0) == Rational(5, 8));
  CHECK(const_half().run_probability(1, 4).value(0) == Rational(1, 16));
  CHECK(markov_example().run_probability(2, 4).value(0) ==
        Rational(1, 2) * Rational(3, 4) * Rational(3, 4));
}

TEST_CASE("pairwise joints") {
  CHECK(const_half().pairwise_joint(1, 2).value(0) == Rational(1, 4));
  CHECK(const_half().pairwise_joint(1, 1).value(0) == Rational(1, 2));
  CHECK(markov_example().pairwise_joint(1, 2).value(0) == Rational(3, 8));
  CHECK(markov_example().pairwise_joint(2, 1).value(0) == Rational(3, 8));
  // Two steps: a_2 = 3/4*3/4 + 1/4*1/4 = 10/16 = 5/8; joint = 1/2 * 5/8.
  CHECK(markov_example().pairwise_joint(1, 3).value(0) == Rational(5, 16));
}

TEST_CASE("materialize fair coin and markov hand values") {
  auto coin = const_half().materialize(2);
  CHECK(coin.space.size() == 4);
  for (std::uint32_t w = 0; w < 4; ++w) CHECK(coin.space.weight(w) == Rational(1, 4));
  CHECK(coin.partition.block_count() == 1);
  CHECK(bcq::is_conditionally_independent(coin.space, coin.partition,
                                          {coin.events[0], coin.events[1]}));

  auto mk = markov_example().materialize(2);
  REQUIRE(mk.space.size() == 4);
  // Outcome id = step1 bit + 2 * step2 bit.
  CHECK(mk.space.weight(0) == Rational(3, 8));
  CHECK(mk.space.weight(1) == Rational(1, 8));
  CHECK(mk.space.weight(2) == Rational(1, 8));
  CHECK(mk.space.weight(3) == Rational(3, 8));

  auto two = SequenceModel::mixture_bernoulli(
      {{Rational(1, 2), ProbFormula::constant(Rational(1, 2))},
       {Rational(1, 2), ProbFormula::geometric(Rational(1, 2), Rational(1, 2))}});
  auto mat = two.materialize(3);
  CHECK(mat.space.size() == 16);
  CHECK(mat.partition.block_count() == 2);
  CHECK(mat.events.size() == 3);
}

TEST_CASE("materialize respects caps and explicit passthrough") {
  CHECK_THROWS_AS(const_half().materialize(0), InvalidInput);
  CHECK_THROWS_AS(const_half().materialize(21), ResourceLimit);
  bcq::MaterializeOptions tight;
  tight.space_cap = 4;
  CHECK_THROWS_AS(const_half().materialize(3, tight), ResourceLimit);
  auto ex = s4_explicit();
  auto mat = ex.materialize(17);  // horizon ignored for explicit models
  CHECK(mat.space.size() == 4);
  CHECK(mat.events.size() == 2);
}

TEST_CASE("mixture queries agree exactly with enumeration") {
  bcq::testing::Gen gen(0x5eed0301);
  for (int iter = 0; iter < 40; ++iter) {
    SequenceModel model = gen.flip() ? bcq::testing::random_bernoulli_mixture(gen, 3)
                                     : bcq::testing::random_markov_mixture(gen, 3);
    const long H = gen.int_in(2, 6);
    Materialized mat = model.materialize(H);
    REQUIRE(mat.partition.block_count() == model.block_count());
    for (long n = 1; n <= H; ++n) {
      BlockFunction direct = model.cond_marginal(n);
      BlockFunction enumd = bcq::conditional_probability(mat.space, mat.partition, mat.events[n - 1]);
      for (std::size_t b = 0; b < model.block_count(); ++b) {
        CAPTURE(iter);
        CAPTURE(n);
        CAPTURE(b);
        CHECK(direct.value(b) == enumd.value(b));
      }
    }
    for (long n = 1; n <= H; ++n) {
      for (long m = 0; n + m <= H; ++m) {
        BlockFunction direct = model.pattern_probability(n, m);
        BlockFunction enumd = bcq::conditional_probability(
            mat.space, mat.partition, bcq::testing::pattern_event(mat, n, m));
        for (std::size_t b = 0; b < model.block_count(); ++b) {
          CHECK(direct.value(b) == enumd.value(b));
        }
      }
    }
    for (long from = 1; from <= H; ++from) {
      for (long to = from; to <= H; ++to) {
        BlockFunction du = model.union_probability(from, to);
        BlockFunction eu = bcq::conditional_probability(
            mat.space, mat.partition, bcq::testing::union_event(mat, from, to));
        BlockFunction dr = model.run_probability(from, to);
        BlockFunction er = bcq::conditional_probability(
            mat.space, mat.partition, bcq::testing::run_event(mat, from, to));
        for (std::size_t b = 0; b < model.block_count(); ++b) {
          CHECK(du.value(b) == eu.value(b));
          CHECK(dr.value(b) == er.value(b));
        }
      }
    }
    for (long i = 1; i <= H; ++i) {
      for (long k = 1; k <= H; ++k) {
        BlockFunction dj = model.pairwise_joint(i, k);
        BlockFunction ej = bcq::conditional_probability(
            mat.space, mat.partition,
            bcq::event_intersection(mat.events[i - 1], mat.events[k - 1]));
        for (std::size_t b = 0; b < model.block_count(); ++b) {
          CHECK(dj.value(b) == ej.value(b));
        }
      }
    }
  }
}

TEST_CASE("bernoulli mixtures are conditionally independent when materialized") {
  bcq::testing::Gen gen(0x5eed0302);
  for (int iter = 0; iter < 20; ++iter) {
    SequenceModel model = bcq::testing::random_bernoulli_mixture(gen, 3);
    Materialized mat = model.materialize(5);
    CHECK(bcq::is_conditionally_independent(mat.space, mat.partition, mat.events));
  }
}

TEST_CASE("union probability is monotone and dominates marginals") {
  bcq::testing::Gen gen(0x5eed0303);
  for (int iter = 0; iter < 30; ++iter) {
    SequenceModel model = gen.flip() ? bcq::testing::random_bernoulli_mixture(gen, 3)
                                     : bcq::testing::random_markov_mixture(gen, 3);
    for (long to = 1; to <= 8; ++to) {
      BlockFunction u = model.union_probability(1, to);
      for (std::size_t b = 0; b < model.block_count(); ++b) {
        BlockFunction m = model.cond_marginal(to);
        CHECK(u.value(b) >= m.value(b));
        CHECK(u.value(b) >= model.union_probability(1, std::max<long>(1, to - 1)).value(b));
        CHECK(u.value(b) <= Rational(1));
      }
    }
  }
}

TEST_CASE("marginal scanner matches direct queries") {
  bcq::testing::Gen gen(0x5eed0304);
  for (int iter = 0; iter < 25; ++iter) {
    SequenceModel model = gen.flip() ? bcq::testing::random_bernoulli_mixture(gen, 3)
                                     : bcq::testing::random_markov_mixture(gen, 3);
    for (std::size_t b = 0; b < model.block_count(); ++b) {
      MarginalScanner scan(model, b);
      Rational sum(0);
      for (long n = 1; n <= 20; ++n) {
        REQUIRE(scan.has_next());
        scan.advance();
        Rational direct = model.cond_marginal(n).value(b);
        sum += direct;
        CHECK(scan.index() == n);
        CHECK(scan.last() == direct);
        CHECK(scan.partial_sum() == sum);
      }
    }
  }
}

TEST_CASE("marginal scanner on explicit models is bounded") {
  auto ex = s4_explicit();
  MarginalScanner scan(ex, 1);
  CHECK(scan.has_next());
  scan.advance();
  CHECK(scan.last() == Rational(1));
  scan.advance();
  CHECK(scan.last() == Rational(1, 2));
  CHECK(!scan.has_next());
  CHECK_THROWS_AS(scan.advance(), InvalidInput);
}

TEST_CASE("correlation scanner reproduces the double sum") {
  bcq::testing::Gen gen(0x5eed0305);
  for (int iter = 0; iter < 20; ++iter) {
    SequenceModel model;
    switch (gen.below(3)) {
      case 0:
        model = bcq::testing::random_bernoulli_mixture(gen, 3);
        break;
      case 1:
        model = bcq::testing::random_markov_mixture(gen, 3);
        break;
      default: {
        auto space = bcq::testing::random_space(gen, 12);
        auto f = bcq::testing::random_partition(gen, space.size());
        std::vector<Event> events;
        for (int i = 0; i < 6; ++i) events.push_back(bcq::testing::random_event(gen, space.size()));
        model = SequenceModel::explicit_model(std::move(space), std::move(f), std::move(events));
        break;
      }
    }
    for (std::size_t b = 0; b < model.block_count(); ++b) {
      if (model.block_is_null(b)) continue;
      CorrelationScanner scan(model, b);
      const long top = model.max_index() ? *model.max_index() : 12;
      for (long j = 1; j <= top; ++j) {
        scan.advance();
        Rational s_direct(0), d_direct(0);
        for (long i = 1; i <= j; ++i) {
          s_direct += model.cond_marginal(i).value(b);
          for (long k = 1; k <= j; ++k) {
            d_direct += model.pairwise_joint(i, k).value(b);
          }
        }
        CAPTURE(iter);
        CAPTURE(j);
        CHECK(scan.marginal_sum() == s_direct);
        CHECK(scan.double_sum() == d_direct);
      }
    }
  }
}

TEST_CASE("sequence model default construction is rejected at use") {
  SequenceModel model;  // default state is explicit with no storage
  CHECK_THROWS_AS(model.block_count(), InvalidInput);
}

TEST_CASE("marginal series classification follows the family parameters") {
  using bcq::SeriesNature;
  auto nature = [](SequenceModel m) { return bcq::marginal_series_nature(m, 0); };
  auto bern = [](ProbFormula f) {
    return SequenceModel::mixture_bernoulli({{Rational(1), std::move(f)}});
  };
  CHECK(nature(const_half()) == SeriesNature::kDivergent);
  CHECK(nature(geom_half()) == SeriesNature::kConvergent);
  CHECK(nature(bern(ProbFormula::constant(Rational(0)))) == SeriesNature::kConvergent);
  CHECK(nature(bern(ProbFormula::power(Rational(1), 1))) == SeriesNature::kDivergent);
  CHECK(nature(bern(ProbFormula::power(Rational(1), 2))) == SeriesNature::kConvergent);
  CHECK(nature(markov_example()) == SeriesNature::kDivergent);
  CHECK(nature(SequenceModel::mixture_markov(
            {{Rational(1), Rational(1, 2), Rational(0), Rational(1, 2)}})) ==
        SeriesNature::kConvergent);
  CHECK(nature(SequenceModel::mixture_markov(
            {{Rational(1), Rational(1, 2), Rational(0), Rational(1)}})) ==
        SeriesNature::kDivergent);
  CHECK(nature(s4_explicit()) == SeriesNature::kFiniteFamily);
}

TEST_CASE("vanishing marginals are decided analytically") {
  CHECK(bcq::marginals_vanish(const_half(), 0) == false);
  CHECK(bcq::marginals_vanish(geom_half(), 0) == true);
  CHECK(bcq::marginals_vanish(SequenceModel::mixture_bernoulli({{Rational(1), ProbFormula::power(Rational(1), 1)}}), 0) == true);
  CHECK(bcq::marginals_vanish(markov_example(), 0) == false);
  CHECK(bcq::marginals_vanish(SequenceModel::mixture_markov(
            {{Rational(1), Rational(1, 2), Rational(0), Rational(1, 2)}}),
                              0) == true);
  CHECK(bcq::marginals_vanish(SequenceModel::mixture_markov(
            {{Rational(1), Rational(1, 2), Rational(0), Rational(1)}}),
                              0) == false);
  CHECK(bcq::marginals_vanish(SequenceModel::mixture_markov(
            {{Rational(1), Rational(0), Rational(0), Rational(1)}}),
                              0) == true);
  CHECK(!bcq::marginals_vanish(s4_explicit(), 0).has_value());
}

TEST_CASE("run scanner matches the closed-form run probabilities") {
  bcq::testing::Gen gen(0x600dcafeULL);
  for (int iter = 0; iter < 30; ++iter) {
    SequenceModel model;
    switch (iter % 3) {
      case 0:
        model = bcq::testing::random_bernoulli_mixture(gen, 3);
        break;
      case 1:
        model = bcq::testing::random_markov_mixture(gen, 3);
        break;
      default: {
        auto space = bcq::testing::random_space(gen, 10);
        auto f = bcq::testing::random_partition(gen, space.size());
        std::vector<Event> events;
        for (int i = 0; i < 5; ++i) events.push_back(bcq::testing::random_event(gen, space.size()));
        model = SequenceModel::explicit_model(std::move(space), std::move(f), std::move(events));
        break;
      }
    }
    for (std::size_t b = 0; b < model.block_count(); ++b) {
      if (model.block_is_null(b)) continue;
      bcq::RunScanner run(model, b);
      const long top = model.max_index() ? *model.max_index() : 9;
      for (long n = 1; n <= top; ++n) {
        REQUIRE(run.has_next());
        run.advance();
        CAPTURE(iter);
        CAPTURE(n);
        CHECK(run.index() == n);
        CHECK(run.run() == model.run_probability(1, n).value(b));
        CHECK(run.union_prefix() == model.union_probability(1, n).value(b));
      }
      if (model.max_index()) CHECK(!run.has_next());
    }
  }
}
