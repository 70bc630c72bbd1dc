#include "bcq/enclosure.hpp"

#include <string>

#include "doctest.h"
#include "test_support.hpp"

using bcq::Enclosure;
using bcq::InvalidInput;
using bcq::PrecisionLadder;
using bcq::Rational;
using bcq::TriBool;

namespace {

Rational dec(const char* digits, long exp10) {
  return Rational::parse(digits) * Rational::pow10(exp10);
}

// Decimal brackets around reference constants, each of width one unit in the
// last quoted digit. The enclosure under test must overlap its bracket.
void check_against(const Enclosure& e, const Rational& lo, const Rational& hi, const Rational& eps) {
  CHECK(e.width() <= eps);
  CHECK(e.lower() <= hi);
  CHECK(e.upper() >= lo);
}

}  // namespace

TEST_CASE("enclosure basics") {
  Enclosure p(Rational(1, 2));
  CHECK(p.is_point());
  CHECK(p.width() == Rational(0));
  CHECK_THROWS_AS(Enclosure(Rational(1), Rational(0)), InvalidInput);
  Enclosure e(Rational(1, 4), Rational(1, 2));
  CHECK(e.contains(Rational(1, 3)));
  CHECK(!e.contains(Rational(2, 3)));
  CHECK(Enclosure::hull(p, e).upper() == Rational(1, 2));
  CHECK(Enclosure::hull(Enclosure(Rational(0)), e).lower() == Rational(0));
}

TEST_CASE("interval arithmetic contains pointwise results") {
  bcq::testing::Gen gen(0x5eed0101);
  for (int i = 0; i < 300; ++i) {
    Rational a = gen.rational(50, 20), b = gen.rational(50, 20);
    Rational c = gen.rational(50, 20), d = gen.rational(50, 20);
    Enclosure A(bcq::min(a, b), bcq::max(a, b));
    Enclosure B(bcq::min(c, d), bcq::max(c, d));
    // Sample members of each interval, including endpoints.
    for (const Rational& x : {A.lower(), A.upper(), (A.lower() + A.upper()) / Rational(2)}) {
      for (const Rational& y : {B.lower(), B.upper(), (B.lower() + B.upper()) / Rational(2)}) {
        CHECK((A + B).contains(x + y));
        CHECK((A - B).contains(x - y));
        CHECK((A * B).contains(x * y));
        if (!B.contains_zero()) CHECK((A / B).contains(x / y));
      }
    }
    if (B.contains_zero()) CHECK_THROWS_AS(A / B, InvalidInput);
  }
}

TEST_CASE("outward rounding widens and simplifies") {
  bcq::testing::Gen gen(0x5eed0102);
  for (int i = 0; i < 200; ++i) {
    Rational a = gen.rational(1000, 997), b = gen.rational(1000, 997);
    Enclosure e(bcq::min(a, b), bcq::max(a, b));
    Enclosure r = e.rounded_outward(24);
    CHECK(r.lower() <= e.lower());
    CHECK(r.upper() >= e.upper());
    CHECK(r.width() <= e.width() + Rational::pow2(-23));
  }
}

TEST_CASE("log enclosure hits reference constants") {
  Rational eps = Rational::pow10(-12);
  check_against(bcq::log_enclosure(Rational(2), eps),
                dec("693147180559945309", -18), dec("693147180559945310", -18), eps);
  check_against(bcq::log_enclosure(Rational(3), eps),
                dec("1098612288668109691", -18), dec("1098612288668109692", -18), eps);
  check_against(bcq::log_enclosure(Rational(10), eps),
                dec("2302585092994045684", -18), dec("2302585092994045685", -18), eps);
  check_against(bcq::log_enclosure(Rational(1, 2), eps),
                dec("-693147180559945310", -18), dec("-693147180559945309", -18), eps);
  check_against(bcq::log_enclosure(Rational(3, 4), eps),
                dec("-287682072451780928", -18), dec("-287682072451780927", -18), eps);
  check_against(bcq::log_enclosure(Rational(1024), eps),
                dec("6931471805599453094", -18), dec("6931471805599453095", -18), eps);
  CHECK(bcq::log_enclosure(Rational(1), eps).is_point());
  CHECK(bcq::log_enclosure(Rational(1), eps).contains_zero());
  CHECK_THROWS_AS(bcq::log_enclosure(Rational(0), eps), InvalidInput);
  CHECK_THROWS_AS(bcq::log_enclosure(Rational(-3), eps), InvalidInput);
}

TEST_CASE("exp enclosure hits reference constants") {
  Rational eps = Rational::pow10(-12);
  check_against(bcq::exp_enclosure(Rational(1), eps),
                dec("2718281828459045235", -18), dec("2718281828459045236", -18), eps);
  check_against(bcq::exp_enclosure(Rational(-1), eps),
                dec("367879441171442321", -18), dec("367879441171442322", -18), eps);
  check_against(bcq::exp_enclosure(Rational(1, 2), eps),
                dec("1648721270700128146", -18), dec("1648721270700128147", -18), eps);
  check_against(bcq::exp_enclosure(Rational(10), eps),
                dec("220264657948067165", -13), dec("220264657948067166", -13), eps);
  check_against(bcq::exp_enclosure(Rational(-20), eps),
                dec("20611536224385578", -25), dec("20611536224385579", -25), eps);
  CHECK(bcq::exp_enclosure(Rational(0), eps).is_point());
  CHECK(bcq::exp_enclosure(Rational(0), eps).contains(Rational(1)));
}

TEST_CASE("ln2 enclosure obeys its width budget") {
  for (long k : {-6L, -12L, -20L, -30L}) {
    Rational eps = Rational::pow10(k);
    Enclosure e = bcq::ln2_enclosure(eps);
    CHECK(e.width() <= eps);
    CHECK(e.lower() <= dec("693147180559945310", -18));
    CHECK(e.upper() >= dec("693147180559945309", -18));
  }
}

TEST_CASE("exp inverts log on random positive rationals") {
  bcq::testing::Gen gen(0x5eed0103);
  Rational eps = Rational::pow10(-15);
  for (int i = 0; i < 60; ++i) {
    Rational x = gen.rational(5000, 400, false) + Rational(1, 400);
    Enclosure lg = bcq::log_enclosure(x, eps);
    Enclosure back = bcq::exp_enclosure(lg, eps);
    CAPTURE(x.str());
    CHECK(back.lower() <= x);
    CHECK(back.upper() >= x);
  }
}

TEST_CASE("log turns products into sums") {
  bcq::testing::Gen gen(0x5eed0104);
  Rational eps = Rational::pow10(-20);
  for (int i = 0; i < 60; ++i) {
    Rational a = gen.probability_open(300);
    Rational b = gen.probability_open(300);
    Enclosure lhs = bcq::log_enclosure(a * b, eps);
    Enclosure rhs = bcq::log_enclosure(a, eps) + bcq::log_enclosure(b, eps);
    CHECK(lhs.intersects(rhs));
  }
}

TEST_CASE("width budgets are respected down the ladder") {
  for (long k : {-9L, -16L, -23L, -30L}) {
    Rational eps = Rational::pow10(k);
    CHECK(bcq::log_enclosure(Rational(7, 5), eps).width() <= eps);
    CHECK(bcq::log_enclosure(Rational(123456, 7), eps).width() <= eps);
    CHECK(bcq::exp_enclosure(Rational(-7, 3), eps).width() <= eps);
    CHECK(bcq::exp_enclosure(Rational(41, 7), eps).width() <= eps);
  }
}

TEST_CASE("three way comparison separates only on disjoint intervals") {
  Enclosure a(Rational(1, 2), Rational(3, 4));
  Enclosure b(Rational(1, 4), Rational(2, 5));
  CHECK(bcq::certainly_ge(a, b) == TriBool::kTrue);
  CHECK(bcq::certainly_ge(b, a) == TriBool::kFalse);
  CHECK(bcq::certainly_le(b, a) == TriBool::kTrue);
  Enclosure c(Rational(3, 5), Rational(9, 10));
  CHECK(bcq::certainly_ge(a, c) == TriBool::kUnknown);
  // Touching endpoints count as >=.
  Enclosure d(Rational(1, 4), Rational(1, 2));
  CHECK(bcq::certainly_ge(a, d) == TriBool::kTrue);
}

TEST_CASE("standard ladder descends to the floor") {
  auto widths = PrecisionLadder::standard().widths();
  REQUIRE(widths.size() == 4);
  CHECK(widths[0] == Rational::pow10(-9));
  CHECK(widths[1] == Rational::pow10(-16));
  CHECK(widths[2] == Rational::pow10(-23));
  CHECK(widths[3] == Rational::pow10(-30));
}

TEST_CASE("refinement resolves once the gap exceeds the width") {
  Rational gap = Rational::pow10(-12);
  auto lhs = [&](const Rational& w) {
    return Enclosure(Rational(1) + gap - w / Rational(2), Rational(1) + gap + w / Rational(2));
  };
  auto rhs = [&](const Rational& w) {
    return Enclosure(Rational(1) - w / Rational(2), Rational(1) + w / Rational(2));
  };
  auto res = bcq::refine_ge(lhs, rhs);
  CHECK(res.outcome == TriBool::kTrue);
  CHECK(res.width_used == Rational::pow10(-16));

  auto res_le = bcq::refine_le(rhs, lhs);
  CHECK(res_le.outcome == TriBool::kTrue);

  // A dead-equal pair never separates and exhausts the ladder.
  auto same = [&](const Rational& w) {
    return Enclosure(Rational(1) - w / Rational(2), Rational(1) + w / Rational(2));
  };
  auto stuck = bcq::refine_ge(same, same);
  CHECK(stuck.outcome == TriBool::kUnknown);
  CHECK(stuck.width_used == Rational::pow10(-30));
}
