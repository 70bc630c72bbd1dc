#pragma once

#include <functional>
#include <vector>

#include "bcq/rational.hpp"

namespace bcq {

// Closed interval [lo, hi] of rationals enclosing a real quantity.
// Transcendental values (logs, exponentials) only ever appear through one of
// these, with an explicit width budget, so comparisons stay sound.
class Enclosure {
 public:
  Enclosure() : lo_(0), hi_(0) {}
  Enclosure(Rational point) : lo_(point), hi_(std::move(point)) {}
  Enclosure(Rational lo, Rational hi);

  static Enclosure hull(const Enclosure& a, const Enclosure& b);

  const Rational& lower() const { return lo_; }
  const Rational& upper() const { return hi_; }
  Rational width() const { return hi_ - lo_; }
  bool is_point() const { return lo_ == hi_; }
  bool contains(const Rational& x) const { return lo_ <= x && x <= hi_; }
  bool contains_zero() const { return contains(Rational(0)); }
  bool intersects(const Enclosure& o) const { return lo_ <= o.hi_ && o.lo_ <= hi_; }
  double midpoint_double() const { return ((lo_ + hi_) / Rational(2)).to_double(); }

  Enclosure operator-() const { return Enclosure(-hi_, -lo_); }
  friend Enclosure operator+(const Enclosure& a, const Enclosure& b);
  friend Enclosure operator-(const Enclosure& a, const Enclosure& b);
  friend Enclosure operator*(const Enclosure& a, const Enclosure& b);
  // Division requires 0 outside b.
  friend Enclosure operator/(const Enclosure& a, const Enclosure& b);

  // Widens endpoints outward to denominators of at most 2^bits.
  Enclosure rounded_outward(unsigned bits) const;

 private:
  Rational lo_, hi_;
};

// Enclosure of log(x) with width <= eps; requires x > 0, eps > 0.
Enclosure log_enclosure(const Rational& x, const Rational& eps);

// Enclosure of exp(x) with width <= eps.
Enclosure exp_enclosure(const Rational& x, const Rational& eps);

// exp over an interval: monotone image, widened by at most eps at each end.
Enclosure exp_enclosure(const Enclosure& x, const Rational& eps);

// Enclosure of log(2) with width <= eps.
Enclosure ln2_enclosure(const Rational& eps);

enum class TriBool { kFalse, kTrue, kUnknown };

// Sound three-way comparison: kTrue / kFalse only when the intervals separate.
TriBool certainly_ge(const Enclosure& lhs, const Enclosure& rhs);
TriBool certainly_le(const Enclosure& lhs, const Enclosure& rhs);

// Width schedule used when a comparison comes back kUnknown: start wide,
// shrink hard, give up at the floor rather than looping forever.
class PrecisionLadder {
 public:
  PrecisionLadder(Rational start, Rational step_factor, Rational floor);
  static PrecisionLadder standard();  // 1e-9, then /1e7 steps, floor 1e-30

  const std::vector<Rational>& widths() const { return widths_; }

 private:
  std::vector<Rational> widths_;
};

struct RefinedCompare {
  TriBool outcome = TriBool::kUnknown;
  Enclosure lhs, rhs;
  Rational width_used;
};

// Rebuilds both sides at each ladder width until they separate.
RefinedCompare refine_ge(const std::function<Enclosure(const Rational&)>& lhs,
                         const std::function<Enclosure(const Rational&)>& rhs,
                         const PrecisionLadder& ladder = PrecisionLadder::standard());
RefinedCompare refine_le(const std::function<Enclosure(const Rational&)>& lhs,
                         const std::function<Enclosure(const Rational&)>& rhs,
                         const PrecisionLadder& ladder = PrecisionLadder::standard());

// Number of dyadic bits comfortably below eps; used to size outward rounding.
unsigned bits_for(const Rational& eps);

}  // namespace bcq
