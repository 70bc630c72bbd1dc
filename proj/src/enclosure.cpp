#include "bcq/enclosure.hpp"

#include <algorithm>

namespace bcq {

Enclosure::Enclosure(Rational lo, Rational hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_ > hi_) throw InvalidInput("enclosure with lo > hi");
}

Enclosure Enclosure::hull(const Enclosure& a, const Enclosure& b) {
  return Enclosure(min(a.lo_, b.lo_), max(a.hi_, b.hi_));
}

Enclosure operator+(const Enclosure& a, const Enclosure& b) {
  return Enclosure(a.lo_ + b.lo_, a.hi_ + b.hi_);
}

Enclosure operator-(const Enclosure& a, const Enclosure& b) {
  return Enclosure(a.lo_ - b.hi_, a.hi_ - b.lo_);
}

Enclosure operator*(const Enclosure& a, const Enclosure& b) {
  Rational p1 = a.lo_ * b.lo_;
  Rational p2 = a.lo_ * b.hi_;
  Rational p3 = a.hi_ * b.lo_;
  Rational p4 = a.hi_ * b.hi_;
  return Enclosure(min(min(p1, p2), min(p3, p4)), max(max(p1, p2), max(p3, p4)));
}

Enclosure operator/(const Enclosure& a, const Enclosure& b) {
  if (b.contains_zero()) throw InvalidInput("enclosure division by interval containing zero");
  return a * Enclosure(b.hi_.reciprocal(), b.lo_.reciprocal());
}

Enclosure Enclosure::rounded_outward(unsigned bits) const {
  return Enclosure(lo_.floor_dyadic(bits), hi_.ceil_dyadic(bits));
}

unsigned bits_for(const Rational& eps) {
  if (eps.sign() <= 0) throw InvalidInput("width budget must be positive");
  long f = eps.floor_log2_abs();
  long b = f >= 3 ? 8 : 3 - f;
  return static_cast<unsigned>(std::max(8L, b)) + 16;
}

namespace {

// atanh(t) = sum t^{2k+1}/(2k+1) for |t| < 1; result width <= eps.
// Tail after the a^{2k+1} term is below a^{2k+3}/((2k+3)(1-a^2)).
Enclosure atanh_series(const Rational& t, const Rational& eps) {
  int s = t.sign();
  if (s == 0) return Enclosure(Rational(0));
  Rational a = t.abs();
  if (a >= Rational(1)) throw InvalidInput("atanh argument out of range");
  Rational a2 = a * a;
  Rational one_minus = Rational(1) - a2;
  Rational sum = a;
  Rational p = a;  // a^{2k+1}
  long k = 0;
  Rational tail;
  while (true) {
    p *= a2;
    ++k;
    tail = p / (Rational(2 * k + 1) * one_minus);
    if (tail <= eps) break;
    sum += p / Rational(2 * k + 1);
  }
  Enclosure e(sum, sum + tail);
  return s < 0 ? -e : e;
}

}  // namespace

Enclosure ln2_enclosure(const Rational& eps) {
  Enclosure h = atanh_series(Rational(1, 3), eps / Rational(4));
  return (Enclosure(Rational(2)) * h).rounded_outward(bits_for(eps));
}

Enclosure log_enclosure(const Rational& x, const Rational& eps) {
  if (x.sign() <= 0) throw InvalidInput("log of a nonpositive value");
  if (eps.sign() <= 0) throw InvalidInput("width budget must be positive");
  // Reduce to z in [3/4, 3/2) so the atanh argument stays within [-1/5, 1/5].
  long e = x.floor_log2_abs();
  Rational z = x * Rational::pow2(-e);
  if (z >= Rational(3, 2)) {
    z = z / Rational(2);
    e += 1;
  }
  Rational t = (z - Rational(1)) / (z + Rational(1));
  Enclosure series = Enclosure(Rational(2)) * atanh_series(t, eps / Rational(8));
  Enclosure total = series;
  if (e != 0) {
    Rational scale(e >= 0 ? e : -e);
    Enclosure l2 = ln2_enclosure(eps / (Rational(4) * scale));
    total = total + Enclosure(Rational(e)) * l2;
  }
  return total.rounded_outward(bits_for(eps));
}

Enclosure exp_enclosure(const Rational& x, const Rational& eps) {
  if (eps.sign() <= 0) throw InvalidInput("width budget must be positive");
  if (x.is_zero()) return Enclosure(Rational(1));
  Rational a = x.abs();
  long m = 0;
  if (a > Rational(1, 2)) {
    m = a.floor_log2_abs() + 2;  // a / 2^m lands in [1/4, 1/2)
    a = a * Rational::pow2(-m);
  }
  unsigned bits = bits_for(eps) + static_cast<unsigned>(2 * m) + 16;
  long terms = 8;
  for (int attempt = 0; attempt < 30; ++attempt) {
    // Taylor sum to K-1 terms plus a geometric tail bound, all for a in (0, 1/2].
    Rational sum(1), term(1);
    for (long k = 1; k < terms; ++k) {
      term = term * a / Rational(k);
      sum += term;
    }
    Rational rem = term * a / Rational(terms) * Rational(terms + 1) / (Rational(terms + 1) - a);
    Enclosure e(sum, sum + rem);
    for (long i = 0; i < m; ++i) {
      e = (e * e).rounded_outward(bits);
    }
    if (x.sign() < 0) {
      e = Enclosure(e.upper().reciprocal(), e.lower().reciprocal());
    }
    e = e.rounded_outward(bits);
    if (e.width() <= eps) return e;
    terms *= 2;
  }
  throw Error("exp enclosure failed to reach the requested width");
}

Enclosure exp_enclosure(const Enclosure& x, const Rational& eps) {
  Rational half = eps / Rational(2);
  Enclosure lo = exp_enclosure(x.lower(), half);
  Enclosure hi = x.is_point() ? lo : exp_enclosure(x.upper(), half);
  return Enclosure(lo.lower(), hi.upper());
}

TriBool certainly_ge(const Enclosure& lhs, const Enclosure& rhs) {
  if (lhs.lower() >= rhs.upper()) return TriBool::kTrue;
  if (lhs.upper() < rhs.lower()) return TriBool::kFalse;
  return TriBool::kUnknown;
}

TriBool certainly_le(const Enclosure& lhs, const Enclosure& rhs) {
  return certainly_ge(rhs, lhs);
}

PrecisionLadder::PrecisionLadder(Rational start, Rational step_factor, Rational floor) {
  if (start.sign() <= 0 || floor.sign() <= 0 || step_factor.sign() <= 0 ||
      step_factor >= Rational(1)) {
    throw InvalidInput("precision ladder needs positive widths and a shrinking factor");
  }
  Rational w = start;
  for (int i = 0; i < 64; ++i) {
    widths_.push_back(w);
    if (w <= floor) break;
    w = max(w * step_factor, floor);
  }
}

PrecisionLadder PrecisionLadder::standard() {
  return PrecisionLadder(Rational::pow10(-9), Rational::pow10(-7), Rational::pow10(-30));
}

RefinedCompare refine_ge(const std::function<Enclosure(const Rational&)>& lhs,
                         const std::function<Enclosure(const Rational&)>& rhs,
                         const PrecisionLadder& ladder) {
  RefinedCompare out;
  for (const Rational& w : ladder.widths()) {
    out.lhs = lhs(w);
    out.rhs = rhs(w);
    out.width_used = w;
    out.outcome = certainly_ge(out.lhs, out.rhs);
    if (out.outcome != TriBool::kUnknown) return out;
  }
  return out;
}

RefinedCompare refine_le(const std::function<Enclosure(const Rational&)>& lhs,
                         const std::function<Enclosure(const Rational&)>& rhs,
                         const PrecisionLadder& ladder) {
  RefinedCompare out = refine_ge(rhs, lhs, ladder);
  std::swap(out.lhs, out.rhs);
  return out;
}

}  // namespace bcq
