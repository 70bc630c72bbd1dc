#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "bcq/error.hpp"

namespace bcq {

// Arbitrary-precision rational, always held in canonical reduced form.
// Every probability, weight, bound and margin in this project is a Rational;
// floating point never participates in a verdict.
class Rational {
 public:
  Rational() : q_(0) {}
  Rational(int n) : q_(n) {}
  Rational(long n) : q_(n) {}
  Rational(unsigned long n) : q_(n) {}
  Rational(long num, long den);
  explicit Rational(mpq_class v) : q_(std::move(v)) { q_.canonicalize(); }

  // Accepts "p", "-p", "p/q" with decimal digits only; q > 0 after parsing.
  static Rational parse(std::string_view text);
  static std::optional<Rational> try_parse(std::string_view text);

  static Rational pow2(long e);   // 2^e
  static Rational pow10(long e);  // 10^e

  int sign() const { return mpq_sgn(q_.get_mpq_t()); }
  bool is_zero() const { return sign() == 0; }
  bool is_one() const { return mpq_cmp_si(q_.get_mpq_t(), 1, 1) == 0; }

  Rational abs() const;
  Rational reciprocal() const;  // throws InvalidInput on zero
  Rational pow(long e) const;   // e < 0 requires a nonzero value

  // Largest e with 2^e <= |x|; requires x != 0.
  long floor_log2_abs() const;

  // Outward dyadic rounding: floor/ceil of x * 2^bits, scaled back.
  // Used to keep interval endpoints small without losing soundness.
  Rational floor_dyadic(unsigned bits) const;
  Rational ceil_dyadic(unsigned bits) const;

  std::string str() const { return q_.get_str(); }
  double to_double() const { return q_.get_d(); }

  const mpq_class& raw() const { return q_; }

  friend Rational operator+(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ + b.q_)); }
  friend Rational operator-(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ - b.q_)); }
  friend Rational operator*(const Rational& a, const Rational& b) { return Rational(mpq_class(a.q_ * b.q_)); }
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const { return Rational(mpq_class(-q_)); }

  Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
  Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
  Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
  Rational& operator/=(const Rational& o) { *this = *this / o; return *this; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return mpq_equal(a.q_.get_mpq_t(), b.q_.get_mpq_t()) != 0;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    int c = mpq_cmp(a.q_.get_mpq_t(), b.q_.get_mpq_t());
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  mpq_class q_;
};

inline Rational min(const Rational& a, const Rational& b) { return a <= b ? a : b; }
inline Rational max(const Rational& a, const Rational& b) { return a >= b ? a : b; }

}  // namespace bcq
