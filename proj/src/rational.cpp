#include "bcq/rational.hpp"

#include <cctype>

namespace bcq {
namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Rational::Rational(long num, long den) {
  if (den == 0) throw InvalidInput("rational with zero denominator");
  q_ = mpq_class(num, den);
  q_.canonicalize();
}

std::optional<Rational> Rational::try_parse(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  std::string_view num = body;
  std::string_view den = "1";
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    num = body.substr(0, slash);
    den = body.substr(slash + 1);
  }
  if (!all_digits(num) || !all_digits(den)) return std::nullopt;
  mpq_class q(std::string(num) + "/" + std::string(den));
  if (mpz_sgn(q.get_den().get_mpz_t()) == 0) return std::nullopt;
  q.canonicalize();
  if (negative) q = -q;
  return Rational(std::move(q));
}

Rational Rational::parse(std::string_view text) {
  auto r = try_parse(text);
  if (!r) throw InvalidInput("malformed rational '" + std::string(text) + "' (expected p or p/q)");
  return *r;
}

Rational Rational::pow2(long e) {
  mpq_class q;
  if (e >= 0) {
    mpz_mul_2exp(q.get_num().get_mpz_t(), mpz_class(1).get_mpz_t(), static_cast<mp_bitcnt_t>(e));
  } else {
    q = 1;
    mpz_mul_2exp(q.get_den().get_mpz_t(), mpz_class(1).get_mpz_t(), static_cast<mp_bitcnt_t>(-e));
  }
  q.canonicalize();
  return Rational(std::move(q));
}

Rational Rational::pow10(long e) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(e >= 0 ? e : -e));
  mpq_class q;
  if (e >= 0) {
    q = p;
  } else {
    q = 1;
    q /= mpq_class(p);
  }
  q.canonicalize();
  return Rational(std::move(q));
}

Rational Rational::abs() const {
  return sign() < 0 ? -*this : *this;
}

Rational Rational::reciprocal() const {
  if (is_zero()) throw InvalidInput("reciprocal of zero");
  mpq_class q;
  mpq_inv(q.get_mpq_t(), q_.get_mpq_t());
  return Rational(std::move(q));
}

Rational Rational::pow(long e) const {
  if (e == 0) return Rational(1);
  Rational base = e < 0 ? reciprocal() : *this;
  unsigned long k = static_cast<unsigned long>(e < 0 ? -e : e);
  mpq_class q;
  mpz_pow_ui(q.get_num().get_mpz_t(), base.q_.get_num().get_mpz_t(), k);
  mpz_pow_ui(q.get_den().get_mpz_t(), base.q_.get_den().get_mpz_t(), k);
  // num/den already coprime, so integer powers stay coprime
  return Rational(std::move(q));
}

long Rational::floor_log2_abs() const {
  if (is_zero()) throw InvalidInput("floor_log2 of zero");
  const mpz_class num = ::abs(q_.get_num());
  const mpz_class& den = q_.get_den();
  long nb = static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 2));
  long db = static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2));
  long e = nb - db;  // |x| in [2^{e-1}, 2^{e+1})
  mpz_class shifted;
  if (e >= 0) {
    mpz_mul_2exp(shifted.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(e));
    if (mpz_cmp(num.get_mpz_t(), shifted.get_mpz_t()) < 0) --e;
  } else {
    mpz_mul_2exp(shifted.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(-e));
    if (mpz_cmp(shifted.get_mpz_t(), den.get_mpz_t()) < 0) --e;
  }
  return e;
}

Rational Rational::floor_dyadic(unsigned bits) const {
  mpz_class scaled;
  mpz_mul_2exp(scaled.get_mpz_t(), q_.get_num().get_mpz_t(), bits);
  mpz_class k;
  mpz_fdiv_q(k.get_mpz_t(), scaled.get_mpz_t(), q_.get_den().get_mpz_t());
  mpq_class out(k);
  mpq_div_2exp(out.get_mpq_t(), out.get_mpq_t(), bits);
  return Rational(std::move(out));
}

Rational Rational::ceil_dyadic(unsigned bits) const {
  return -((-*this).floor_dyadic(bits));
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.is_zero()) throw InvalidInput("division by zero rational");
  return Rational(mpq_class(a.q_ / b.q_));
}

}  // namespace bcq
