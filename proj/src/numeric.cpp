#include "pavoid/numeric.hpp"

#include <mpfr.h>

#include <cmath>

namespace pavoid {

BigInt pow2(unsigned long e) {
  BigInt r;
  mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
  return r;
}

unsigned long ceil_log2(const BigInt& v) {
  if (v < 1) throw PreconditionError("ceil_log2: argument must be >= 1");
  if (v == 1) return 0;
  BigInt m = v - 1;
  return static_cast<unsigned long>(mpz_sizeinbase(m.get_mpz_t(), 2));
}

double log2_big(const BigInt& v) {
  if (v <= 0) throw PreconditionError("log2_big: argument must be positive");
  long exp = 0;
  double mant = mpz_get_d_2exp(&exp, v.get_mpz_t());
  return std::log2(mant) + static_cast<double>(exp);
}

double log2_rational(const Rational& q) {
  return log2_big(q.get_num()) - log2_big(q.get_den());
}

Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw PreconditionError("exact_rational: non-finite value");
  Rational r(x);  // mpq_set_d is exact
  r.canonicalize();
  return r;
}

bool rational_le_pow2(const Rational& q, const Rational& e) {
  if (q <= 0) return true;
  // e = whole + frac with 0 <= frac < 1.
  BigInt whole;
  mpz_fdiv_q(whole.get_mpz_t(), e.get_num_mpz_t(), e.get_den_mpz_t());
  Rational frac = e - Rational(whole);
  Rational scaled = q;
  if (whole >= 0) {
    scaled /= Rational(pow2(whole.get_ui()));
  } else {
    BigInt neg = -whole;
    scaled *= Rational(pow2(neg.get_ui()));
  }
  // compare scaled <= 2^frac
  if (frac == 0) return scaled <= 1;
  if (scaled <= 1) return true;
  if (scaled >= 2) return false;
  mpfr_t a, b;
  mpfr_inits2(256, a, b, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_q(a, scaled.get_mpq_t(), MPFR_RNDN);
  mpfr_log2(a, a, MPFR_RNDN);
  mpfr_set_q(b, frac.get_mpq_t(), MPFR_RNDN);
  bool le = mpfr_lessequal_p(a, b) != 0;
  mpfr_clears(a, b, static_cast<mpfr_ptr>(nullptr));
  return le;
}

std::string to_string(const BigInt& v) { return v.get_str(); }

}  // namespace pavoid
