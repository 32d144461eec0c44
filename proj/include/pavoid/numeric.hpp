#ifndef PAVOID_NUMERIC_HPP
#define PAVOID_NUMERIC_HPP

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pavoid {

using BigInt = mpz_class;
using Rational = mpq_class;

// Error taxonomy. The CLI maps each of these to a distinct exit code.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ScaleBudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResampleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Malformed or inconsistent input file.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 2^e as a big integer (e >= 0).
BigInt pow2(unsigned long e);

/// Smallest c with 2^c >= v, for v >= 1.
unsigned long ceil_log2(const BigInt& v);

/// log2(v) for v > 0, accurate to double precision even when v exceeds 2^1024.
double log2_big(const BigInt& v);
double log2_rational(const Rational& q);

/// Exact rational value of a finite double.
Rational exact_rational(double x);

/// Exact test of q <= 2^e for rational q > 0 and rational exponent e.
/// Integer part of e is handled exactly; the fractional power is compared in
/// 256-bit floating point, where ties are impossible for non-integral e.
bool rational_le_pow2(const Rational& q, const Rational& e);

std::string to_string(const BigInt& v);

}  // namespace pavoid

#endif
