#ifndef PAVOID_DEMOS_HPP
#define PAVOID_DEMOS_HPP

// The two application demos: a set whose sumset misses a given small set Y,
// and a set on a curve with no isosceles triangles. Each ends with a
// final-scale check that does not reuse the builder or the pattern oracles.

#include "pavoid/analysis.hpp"
#include "pavoid/curves.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace pavoid {

// ---------------------------------------------------------------- sumset

/// Build config for X with X + X avoiding Y: n = 2, alpha = d + dim Y, one
/// component built on Y's cover grown by one cell.
BuildConfig sumset_config(BuildConfig base, OraclePtr y);

struct BranchTally {
  std::uint64_t pairs = 0;
  std::uint64_t hits = 0;
};

struct SumsetCheck {
  int exponent = 0;
  std::size_t cubes = 0;
  std::size_t cover_cells = 0;     // Y's cover at the final scale, before inflation
  std::size_t inflated_cells = 0;
  BranchTally distinct;            // ordered pairs I != J
  BranchTally diagonal;            // I = J
  bool clean() const { return distinct.hits == 0 && diagonal.hits == 0; }
};

/// For all ordered pairs of cubes of x (including I = J), whether the sum box
/// I + J meets Y's cover at x's scale grown by one cell.
SumsetCheck check_sumset(const CubeSet& x, const PatternOracle& y);

struct SumsetDemo {
  ConstructionTrace trace;
  double y_dimension = 0.0;
  SumsetCheck check;
  bool clean() const { return trace.certified() && check.clean(); }
  nlohmann::json to_json() const;
};

SumsetDemo run_sumset_demo(const BuildConfig& base, OraclePtr y);

// ---------------------------------------------------------------- isosceles

/// Build config for X on the graph of a curve with no isosceles triangles:
/// d = 1, n = 3, alpha = 2. n = 2 is refused.
BuildConfig isosceles_config(BuildConfig base, const CurvePtr& g);

struct TripleCheck {
  std::uint64_t triples = 0;     // unordered triples of distinct cubes
  std::uint64_t violations = 0;  // triples where an isosceles triangle may sit
  std::uint64_t unresolved = 0;  // non-linear curves: subdivision did not decide
  std::string method;            // "exact-linear" or "interval-subdivision"
};

/// Distinct-triple check on final cubes of x (parameters of f = rescaled g).
TripleCheck check_isosceles(const CubeSet& x, const CurvePtr& g);

struct CoveringScan {
  std::vector<int> exponents;
  std::vector<BigInt> counts;
  bool partial = false;  // budget ran out before the finest scale
  std::string note;
};
CoveringScan isosceles_covering_scan(const PatternOracle& z, int k_lo, int k_hi, const Budget& budget);

struct IsoscelesDemo {
  std::string curve;
  double m = 0.0;
  CoveringScan scan;
  std::optional<CoveringFit> fit;
  double log_constant = 0.0;  // max count / (k 4^k) over the scan
  ConstructionTrace trace;
  TripleCheck check;
  double target = 0.5;
  bool fit_ok() const;
  bool clean() const { return trace.certified() && check.violations == 0 && check.unresolved == 0; }
  nlohmann::json to_json() const;
  /// X in the parameter of f and in the original parameter t / (10 M).
  nlohmann::json parametrizations() const;
};

inline constexpr double kCoveringExponentCap = 2.2;

IsoscelesDemo run_isosceles_demo(const BuildConfig& base, const std::string& curve, double m, int scan_lo = 4,
                                 int scan_hi = 9);

}  // namespace pavoid

#endif
