#ifndef PAVOID_MEASURE_HPP
#define PAVOID_MEASURE_HPP

// Mass distribution on the construction tree: the root has mass 1 and each
// cube of X_k receives an equal share of its parent's mass. All masses are
// exact rationals. Siblings share a value, so a level stores one class id per
// cube and a short table of distinct masses.

#include "pavoid/builder.hpp"

#include <string>
#include <vector>

namespace pavoid {

struct MeasureLevel {
  DyadicScale scale;
  CubeSet cubes;
  std::vector<std::uint32_t> mass_class;
  std::vector<Rational> class_mass;

  const Rational& mass(std::size_t i) const { return class_mass[mass_class[i]]; }
  Rational total() const;
};

struct MeasureTree {
  int d = 1;
  std::vector<MeasureLevel> levels;
};

MeasureTree build_measure(const ConstructionTrace& trace);

/// Mass of an arbitrary dyadic cube no finer than the last level.
Rational mass_query(const MeasureTree& tree, const Cube& c);

/// Exact conservation audit: each level sums to 1 and every parent's mass
/// equals the sum over its children. Returns an empty string when clean.
std::string check_conservation(const MeasureTree& tree);

struct ScaleRow {
  int exponent = 0;
  std::string case_label;  // see label_case
  Rational max_mass;
  double log2_ratio = 0.0;  // log2(max mass / l^(beta - eps))
  double ratio() const;
};

struct LevelAudit {
  int level = 0;
  Rational eta;
  Rational max_mass;
  Rational share_bound;  // 2 (r_k / l_{k-1})^d
  bool share_ok = false;
  double level_ratio = 0.0;   // max mu(J) / l_k^(beta - eta_k)
  double r_cell_ratio = 0.0;  // max mu(I') / ((r_k/l_{k-1})^d l_{k-1}^(beta - eta_{k-1})) over r_k-cubes
};

struct FrostmanReport {
  double beta = 0.0;
  double eps = 0.0;
  std::vector<ScaleRow> rows;
  std::vector<LevelAudit> levels;
  double constant = 0.0;         // largest scanned ratio
  double fitted_exponent = 0.0;  // slope of -log2(max mass) against the exponent

  std::string to_csv() const;
};

/// beta = (dn - alpha)/(n-1) for the main route; d for a trivial trace.
double target_exponent(const ConstructionTrace& trace);
Rational eta_at(const ConstructionTrace& trace, std::size_t level_index);

/// "case1" when r_{k+1} < l <= l_k, "case2" when l_{k+1} < l <= r_{k+1};
/// the finest level's own scale counts as case1.
std::string label_case(const ConstructionTrace& trace, int exponent);

FrostmanReport frostman_scan(const MeasureTree& tree, const ConstructionTrace& trace, double eps);

}  // namespace pavoid

#endif
