#ifndef PAVOID_BUILDER_HPP
#define PAVOID_BUILDER_HPP

// Multiscale construction: nested sets X_1 ⊃ X_2 ⊃ ... of dyadic cubes, each
// obtained from the previous one by a single-scale avoidance step against the
// scheduled pattern component joined with the axis slice H.

#include "pavoid/avoider.hpp"
#include "pavoid/oracle.hpp"

#include <string>
#include <vector>

namespace pavoid {

/// eps_k = factor * (dn - alpha) / 2^(k + shift).
struct EpsilonRule {
  Rational factor = 1;
  int shift = 1;
};

struct BuildConfig {
  int d = 1;
  int n = 2;
  double alpha = 1.0;
  PatternFamily family;
  int levels = 2;
  EpsilonRule epsilon;
  int max_scale_exponent = 60;
  int min_scale_exponent = 0;
  // Constant allowed in front of the covering bound when choosing scales.
  Rational count_slack = 2;
  int trivial_scale_exponent = 8;
  int max_attempts = 64;
  Budget budget;
  std::uint64_t seed = 0;

  void validate() const;
  bool trivial() const;
};

struct ScheduleEntry {
  int level = 0;
  int pattern_index = 0;
  Rational epsilon;
  DyadicScale l;
  DyadicScale r;
  BigInt pattern_count;  // cubes of Z_k at scale l
};

struct LevelCertificate {
  bool scales_ordered = false;  // l_k <= r_k <= l_{k-1}
  bool r_bound = false;         // r_k <= r_bound_constant * l_k^((dn-alpha-eps)/(d(n-1)))
  bool large_size = false;
  bool non_concentration = false;
  bool avoidance = false;
  bool nested = false;
  std::size_t min_per_parent = 0;
  std::size_t worst_cell_count = 0;
  std::size_t conflicts = 0;
  int attempts = 0;
  std::uint64_t draw_seed = 0;

  bool all() const { return scales_ordered && r_bound && large_size && non_concentration && avoidance && nested; }
};

struct LevelRecord {
  ScheduleEntry entry;
  CubeSet X;
  LevelCertificate cert;
};

struct ConstructionTrace {
  int d = 1;
  int n = 2;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  bool trivial = false;
  int requested_levels = 0;
  std::vector<LevelRecord> levels;
  // Empty when every requested level was built; otherwise why the build stopped.
  std::string stop_reason;
  int stop_code = 0;

  bool complete() const { return stop_code == 0 && static_cast<int>(levels.size()) == requested_levels; }
  bool certified() const;
  DyadicScale scale_before(std::size_t i) const { return i == 0 ? DyadicScale(0) : levels[i - 1].entry.l; }
};

inline constexpr int kRBoundConstant = 4;

/// Component indices (0-based) in diagonal order 0; 0,1; 0,1,2; ... capped at count.
std::vector<int> strong_cover_schedule(int num_components, int length);

Rational epsilon_at(const BuildConfig& cfg, int k);

struct ScaleChoice {
  DyadicScale l;
  BigInt count;
};

/// Largest dyadic l finer than l_prev meeting the covering, growth and
/// separation inequalities together with the count hypothesis. Throws
/// ScaleBudgetError when nothing up to the cap qualifies.
ScaleChoice select_scale(int level, const PatternOracle& z, DyadicScale l_prev, const Rational& eps,
                         const BuildConfig& cfg);

/// Certificate check r_k <= 4 l_k^((dn-alpha-eps)/(d(n-1))), exact.
bool r_bound_holds(int d, int n, double alpha, const Rational& eps, DyadicScale l, DyadicScale r);

/// Pattern used at a level: the component joined with H. Index -1 (the
/// trivial route) means the union of all components without H.
OraclePtr level_pattern(const BuildConfig& cfg, int pattern_index);

ConstructionTrace build(const BuildConfig& cfg);

struct StrongAvoidanceReport {
  struct Level {
    int level = 0;
    bool clean = false;
    std::vector<Index> offending;
  };
  std::vector<Level> levels;
  std::size_t sampled = 0;
  std::size_t unresolved = 0;  // tuples no built level separates for some component
  std::size_t violations = 0;
  std::vector<Index> first_violation;

  bool clean() const;
};

/// Re-derives each level's pattern and looks for strongly non-diagonal
/// conflicts through the generic descent (not the structured overrides), then
/// samples distinct tuples of final cubes against every component.
StrongAvoidanceReport verify_strong_avoidance(const ConstructionTrace& trace, const BuildConfig& cfg,
                                              std::size_t samples = 100000);

}  // namespace pavoid

#endif
