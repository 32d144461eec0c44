#ifndef PAVOID_ANALYSIS_HPP
#define PAVOID_ANALYSIS_HPP

// Post-build analysis: box counts and slope fits, trace verification with
// two independent conflict searches, and plot exports.

#include "pavoid/builder.hpp"
#include "pavoid/fit.hpp"
#include "pavoid/measure.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace pavoid {

/// Number of distinct cubes at exponent j (<= the set's own) meeting s.
std::size_t box_count(const CubeSet& s, int j);

struct CountRow {
  int level = 0;     // 0 for the unit cube
  std::string kind;  // "root", "r" or "l"
  int exponent = 0;
  std::size_t count = 0;
};

struct DimensionReport {
  std::vector<CountRow> rows;
  double target = 0.0;
  std::optional<LineFit> fit;  // log2 count against exponent
  std::string refusal;         // why no slope was fitted

  std::string to_csv() const;
  nlohmann::json summary() const;
};

/// Counts at the unit scale, each r_k and each l_k; a slope needs three
/// distinct exponents.
DimensionReport dimension_report(const ConstructionTrace& trace);

/// log2 N = a x + b log2 x + c over x = log2(1/delta).
struct CoveringFit {
  std::vector<int> exponents;
  std::vector<double> log2_counts;
  double leading = 0.0;
  double log_term = 0.0;
  double intercept = 0.0;
  double plain_slope = 0.0;  // without the log regressor
};
CoveringFit covering_fit(const std::vector<int>& exponents, const std::vector<BigInt>& counts);

/// Ordered n-tuples of pairwise distinct cubes of f whose concatenation z
/// contains at f's scale. Counting stops after `stop_after` hits.
std::size_t enumerate_tuple_conflicts(const CubeSet& f, int n, const PatternOracle& z, std::size_t stop_after,
                                      std::vector<Index>* first = nullptr);

struct LevelVerdict {
  int level = 0;
  bool recorded_ok = false;     // certificate as stored in the trace
  bool recomputed_ok = false;   // properties re-derived from the sets
  std::string mismatch;         // first disagreement, empty when none
  bool count_matches = false;   // recount of the pattern equals the stored count
  bool scan_clean = false;      // generic descent
  bool scan_truncated = false;
  std::size_t scan_found = 0;
  bool enumerated = false;      // tuple enumeration ran (#X <= limit)
  std::size_t tuple_hits = 0;
  bool paths_agree = true;
  std::vector<std::vector<Index>> offending;
};

struct VerifyReport {
  std::vector<LevelVerdict> levels;
  StrongAvoidanceReport strong;
  bool clean() const;
  nlohmann::json to_json() const;
};

/// Re-checks a trace against its patterns. `exhaustive_limit` caps the level
/// size for tuple enumeration; `samples` is passed to the cross-level check.
VerifyReport verify_trace(const ConstructionTrace& trace, const BuildConfig& cfg, std::size_t exhaustive_limit,
                          std::size_t samples = 100000);

/// Plot series: box counts, max mass and the Frostman ratio per scanned scale.
struct PlotBundle {
  std::string counts_csv;
  std::string mass_csv;
  std::string frostman_csv;
  std::size_t rows = 0;
};
PlotBundle export_plot(const ConstructionTrace& trace, const MeasureTree& tree, double eps);

}  // namespace pavoid

#endif
