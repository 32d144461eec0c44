#include "pavoid/analysis.hpp"

#include "pavoid/avoider.hpp"
#include "pavoid/serialize.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace pavoid {

using nlohmann::json;

std::size_t box_count(const CubeSet& s, int j) {
  const int k = s.scale().exponent();
  if (j > k || j < 0) throw PreconditionError("box_count: exponent must lie between 0 and the set's own");
  const int shift = k - j;
  if (s.empty()) return 0;
  if (s.dim() == 1) {
    // sorted rows stay sorted under the shift
    std::size_t n = 1;
    for (std::size_t i = 1; i < s.size(); ++i) n += (s[i][0] >> shift) != (s[i - 1][0] >> shift);
    return n;
  }
  std::vector<Index> flat(s.flat());
  for (auto& v : flat) v >>= shift;
  return CubeSet::from_unsorted(s.dim(), DyadicScale(j), std::move(flat)).size();
}

std::string DimensionReport::to_csv() const {
  std::ostringstream out;
  out << "level,kind,scale_exponent,count\n";
  for (const auto& r : rows) out << r.level << ',' << r.kind << ',' << r.exponent << ',' << r.count << '\n';
  return out.str();
}

json DimensionReport::summary() const {
  json j;
  j["target"] = target;
  if (fit) {
    j["slope"] = fit->slope;
    j["intercept"] = fit->intercept;
    j["rms_residual"] = fit->rms_residual;
    j["deviation"] = std::abs(fit->slope - target);
  } else {
    j["slope"] = nullptr;
    j["refusal"] = refusal;
  }
  json rs = json::array();
  for (const auto& r : rows)
    rs.push_back({{"level", r.level}, {"kind", r.kind}, {"exponent", r.exponent}, {"count", r.count}});
  j["rows"] = rs;
  return j;
}

DimensionReport dimension_report(const ConstructionTrace& trace) {
  if (trace.levels.empty()) throw PreconditionError("dimension_report: trace has no levels");
  DimensionReport rep;
  rep.target = target_exponent(trace);
  rep.rows.push_back({0, "root", 0, 1});
  for (const auto& lvl : trace.levels) {
    const int re = lvl.entry.r.exponent(), le = lvl.entry.l.exponent();
    if (re != le) rep.rows.push_back({lvl.entry.level, "r", re, box_count(lvl.X, re)});
    rep.rows.push_back({lvl.entry.level, "l", le, lvl.X.size()});
  }
  std::vector<double> x, y;
  std::set<int> seen;
  for (const auto& r : rep.rows) {
    if (r.count == 0) continue;
    if (!seen.insert(r.exponent).second) continue;  // r_1 = 1 repeats the root
    x.push_back(r.exponent);
    y.push_back(std::log2(static_cast<double>(r.count)));
  }
  if (x.size() < 3)
    rep.refusal = "only " + std::to_string(x.size()) + " distinct scales; a slope needs at least 3";
  else
    rep.fit = fit_line(x, y);
  return rep;
}

CoveringFit covering_fit(const std::vector<int>& exponents, const std::vector<BigInt>& counts) {
  if (exponents.size() != counts.size() || exponents.size() < 4)
    throw PreconditionError("covering_fit: need at least four (scale, count) pairs");
  CoveringFit f;
  f.exponents = exponents;
  std::vector<std::vector<double>> rows;
  std::vector<double> xs;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (exponents[i] < 2 || counts[i] <= 0) throw PreconditionError("covering_fit: need exponents >= 2 and positive counts");
    const double x = exponents[i];
    f.log2_counts.push_back(log2_big(counts[i]));
    rows.push_back({x, std::log2(x), 1.0});
    xs.push_back(x);
  }
  auto c = least_squares(rows, f.log2_counts);
  f.leading = c[0];
  f.log_term = c[1];
  f.intercept = c[2];
  f.plain_slope = fit_line(xs, f.log2_counts).slope;
  return f;
}

std::size_t enumerate_tuple_conflicts(const CubeSet& f, int n, const PatternOracle& z, std::size_t stop_after,
                                      std::vector<Index>* first) {
  const std::size_t m = f.size();
  const std::size_t d = static_cast<std::size_t>(f.dim());
  if (z.ambient_dim() != f.dim() * n) throw PreconditionError("enumerate_tuple_conflicts: dimension mismatch");
  if (m < static_cast<std::size_t>(n)) return 0;
  const int k = f.scale().exponent();
  std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
  std::vector<Index> t(d * static_cast<std::size_t>(n));
  std::size_t hits = 0;
  for (;;) {
    bool distinct = true;
    for (int a = 0; a < n && distinct; ++a)
      for (int b = 0; b < a && distinct; ++b) distinct = pick[static_cast<std::size_t>(a)] != pick[static_cast<std::size_t>(b)];
    if (distinct) {
      for (int a = 0; a < n; ++a) {
        auto row = f[pick[static_cast<std::size_t>(a)]];
        std::copy(row.begin(), row.end(), t.begin() + static_cast<std::ptrdiff_t>(a * d));
      }
      if (z.contains(t, k)) {
        if (hits == 0 && first) *first = t;
        if (++hits >= stop_after) return hits;
      }
    }
    int j = n - 1;
    while (j >= 0 && ++pick[static_cast<std::size_t>(j)] == m) pick[static_cast<std::size_t>(j--)] = 0;
    if (j < 0) return hits;
  }
}

bool VerifyReport::clean() const {
  for (const auto& l : levels)
    if (!l.recorded_ok || !l.recomputed_ok || !l.mismatch.empty() || !l.count_matches || !l.scan_clean ||
        !l.paths_agree || (l.enumerated && l.tuple_hits != 0))
      return false;
  return strong.clean();
}

json VerifyReport::to_json() const {
  json j;
  j["clean"] = clean();
  json ls = json::array();
  for (const auto& l : levels) {
    json o{{"level", l.level},
           {"recorded_ok", l.recorded_ok},
           {"recomputed_ok", l.recomputed_ok},
           {"count_matches", l.count_matches},
           {"scan_clean", l.scan_clean},
           {"scan_truncated", l.scan_truncated},
           {"scan_found", l.scan_found},
           {"enumerated", l.enumerated},
           {"paths_agree", l.paths_agree}};
    if (l.enumerated) o["tuple_hits"] = l.tuple_hits;
    if (!l.mismatch.empty()) o["mismatch"] = l.mismatch;
    o["offending"] = l.offending;
    ls.push_back(o);
  }
  j["levels"] = ls;
  j["sampled"] = strong.sampled;
  j["unresolved"] = strong.unresolved;
  j["violations"] = strong.violations;
  if (!strong.first_violation.empty()) j["first_violation"] = strong.first_violation;
  return j;
}

namespace {

constexpr std::size_t kScanLimit = 16;

std::string compare_certificate(const LevelCertificate& c, const PropertyReport& p, bool ordered, bool rb) {
  if (c.scales_ordered != ordered) return "scales_ordered";
  if (c.r_bound != rb) return "r_bound";
  if (c.large_size != p.large_size) return "large_size";
  if (c.non_concentration != p.non_concentration) return "non_concentration";
  if (c.avoidance != p.avoidance) return "avoidance";
  if (c.nested != p.inside_e) return "nested";
  if (c.min_per_parent != p.min_per_parent) return "min_per_parent";
  if (c.worst_cell_count != p.worst_cell_count) return "worst_cell_count";
  return "";
}

}  // namespace

VerifyReport verify_trace(const ConstructionTrace& trace, const BuildConfig& cfg, std::size_t exhaustive_limit,
                          std::size_t samples) {
  if (trace.levels.empty()) throw PreconditionError("verify_trace: trace has no levels");
  if (trace.d != cfg.d || trace.n != cfg.n) throw ConfigError("verify: trace and config disagree on d or n");
  VerifyReport rep;
  const int n = trace.n;
  CubeSet prev = CubeSet::full_grid(trace.d, DyadicScale(0), 1);
  DyadicScale l_prev(0);

  for (const auto& lvl : trace.levels) {
    LevelVerdict v;
    v.level = lvl.entry.level;
    v.recorded_ok = lvl.cert.all();
    const auto& e = lvl.entry;
    if (e.pattern_index >= static_cast<int>(std::max<std::size_t>(cfg.family.components.size(), 1)))
      throw ConfigError("verify: trace refers to pattern component " + std::to_string(e.pattern_index) +
                        " which the config does not define");
    auto z = level_pattern(cfg, e.pattern_index);
    const BigInt count = z->count(e.l, cfg.budget);
    v.count_matches = count == e.pattern_count;

    if (e.pattern_index < 0) {
      const CubeSet expect = trivial_projection_complement(*z, trace.d, n, e.l, cfg.budget);
      v.recomputed_ok = expect == lvl.X && !lvl.X.empty();
      if (!v.recomputed_ok) v.mismatch = "projection complement differs";
    } else {
      const bool ordered = l_prev <= e.r && e.r <= e.l;
      const bool rb = r_bound_holds(trace.d, n, trace.alpha, e.epsilon, e.l, e.r);
      OracleCover cover(z, e.l, cfg.budget, count);
      const PropertyReport p = verify_properties(prev, cover, lvl.X, l_prev, e.l, e.r, trace.d, n);
      v.recomputed_ok = p.all() && ordered && rb;
      v.mismatch = compare_certificate(lvl.cert, p, ordered, rb);
    }

    auto scan = z->descend_conflicts(lvl.X, n, kScanLimit, cfg.budget);
    v.scan_truncated = scan.truncated;
    v.scan_found = scan.found.size();
    v.scan_clean = !scan.truncated && scan.found.empty();
    for (std::size_t i = 0; i < scan.found.size(); ++i) v.offending.emplace_back(scan.found[i].begin(), scan.found[i].end());

    if (lvl.X.size() <= exhaustive_limit) {
      v.enumerated = true;
      v.tuple_hits = enumerate_tuple_conflicts(lvl.X, n, *z, std::numeric_limits<std::size_t>::max());
      v.paths_agree = scan.truncated ? v.tuple_hits > kScanLimit : v.tuple_hits == scan.found.size();
    }
    rep.levels.push_back(std::move(v));
    prev = lvl.X;
    l_prev = e.l;
  }
  rep.strong = verify_strong_avoidance(trace, cfg, samples);
  return rep;
}

PlotBundle export_plot(const ConstructionTrace& trace, const MeasureTree& tree, double eps) {
  if (trace.levels.empty()) throw PreconditionError("export_plot: trace has no levels");
  const auto report = frostman_scan(tree, trace, eps);
  const CubeSet& fin = trace.levels.back().X;
  PlotBundle b;
  std::ostringstream counts, mass;
  counts << "scale_exponent,count\n";
  mass << "scale_exponent,max_mass,max_mass_exact\n";
  for (const auto& r : report.rows) {
    counts << r.exponent << ',' << box_count(fin, r.exponent) << '\n';
    mass << r.exponent << ',' << format_double(r.max_mass.get_d()) << ',' << r.max_mass.get_str() << '\n';
  }
  b.counts_csv = counts.str();
  b.mass_csv = mass.str();
  b.frostman_csv = report.to_csv();
  b.rows = report.rows.size();
  return b;
}

}  // namespace pavoid
