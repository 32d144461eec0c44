#include "pavoid/demos.hpp"

#include "pavoid/serialize.hpp"

#include <cmath>
#include <set>

namespace pavoid {

using nlohmann::json;

BuildConfig sumset_config(BuildConfig base, OraclePtr y) {
  if (!y) throw ConfigError("sumset demo: no target set");
  const int d = y->ambient_dim();
  const double beta = y->declared_alpha();
  if (!(beta < d)) throw ConfigError("sumset demo: the target set needs dimension below " + std::to_string(d));
  base.d = d;
  base.n = 2;
  base.alpha = d + beta;
  base.family.d = d;
  base.family.n = 2;
  base.family.components = {sumset_pattern(std::make_shared<DilatedOracle>(y), d)};
  base.validate();
  return base;
}

SumsetCheck check_sumset(const CubeSet& x, const PatternOracle& y) {
  const int d = x.dim();
  if (y.ambient_dim() != d) throw PreconditionError("check_sumset: dimension mismatch");
  SumsetCheck c;
  c.exponent = x.scale().exponent();
  c.cubes = x.size();
  const CubeSet cover = y.enumerate(x.scale(), Budget{});
  c.cover_cells = cover.size();

  // grow by one cell per axis; indices may leave the unit grid
  using Cell = std::vector<long long>;
  std::set<Cell> grown;
  const std::size_t nb = static_cast<std::size_t>(std::pow(3, d));
  for (std::size_t i = 0; i < cover.size(); ++i) {
    auto row = cover[i];
    for (std::size_t m = 0; m < nb; ++m) {
      Cell cell(static_cast<std::size_t>(d));
      std::size_t code = m;
      for (int a = 0; a < d; ++a, code /= 3)
        cell[static_cast<std::size_t>(a)] = static_cast<long long>(row[static_cast<std::size_t>(a)]) + static_cast<long long>(code % 3) - 1;
      grown.insert(std::move(cell));
    }
  }
  c.inflated_cells = grown.size();

  // I + J covers cells a+b and a+b+1 on each axis
  const std::size_t corners = std::size_t{1} << d;
  Cell probe(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) {
      auto a = x[i], b = x[j];
      bool hit = false;
      for (std::size_t m = 0; m < corners && !hit; ++m) {
        for (int t = 0; t < d; ++t)
          probe[static_cast<std::size_t>(t)] = static_cast<long long>(a[static_cast<std::size_t>(t)]) +
                                              static_cast<long long>(b[static_cast<std::size_t>(t)]) +
                                              static_cast<long long>((m >> t) & 1U);
        hit = grown.count(probe) > 0;
      }
      BranchTally& tally = i == j ? c.diagonal : c.distinct;
      ++tally.pairs;
      tally.hits += hit;
    }
  return c;
}

json SumsetDemo::to_json() const {
  json j;
  j["demo"] = "sumset";
  j["d"] = trace.d;
  j["target_dimension"] = y_dimension;
  j["alpha"] = trace.alpha;
  j["dimension_lower_bound"] = trace.d - y_dimension;
  json lv = json::array();
  for (const auto& l : trace.levels)
    lv.push_back({{"level", l.entry.level},
                  {"l_exponent", l.entry.l.exponent()},
                  {"r_exponent", l.entry.r.exponent()},
                  {"cubes", l.X.size()},
                  {"conflicts_removed", l.cert.conflicts},
                  {"certified", l.cert.all()}});
  j["levels"] = lv;
  j["stop_reason"] = trace.stop_reason;
  j["final_scale_exponent"] = check.exponent;
  j["final_cubes"] = check.cubes;
  j["target_cover_cells"] = check.cover_cells;
  j["inflated_cover_cells"] = check.inflated_cells;
  j["distinct_pairs"] = {{"pairs", check.distinct.pairs}, {"hits", check.distinct.hits}};
  j["diagonal_pairs"] = {{"pairs", check.diagonal.pairs}, {"hits", check.diagonal.hits}};
  j["clean"] = clean();
  return j;
}

SumsetDemo run_sumset_demo(const BuildConfig& base, OraclePtr y) {
  const BuildConfig cfg = sumset_config(base, y);
  SumsetDemo out;
  out.y_dimension = y->declared_alpha();
  out.trace = build(cfg);
  if (out.trace.levels.empty()) throw IntegrityError("sumset demo: no level was built");
  out.check = check_sumset(out.trace.levels.back().X, *y);
  return out;
}

// ---------------------------------------------------------------- isosceles

BuildConfig isosceles_config(BuildConfig base, const CurvePtr& g) {
  if (!g) throw ConfigError("isosceles demo: no curve");
  if (base.n != 3) throw ConfigError("isosceles demo: a triangle needs three points, so n must be 3");
  if (base.d != 1) throw ConfigError("isosceles demo: the curve parameter is one-dimensional, so d must be 1");
  base.alpha = 2.0;
  base.family.d = 1;
  base.family.n = 3;
  base.family.components = {isosceles_pattern(rescale_curve(g), g->out_dim() + 1)};
  base.validate();
  return base;
}

namespace {

bool linear_curve(const CurvePtr& g) { return g->name() == "zero" || g->name() == "identity"; }

// For f(t) = c t the graph is a line and isosceles means one parameter is the
// midpoint of the other two. With half-open cells a, b, c that happens for
// some points iff |2c - a - b| <= 1.
bool midpoint_possible(long long a, long long b, long long c) { return std::llabs(2 * c - a - b) <= 1; }

Interval square(Interval v) {
  const double a = v.lo * v.lo, b = v.hi * v.hi;
  const double hi = std::max(a, b);
  const double lo = v.contains_zero() ? 0.0 : std::min(a, b);
  return Interval::widen(lo, hi);
}

// Graph point over [t0, t1]: endpoint values of f, widened by the Lipschitz
// slack L w / 2 beyond their hull.
std::vector<Interval> graph_box(const LipschitzCurve& f, double t0, double t1) {
  std::vector<Interval> p;
  p.push_back(Interval::widen(t0, t1));
  const auto v0 = f.eval(t0), v1 = f.eval(t1);
  const double slack = f.lipschitz() * (t1 - t0) / 2;
  for (std::size_t i = 0; i < v0.size(); ++i)
    p.push_back(Interval(std::min(v0[i].lo, v1[i].lo), std::max(v0[i].hi, v1[i].hi)).inflate(slack));
  return p;
}

bool zero_excluded(const std::vector<Interval>& pa, const std::vector<Interval>& pb, const std::vector<Interval>& pc) {
  Interval sum(0.0, 0.0);
  for (std::size_t i = 0; i < pa.size(); ++i) sum = sum + (square(pa[i] - pc[i]) - square(pb[i] - pc[i]));
  return !sum.contains_zero();
}

struct Piece {
  double t0, t1;
};

// 0 excluded, 1 undecided at the depth limit
int apex_test(const LipschitzCurve& f, Piece a, Piece b, Piece c, int depth) {
  if (zero_excluded(graph_box(f, a.t0, a.t1), graph_box(f, b.t0, b.t1), graph_box(f, c.t0, c.t1))) return 0;
  if (depth == 0) return 1;
  Piece* widest = &a;
  if (b.t1 - b.t0 > widest->t1 - widest->t0) widest = &b;
  if (c.t1 - c.t0 > widest->t1 - widest->t0) widest = &c;
  const Piece whole = *widest;
  const double mid = 0.5 * (whole.t0 + whole.t1);
  *widest = {whole.t0, mid};
  if (apex_test(f, a, b, c, depth - 1)) return 1;
  *widest = {mid, whole.t1};
  return apex_test(f, a, b, c, depth - 1);
}

}  // namespace

TripleCheck check_isosceles(const CubeSet& x, const CurvePtr& g) {
  if (x.dim() != 1) throw PreconditionError("check_isosceles: parameter sets are one-dimensional");
  TripleCheck c;
  const bool exact = linear_curve(g);
  c.method = exact ? "exact-linear" : "interval-subdivision";
  const CurvePtr f = rescale_curve(g);
  const double h = x.scale().length();
  const std::size_t m = x.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      for (std::size_t k = j + 1; k < m; ++k) {
        ++c.triples;
        const long long a = x[i][0], b = x[j][0], e = x[k][0];
        if (exact) {
          c.violations += midpoint_possible(b, e, a) || midpoint_possible(a, e, b) || midpoint_possible(a, b, e);
          continue;
        }
        const Piece pa{a * h, (a + 1) * h}, pb{b * h, (b + 1) * h}, pe{e * h, (e + 1) * h};
        const int r = apex_test(*f, pb, pe, pa, 12) + apex_test(*f, pa, pe, pb, 12) + apex_test(*f, pa, pb, pe, 12);
        c.unresolved += r > 0;
      }
  return c;
}

CoveringScan isosceles_covering_scan(const PatternOracle& z, int k_lo, int k_hi, const Budget& budget) {
  CoveringScan s;
  for (int k = k_lo; k <= k_hi; ++k) {
    try {
      s.counts.push_back(z.count(DyadicScale(k), budget));
      s.exponents.push_back(k);
    } catch (const BudgetError& e) {
      s.partial = true;
      s.note = "stopped at exponent " + std::to_string(k) + ": " + e.what();
      break;
    }
  }
  return s;
}

bool IsoscelesDemo::fit_ok() const { return fit && fit->leading <= kCoveringExponentCap; }

json IsoscelesDemo::to_json() const {
  json j;
  j["demo"] = "isosceles";
  j["curve"] = curve;
  j["lipschitz_bound"] = m;
  json sc = json::array();
  for (std::size_t i = 0; i < scan.exponents.size(); ++i)
    sc.push_back({{"scale_exponent", scan.exponents[i]}, {"count", scan.counts[i].get_str()}});
  j["covering_scan"] = sc;
  j["covering_scan_partial"] = scan.partial;
  if (!scan.note.empty()) j["covering_scan_note"] = scan.note;
  if (fit) {
    j["covering_fit"] = {{"leading", fit->leading},
                         {"log_term", fit->log_term},
                         {"intercept", fit->intercept},
                         {"plain_slope", fit->plain_slope},
                         {"cap", kCoveringExponentCap},
                         {"within_cap", fit_ok()}};
  } else {
    j["covering_fit"] = nullptr;
  }
  j["log_constant"] = log_constant;
  j["dimension_lower_bound"] = target;
  json lv = json::array();
  for (const auto& l : trace.levels)
    lv.push_back({{"level", l.entry.level},
                  {"l_exponent", l.entry.l.exponent()},
                  {"r_exponent", l.entry.r.exponent()},
                  {"cubes", l.X.size()},
                  {"conflicts_removed", l.cert.conflicts},
                  {"certified", l.cert.all()}});
  j["levels"] = lv;
  j["stop_reason"] = trace.stop_reason;
  j["triple_check"] = {{"method", check.method},
                       {"triples", check.triples},
                       {"violations", check.violations},
                       {"unresolved", check.unresolved}};
  j["clean"] = clean();
  return j;
}

json IsoscelesDemo::parametrizations() const {
  json j;
  if (trace.levels.empty()) return j;
  const CubeSet& x = trace.levels.back().X;
  const double h = x.scale().length();
  const double shrink = 10.0 * m;
  json own = json::array(), orig = json::array();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lo = static_cast<double>(x[i][0]) * h, hi = lo + h;
    own.push_back({lo, hi});
    orig.push_back({lo / shrink, hi / shrink});
  }
  j["curve"] = curve;
  j["scale_exponent"] = x.scale().exponent();
  j["rescaled_parameter"] = own;
  j["curve_parameter"] = orig;
  return j;
}

IsoscelesDemo run_isosceles_demo(const BuildConfig& base, const std::string& curve, double m, int scan_lo,
                                 int scan_hi) {
  const CurvePtr g = make_builtin_curve(curve, m);
  const BuildConfig cfg = isosceles_config(base, g);
  IsoscelesDemo out;
  out.curve = curve;
  out.m = m;
  out.target = (cfg.d * cfg.n - cfg.alpha) / (cfg.d * (cfg.n - 1.0));
  const auto& z = *cfg.family.components.front();
  out.scan = isosceles_covering_scan(z, scan_lo, scan_hi, cfg.budget);
  if (out.scan.exponents.size() >= 4) out.fit = covering_fit(out.scan.exponents, out.scan.counts);
  for (std::size_t i = 0; i < out.scan.exponents.size(); ++i) {
    const int k = out.scan.exponents[i];
    const double ratio = std::exp2(log2_big(out.scan.counts[i]) - 2.0 * k) / k;
    out.log_constant = std::max(out.log_constant, ratio);
  }
  out.trace = build(cfg);
  if (out.trace.levels.empty()) throw IntegrityError("isosceles demo: no level was built");
  out.check = check_isosceles(out.trace.levels.back().X, g);
  return out;
}

}  // namespace pavoid
