#include "pavoid/measure.hpp"

#include "pavoid/fit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace pavoid {

namespace {

// Parent position in `coarse` for every cube of `fine`.
std::vector<std::size_t> parent_positions(const CubeSet& fine, const CubeSet& coarse) {
  const std::size_t ud = static_cast<std::size_t>(fine.dim());
  std::vector<std::size_t> out(fine.size());
  std::vector<Index> up(ud);
  for (std::size_t i = 0; i < fine.size(); ++i) {
    ancestor_into(fine[i], fine.scale().exponent(), coarse.scale().exponent(), up.data());
    out[i] = coarse.find(up);
    if (out[i] == coarse.size()) throw IntegrityError("measure: a cube has no parent in the previous level");
  }
  return out;
}

// Sum of count * class mass over a small class histogram.
Rational weigh(const std::vector<std::pair<std::uint32_t, std::size_t>>& hist, const MeasureLevel& lvl) {
  Rational s = 0;
  for (const auto& [c, k] : hist) s += lvl.class_mass[c] * Rational(static_cast<unsigned long>(k));
  return s;
}

void bump(std::vector<std::pair<std::uint32_t, std::size_t>>& hist, std::uint32_t c) {
  for (auto& e : hist)
    if (e.first == c) {
      ++e.second;
      return;
    }
  hist.emplace_back(c, 1);
}

}  // namespace

Rational MeasureLevel::total() const {
  std::vector<std::size_t> per(class_mass.size(), 0);
  for (auto c : mass_class) ++per[c];
  Rational s = 0;
  for (std::size_t c = 0; c < per.size(); ++c) s += class_mass[c] * Rational(static_cast<unsigned long>(per[c]));
  return s;
}

MeasureTree build_measure(const ConstructionTrace& trace) {
  if (trace.levels.empty()) throw PreconditionError("build_measure: trace has no levels");
  MeasureTree tree;
  tree.d = trace.d;
  for (std::size_t i = 0; i < trace.levels.size(); ++i) {
    const CubeSet& x = trace.levels[i].X;
    if (x.empty()) throw IntegrityError("measure: level " + std::to_string(i + 1) + " is empty");
    MeasureLevel lvl;
    lvl.scale = x.scale();
    lvl.cubes = x;
    lvl.mass_class.resize(x.size());
    if (i == 0) {
      lvl.class_mass = {Rational(1) / Rational(static_cast<unsigned long>(x.size()))};
      std::fill(lvl.mass_class.begin(), lvl.mass_class.end(), 0);
    } else {
      const MeasureLevel& prev = tree.levels.back();
      auto par = parent_positions(x, prev.cubes);
      std::vector<std::size_t> siblings(prev.cubes.size(), 0);
      for (auto p : par) ++siblings[p];
      std::map<std::pair<std::uint32_t, std::size_t>, std::uint32_t> ids;
      for (std::size_t j = 0; j < x.size(); ++j) {
        const auto key = std::make_pair(prev.mass_class[par[j]], siblings[par[j]]);
        auto it = ids.find(key);
        if (it == ids.end()) {
          it = ids.emplace(key, static_cast<std::uint32_t>(lvl.class_mass.size())).first;
          Rational m = prev.class_mass[key.first] / Rational(static_cast<unsigned long>(key.second));
          m.canonicalize();
          lvl.class_mass.push_back(m);
        }
        lvl.mass_class[j] = it->second;
      }
    }
    tree.levels.push_back(std::move(lvl));
  }
  return tree;
}

Rational mass_query(const MeasureTree& tree, const Cube& c) {
  if (tree.levels.empty()) throw PreconditionError("mass_query: empty tree");
  if (static_cast<int>(c.index.size()) != tree.d) throw PreconditionError("mass_query: cube dimension mismatch");
  const int k = c.scale.exponent();
  auto it = std::find_if(tree.levels.begin(), tree.levels.end(),
                         [&](const MeasureLevel& l) { return l.scale.exponent() >= k; });
  if (it == tree.levels.end()) throw PreconditionError("mass_query: cube is finer than the last level");
  const MeasureLevel& lvl = *it;
  if (lvl.scale.exponent() == k) {
    const std::size_t pos = lvl.cubes.find(c.index);
    return pos == lvl.cubes.size() ? Rational(0) : lvl.mass(pos);
  }
  // Descendants share the first coordinate range [c0 << t, (c0 + 1) << t), which is contiguous.
  const int t = lvl.scale.exponent() - k;
  const std::size_t ud = static_cast<std::size_t>(tree.d);
  const Index lo = c.index[0] << t, hi = (c.index[0] + 1) << t;
  const auto& flat = lvl.cubes.flat();
  std::size_t a = 0, b = lvl.cubes.size();
  while (a < b) {
    const std::size_t mid = (a + b) / 2;
    if (flat[mid * ud] < lo) a = mid + 1;
    else b = mid;
  }
  std::vector<std::pair<std::uint32_t, std::size_t>> hist;
  std::vector<Index> up(ud);
  for (std::size_t i = a; i < lvl.cubes.size() && flat[i * ud] < hi; ++i) {
    ancestor_into(lvl.cubes[i], lvl.scale.exponent(), k, up.data());
    if (std::equal(up.begin(), up.end(), c.index.begin())) bump(hist, lvl.mass_class[i]);
  }
  return weigh(hist, lvl);
}

std::string check_conservation(const MeasureTree& tree) {
  for (std::size_t i = 0; i < tree.levels.size(); ++i) {
    const MeasureLevel& lvl = tree.levels[i];
    if (lvl.total() != 1) return "level " + std::to_string(i + 1) + " mass sums to " + lvl.total().get_str();
    if (i == 0) continue;
    const MeasureLevel& prev = tree.levels[i - 1];
    auto par = parent_positions(lvl.cubes, prev.cubes);
    std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> hist(prev.cubes.size());
    for (std::size_t j = 0; j < par.size(); ++j) bump(hist[par[j]], lvl.mass_class[j]);
    for (std::size_t p = 0; p < prev.cubes.size(); ++p)
      if (weigh(hist[p], lvl) != prev.mass(p))
        return "level " + std::to_string(i + 1) + ": children of parent " + std::to_string(p) + " do not add up";
  }
  return {};
}

double ScaleRow::ratio() const { return std::exp2(log2_ratio); }

double target_exponent(const ConstructionTrace& trace) {
  const double b = (trace.d * trace.n - trace.alpha) / (trace.n - 1);
  return std::min<double>(trace.d, b);
}

Rational eta_at(const ConstructionTrace& trace, std::size_t level_index) {
  if (level_index >= trace.levels.size()) throw PreconditionError("eta_at: level out of range");
  Rational e = Rational(trace.n + 1) * trace.levels[level_index].entry.epsilon / Rational(2 * (trace.n - 1));
  e.canonicalize();
  return e;
}

std::string label_case(const ConstructionTrace& trace, int exponent) {
  for (std::size_t i = 0; i < trace.levels.size(); ++i) {
    const int lo = trace.scale_before(i).exponent();
    const int m = trace.levels[i].entry.r.exponent();
    const int hi = trace.levels[i].entry.l.exponent();
    if (exponent >= lo && exponent < hi) return exponent < m ? "case1" : "case2";
  }
  return "case1";
}

FrostmanReport frostman_scan(const MeasureTree& tree, const ConstructionTrace& trace, double eps) {
  if (!(eps > 0)) throw PreconditionError("frostman_scan: eps must be positive");
  if (tree.levels.empty() || tree.levels.size() != trace.levels.size())
    throw PreconditionError("frostman_scan: measure and trace disagree");
  FrostmanReport rep;
  rep.beta = target_exponent(trace);
  rep.eps = eps;
  const int d = tree.d;
  const std::size_t ud = static_cast<std::size_t>(d);
  const MeasureLevel& fin = tree.levels.back();
  const int kf = fin.scale.exponent();
  const std::size_t classes = fin.class_mass.size();

  std::vector<Index> anc(fin.cubes.flat().size());
  std::vector<std::size_t> order(fin.cubes.size());
  for (int j = 0; j <= kf; ++j) {
    for (std::size_t i = 0; i < fin.cubes.size(); ++i) ancestor_into(fin.cubes[i], kf, j, anc.data() + i * ud);
    auto row = [&](std::size_t i) { return IndexSpan(anc.data() + i * ud, ud); };
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (d > 1) std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return compare_index(row(a), row(b)) < 0; });

    // Single-class groups reduce to a count; mixed groups are weighed exactly.
    std::vector<std::size_t> best_count(classes, 0);
    Rational best_mixed = 0;
    std::vector<std::pair<std::uint32_t, std::size_t>> hist;
    std::size_t start = 0;
    for (std::size_t p = 1; p <= order.size(); ++p) {
      if (p < order.size() && compare_index(row(order[p]), row(order[start])) == 0) continue;
      hist.clear();
      for (std::size_t q = start; q < p; ++q) bump(hist, fin.mass_class[order[q]]);
      if (hist.size() == 1) {
        best_count[hist[0].first] = std::max(best_count[hist[0].first], hist[0].second);
      } else {
        Rational w = weigh(hist, fin);
        if (w > best_mixed) best_mixed = w;
      }
      start = p;
    }
    ScaleRow r;
    r.exponent = j;
    r.case_label = label_case(trace, j);
    r.max_mass = best_mixed;
    for (std::size_t c = 0; c < classes; ++c) {
      Rational w = fin.class_mass[c] * Rational(static_cast<unsigned long>(best_count[c]));
      if (w > r.max_mass) r.max_mass = w;
    }
    r.log2_ratio = log2_rational(r.max_mass) + j * (rep.beta - eps);
    rep.constant = std::max(rep.constant, r.ratio());
    rep.rows.push_back(std::move(r));
  }

  std::vector<double> xs, ys;
  for (const auto& r : rep.rows) {
    xs.push_back(r.exponent);
    ys.push_back(-log2_rational(r.max_mass));
  }
  if (xs.size() >= 2) rep.fitted_exponent = fit_line(xs, ys).slope;

  for (std::size_t i = 0; i < trace.levels.size(); ++i) {
    const auto& e = trace.levels[i].entry;
    const MeasureLevel& lvl = tree.levels[i];
    LevelAudit a;
    a.level = e.level;
    a.eta = eta_at(trace, i);
    a.max_mass = *std::max_element(lvl.class_mass.begin(), lvl.class_mass.end());
    const int kp = trace.scale_before(i).exponent();
    const int shift = d * (e.r.exponent() - kp);
    a.share_bound = Rational(2) / Rational(pow2(static_cast<unsigned long>(shift)));
    a.share_ok = a.max_mass <= a.share_bound;
    const double eta = a.eta.get_d();
    a.level_ratio = std::exp2(log2_rational(a.max_mass) + e.l.exponent() * (rep.beta - eta));
    const double eta_prev = i == 0 ? 0.0 : eta_at(trace, i - 1).get_d();
    // At most one cube of X_k per r_k-cube, so the r_k-cube maximum is the level maximum.
    a.r_cell_ratio = std::exp2(log2_rational(a.max_mass) + shift + kp * (rep.beta - eta_prev));
    rep.levels.push_back(a);
  }
  return rep;
}

std::string FrostmanReport::to_csv() const {
  std::ostringstream out;
  out << "scale_exponent,case,max_ratio\n";
  out.precision(17);
  for (const auto& r : rows) out << r.exponent << ',' << r.case_label << ',' << r.ratio() << '\n';
  return out.str();
}

}  // namespace pavoid
