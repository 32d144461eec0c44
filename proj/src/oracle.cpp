#include "pavoid/oracle.hpp"

#include "pavoid/fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace pavoid {

const char* to_string(Soundness s) { return s == Soundness::exact ? "exact" : "over_approx"; }

PatternOracle::PatternOracle(int ambient_dim, double declared_alpha, Soundness soundness)
    : ambient_dim_(ambient_dim), alpha_(declared_alpha), soundness_(soundness) {
  if (ambient_dim < 1 || ambient_dim > kMaxDim) throw PreconditionError("oracle ambient dimension out of range");
  if (!(declared_alpha >= 0.0) || !std::isfinite(declared_alpha))
    throw ConfigError("declared alpha must be a finite non-negative number");
}

void PatternFamily::validate() const {
  if (d < 1 || n < 2) throw ConfigError("pattern family needs d >= 1 and n >= 2");
  if (components.empty()) throw ConfigError("pattern family is empty");
  for (const auto& c : components)
    if (!c || c->ambient_dim() != d * n) throw ConfigError("pattern component does not live in dimension d*n");
}

namespace {

struct VisitCounter {
  std::uint64_t visits = 0;
  std::uint64_t cap;
  void tick() {
    if (++visits > cap) throw BudgetError("descent visit budget exhausted");
  }
};

// Depth-first descent over cubes meeting the cover at `target`. Calls
// leaf(idx) for each member at the target scale (in no particular order).
template <class Leaf>
void descend(const PatternOracle& o, int target, const Budget& budget, Leaf&& leaf) {
  const std::size_t dim = static_cast<std::size_t>(o.ambient_dim());
  const std::size_t fan = std::size_t{1} << dim;
  std::vector<Index> stack(dim, 0);
  std::vector<int> level{0};
  std::vector<Index> node(dim);
  VisitCounter vc{0, budget.max_visits};
  while (!level.empty()) {
    const int j = level.back();
    level.pop_back();
    std::copy(stack.end() - static_cast<std::ptrdiff_t>(dim), stack.end(), node.begin());
    stack.resize(stack.size() - dim);
    vc.tick();
    if (!o.meets(node, j, target)) continue;
    if (j == target) {
      leaf(IndexSpan(node));
      continue;
    }
    for (std::size_t c = fan; c-- > 0;) {
      for (std::size_t i = 0; i < dim; ++i) stack.push_back(2 * node[i] + static_cast<Index>((c >> (dim - 1 - i)) & 1));
      level.push_back(j + 1);
    }
  }
}

bool any_in_box(const CubeSet& s, const std::vector<Index>& lo, const std::vector<Index>& hi) {
  const std::size_t d = lo.size();
  std::size_t a = 0, b = s.size();
  while (a < b) {
    std::size_t m = a + (b - a) / 2;
    if (s[m][0] < lo[0])
      a = m + 1;
    else
      b = m;
  }
  for (std::size_t i = a; i < s.size() && s[i][0] <= hi[0]; ++i) {
    auto r = s[i];
    bool inside = true;
    for (std::size_t j = 1; j < d && inside; ++j) inside = r[j] >= lo[j] && r[j] <= hi[j];
    if (inside) return true;
  }
  return false;
}

// Membership of single coordinates in a line set's cover at one scale, either
// through an enumerated cell list or the line's own test.
class LineMembership {
 public:
  LineMembership(const LineSet& line, int k, std::size_t enumerate_cap) : line_(line), k_(k) {
    if (line.is_full()) {
      full_ = true;
      return;
    }
    try {
      cells_ = line.enumerate(k, enumerate_cap);
      enumerated_ = true;
    } catch (const BudgetError&) {
      enumerated_ = false;
    }
  }
  bool operator()(Index a) const {
    if (full_) return true;
    if (enumerated_) return std::binary_search(cells_.begin(), cells_.end(), a);
    return line_.meets(a, k_, k_);
  }

 private:
  const LineSet& line_;
  int k_;
  bool full_ = false;
  bool enumerated_ = false;
  std::vector<Index> cells_;
};

// Lexicographic odometer over the Cartesian product of row lists, each row of
// width `width`. Calls emit(flat tuple) and stops early when emit returns false.
template <class Emit>
void cartesian(const std::vector<std::vector<Index>>& lists, std::size_t width, Emit&& emit) {
  const std::size_t blocks = lists.size();
  for (const auto& l : lists)
    if (l.empty()) return;
  std::vector<std::size_t> pos(blocks, 0);
  std::vector<Index> tuple(blocks * width);
  for (;;) {
    for (std::size_t b = 0; b < blocks; ++b)
      std::copy_n(lists[b].begin() + static_cast<std::ptrdiff_t>(pos[b] * width), width, tuple.begin() + static_cast<std::ptrdiff_t>(b * width));
    if (!emit(IndexSpan(tuple))) return;
    std::size_t b = blocks;
    while (b > 0) {
      --b;
      if (++pos[b] < lists[b].size() / width) break;
      pos[b] = 0;
      if (b == 0) return;
    }
  }
}

}  // namespace

CubeSet PatternOracle::enumerate(DyadicScale s, const Budget& budget) const {
  std::vector<Index> flat;
  std::size_t found = 0;
  descend(*this, s.exponent(), budget, [&](IndexSpan idx) {
    if (++found > budget.max_cubes) throw BudgetError("cover at k=" + std::to_string(s.exponent()) + " exceeds cube budget");
    flat.insert(flat.end(), idx.begin(), idx.end());
  });
  return CubeSet::from_unsorted(ambient_dim_, s, std::move(flat));
}

BigInt PatternOracle::count(DyadicScale s, const Budget& budget) const {
  std::uint64_t found = 0;
  descend(*this, s.exponent(), budget, [&](IndexSpan) { ++found; });
  return BigInt(static_cast<unsigned long>(found));
}

std::optional<CubeSet> PatternOracle::conflicts_within(const CubeSet& u, int n, std::size_t limit,
                                                       const Budget& budget) const {
  auto scan = descend_conflicts(u, n, limit, budget);
  if (scan.truncated) return std::nullopt;
  return std::move(scan.found);
}

PatternOracle::ConflictScan PatternOracle::descend_conflicts(const CubeSet& u, int n, std::size_t limit,
                                                             const Budget& budget) const {
  if (n < 1 || ambient_dim_ % n != 0 || u.dim() != ambient_dim_ / n)
    throw PreconditionError("conflicts_within: u does not match the oracle's factor dimension");
  const int d = u.dim();
  const int target = u.scale().exponent();
  if (u.empty()) return {CubeSet(ambient_dim_, u.scale()), false};
  std::vector<CubeSet> ladder(static_cast<std::size_t>(target) + 1);
  ladder[static_cast<std::size_t>(target)] = u;
  for (int j = target - 1; j >= 0; --j)
    ladder[static_cast<std::size_t>(j)] = coarsen(ladder[static_cast<std::size_t>(j) + 1], DyadicScale(j));

  const std::size_t dim = static_cast<std::size_t>(ambient_dim_);
  const std::size_t ud = static_cast<std::size_t>(d);
  const std::size_t sub = std::size_t{1} << ud;
  std::vector<Index> found;
  std::size_t found_count = 0;
  std::vector<Index> stack(dim, 0);
  std::vector<int> level{0};
  std::vector<Index> node(dim), child(ud);
  std::vector<std::vector<Index>> options(static_cast<std::size_t>(n));
  VisitCounter vc{0, budget.max_visits};
  while (!level.empty()) {
    const int j = level.back();
    level.pop_back();
    std::copy(stack.end() - static_cast<std::ptrdiff_t>(dim), stack.end(), node.begin());
    stack.resize(stack.size() - dim);
    vc.tick();
    if (!meets(node, j, target)) continue;
    if (j == target) {
      if (!is_strongly_non_diagonal(node, d, n)) continue;
      if (++found_count > limit) return {CubeSet::from_unsorted(ambient_dim_, u.scale(), std::move(found)), true};
      found.insert(found.end(), node.begin(), node.end());
      continue;
    }
    const CubeSet& next = ladder[static_cast<std::size_t>(j) + 1];
    for (int b = 0; b < n; ++b) {
      auto& opt = options[static_cast<std::size_t>(b)];
      opt.clear();
      for (std::size_t c = 0; c < sub; ++c) {
        for (std::size_t i = 0; i < ud; ++i)
          child[i] = 2 * node[static_cast<std::size_t>(b) * ud + i] + static_cast<Index>((c >> (ud - 1 - i)) & 1);
        if (next.contains(child)) opt.insert(opt.end(), child.begin(), child.end());
      }
    }
    cartesian(options, ud, [&](IndexSpan t) {
      stack.insert(stack.end(), t.begin(), t.end());
      level.push_back(j + 1);
      return true;
    });
  }
  return {CubeSet::from_unsorted(ambient_dim_, u.scale(), std::move(found)), false};
}

// ---------------------------------------------------------------- point cloud

PointCloudOracle::PointCloudOracle(int ambient_dim, std::vector<std::vector<double>> points, double declared_alpha)
    : PatternOracle(ambient_dim, declared_alpha, Soundness::exact), points_(std::move(points)) {
  for (const auto& p : points_) {
    if (static_cast<int>(p.size()) != ambient_dim) throw ConfigError("point has the wrong number of coordinates");
    for (double x : p)
      if (!(x >= 0.0 && x < 1.0)) throw ConfigError("point coordinate outside [0,1)");
  }
}

std::string PointCloudOracle::describe() const { return "pointcloud(" + std::to_string(points_.size()) + ")"; }

bool PointCloudOracle::meets(IndexSpan idx, int k, int) const {
  for (const auto& p : points_) {
    bool hit = true;
    for (std::size_t i = 0; i < p.size() && hit; ++i) hit = static_cast<Index>(std::floor(std::ldexp(p[i], k))) == idx[i];
    if (hit) return true;
  }
  return false;
}

CubeSet PointCloudOracle::enumerate(DyadicScale s, const Budget&) const {
  std::vector<Index> flat;
  flat.reserve(points_.size() * static_cast<std::size_t>(ambient_dim()));
  for (const auto& p : points_)
    for (double x : p) flat.push_back(static_cast<Index>(std::floor(std::ldexp(x, s.exponent()))));
  return CubeSet::from_unsorted(ambient_dim(), s, std::move(flat));
}

BigInt PointCloudOracle::count(DyadicScale s, const Budget& budget) const {
  return cover_count(enumerate(s, budget));
}

// ---------------------------------------------------------------- linear zero set

LinearZeroSetOracle::LinearZeroSetOracle(std::vector<Rational> coefficients, Rational constant, double declared_alpha)
    : PatternOracle(static_cast<int>(coefficients.size()), declared_alpha, Soundness::exact),
      coef_(std::move(coefficients)),
      constant_(std::move(constant)) {}

std::string LinearZeroSetOracle::describe() const {
  std::ostringstream os;
  os << "zeroset(";
  for (std::size_t i = 0; i < coef_.size(); ++i) os << (i ? "," : "") << coef_[i].get_str();
  os << ";" << constant_.get_str() << ")";
  return os.str();
}

// In units of 2^-k the form ranges over a box-sum whose lower end is attained
// only when no coefficient is negative, and whose upper end only when none is
// positive (the cube is half-open on the right).
bool LinearZeroSetOracle::meets(IndexSpan idx, int k, int) const {
  Rational lo = constant_ * Rational(pow2(static_cast<unsigned long>(k)));
  Rational hi = lo;
  bool any_pos = false, any_neg = false;
  for (std::size_t i = 0; i < coef_.size(); ++i) {
    const int sign = sgn(coef_[i]);
    if (sign == 0) continue;
    const Rational a(static_cast<long>(idx[i]));
    const Rational a1(static_cast<long>(idx[i] + 1));
    if (sign > 0) {
      any_pos = true;
      lo += coef_[i] * a;
      hi += coef_[i] * a1;
    } else {
      any_neg = true;
      lo += coef_[i] * a1;
      hi += coef_[i] * a;
    }
  }
  if (!any_pos && !any_neg) return lo == 0;
  if (lo < 0 && hi > 0) return true;
  if (lo == 0 && !any_neg) return true;
  if (hi == 0 && !any_pos) return true;
  return false;
}

// ---------------------------------------------------------------- products

ProductOracle::ProductOracle(std::vector<LineSetPtr> lines, double declared_alpha)
    : PatternOracle(static_cast<int>(lines.size()), declared_alpha,
                    std::all_of(lines.begin(), lines.end(), [](const LineSetPtr& l) { return l && l->exact(); })
                        ? Soundness::exact
                        : Soundness::over_approx),
      lines_(std::move(lines)) {
  for (const auto& l : lines_)
    if (!l) throw PreconditionError("product oracle: null line set");
}

std::string ProductOracle::describe() const {
  std::string s = "product(";
  for (std::size_t i = 0; i < lines_.size(); ++i) s += (i ? " x " : "") + lines_[i]->describe();
  return s + ")";
}

bool ProductOracle::meets(IndexSpan idx, int k, int target) const {
  for (std::size_t i = 0; i < lines_.size(); ++i)
    if (!lines_[i]->meets(idx[i], k, target)) return false;
  return true;
}

CubeSet ProductOracle::enumerate(DyadicScale s, const Budget& budget) const {
  if (count(s, budget) > BigInt(static_cast<unsigned long>(budget.max_cubes)))
    throw BudgetError("product cover at k=" + std::to_string(s.exponent()) + " exceeds cube budget");
  std::vector<std::vector<Index>> lists;
  for (const auto& l : lines_) lists.push_back(l->enumerate(s.exponent(), budget.max_cubes));
  std::vector<Index> flat;
  cartesian(lists, 1, [&](IndexSpan t) {
    flat.insert(flat.end(), t.begin(), t.end());
    return true;
  });
  return CubeSet::from_sorted_unique(ambient_dim(), s, std::move(flat));
}

BigInt ProductOracle::count(DyadicScale s, const Budget& budget) const {
  BigInt total = 1;
  for (const auto& l : lines_) total *= l->count(s.exponent(), budget.max_cubes);
  return total;
}

BigInt ProductOracle::intersection_count(const std::vector<const ProductOracle*>& parts, DyadicScale s,
                                         const Budget& budget) {
  if (parts.empty()) throw PreconditionError("intersection_count: no parts");
  const int dim = parts.front()->ambient_dim();
  const int k = s.exponent();
  BigInt total = 1;
  for (int i = 0; i < dim; ++i) {
    std::vector<const LineSet*> restricted;
    for (const auto* p : parts) {
      const LineSet* l = p->lines_[static_cast<std::size_t>(i)].get();
      if (!l->is_full()) restricted.push_back(l);
    }
    if (restricted.empty()) {
      total *= pow2(static_cast<unsigned long>(k));
      continue;
    }
    std::vector<std::vector<Index>> cells;
    for (const auto* l : restricted) cells.push_back(l->enumerate(k, budget.max_cubes));
    std::size_t best = 0;
    for (std::size_t j = 1; j < cells.size(); ++j)
      if (cells[j].size() < cells[best].size()) best = j;
    unsigned long hits = 0;
    for (Index a : cells[best]) {
      bool all = true;
      for (std::size_t j = 0; j < cells.size() && all; ++j)
        if (j != best) all = std::binary_search(cells[j].begin(), cells[j].end(), a);
      if (all) ++hits;
    }
    total *= hits;
    if (total == 0) break;
  }
  return total;
}

std::optional<CubeSet> ProductOracle::conflicts_within(const CubeSet& u, int n, std::size_t limit,
                                                       const Budget& budget) const {
  if (n < 1 || ambient_dim() % n != 0 || u.dim() != ambient_dim() / n)
    throw PreconditionError("conflicts_within: u does not match the oracle's factor dimension");
  const int d = u.dim();
  const int k = u.scale().exponent();
  const std::size_t cap = std::max<std::size_t>(4 * u.size() + 1024, std::size_t{1} << 20);
  std::vector<std::vector<Index>> lists(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) {
    std::vector<LineMembership> tests;
    for (int j = 0; j < d; ++j) tests.emplace_back(*lines_[static_cast<std::size_t>(b * d + j)], k, std::min(cap, budget.max_cubes));
    auto& out = lists[static_cast<std::size_t>(b)];
    for (std::size_t r = 0; r < u.size(); ++r) {
      auto row = u[r];
      bool ok = true;
      for (int j = 0; j < d && ok; ++j) ok = tests[static_cast<std::size_t>(j)](row[static_cast<std::size_t>(j)]);
      if (ok) out.insert(out.end(), row.begin(), row.end());
    }
  }
  std::vector<Index> found;
  std::size_t found_count = 0;
  bool overflow = false;
  VisitCounter vc{0, budget.max_visits};
  cartesian(lists, static_cast<std::size_t>(d), [&](IndexSpan t) {
    vc.tick();
    if (!is_strongly_non_diagonal(t, d, n)) return true;
    if (++found_count > limit) {
      overflow = true;
      return false;
    }
    found.insert(found.end(), t.begin(), t.end());
    return true;
  });
  if (overflow) return std::nullopt;
  // Each block list is ordered, so the odometer emits tuples in lexicographic order.
  return CubeSet::from_sorted_unique(ambient_dim(), u.scale(), std::move(found));
}

// ---------------------------------------------------------------- unions

namespace {
Soundness union_soundness(const std::vector<OraclePtr>& parts) {
  Soundness s = Soundness::exact;
  for (const auto& p : parts) s = weaker(s, p->soundness());
  return s;
}
double union_alpha(const std::vector<OraclePtr>& parts) {
  double a = 0.0;
  for (const auto& p : parts) a = std::max(a, p->declared_alpha());
  return a;
}
std::vector<OraclePtr> flatten(std::vector<OraclePtr> parts) {
  if (parts.empty()) throw PreconditionError("union of no oracles");
  std::vector<OraclePtr> out;
  for (auto& p : parts) {
    if (!p) throw PreconditionError("union: null component");
    if (p->ambient_dim() != parts.front()->ambient_dim()) throw PreconditionError("union: ambient dimensions differ");
    if (auto u = std::dynamic_pointer_cast<const UnionOracle>(p)) {
      out.insert(out.end(), u->parts().begin(), u->parts().end());
    } else if (!std::dynamic_pointer_cast<const EmptyOracle>(p)) {
      out.push_back(p);
    }
  }
  if (out.empty()) out.push_back(std::make_shared<EmptyOracle>(parts.front()->ambient_dim()));
  return out;
}
}  // namespace

UnionOracle::UnionOracle(std::vector<OraclePtr> parts)
    : PatternOracle(parts.empty() || !parts.front() ? 1 : parts.front()->ambient_dim(), union_alpha(flatten(parts)),
                    union_soundness(flatten(parts))),
      parts_(flatten(std::move(parts))) {}

std::string UnionOracle::describe() const {
  std::string s = "union(";
  for (std::size_t i = 0; i < parts_.size(); ++i) s += (i ? ", " : "") + parts_[i]->describe();
  return s + ")";
}

bool UnionOracle::meets(IndexSpan idx, int k, int target) const {
  for (const auto& p : parts_)
    if (p->meets(idx, k, target)) return true;
  return false;
}

CubeSet UnionOracle::enumerate(DyadicScale s, const Budget& budget) const {
  CubeSet acc(ambient_dim(), s);
  for (const auto& p : parts_) {
    acc = set_union(acc, p->enumerate(s, budget));
    if (acc.size() > budget.max_cubes) throw BudgetError("union cover exceeds cube budget");
  }
  return acc;
}

BigInt UnionOracle::count(DyadicScale s, const Budget& budget) const {
  std::vector<const ProductOracle*> products;
  std::vector<const PatternOracle*> others;
  for (const auto& p : parts_) {
    if (auto q = dynamic_cast<const ProductOracle*>(p.get()))
      products.push_back(q);
    else
      others.push_back(p.get());
  }
  if (products.size() > 20) throw BudgetError("too many product components for inclusion-exclusion");
  BigInt total = 0;
  const std::size_t m = products.size();
  for (std::size_t mask = 1; mask < (std::size_t{1} << m); ++mask) {
    std::vector<const ProductOracle*> sub;
    for (std::size_t i = 0; i < m; ++i)
      if (mask >> i & 1) sub.push_back(products[i]);
    BigInt c = ProductOracle::intersection_count(sub, s, budget);
    if (sub.size() % 2 == 1)
      total += c;
    else
      total -= c;
  }
  if (others.size() == 1 && total <= BigInt(static_cast<unsigned long>(budget.max_cubes))) {
    // one dense part with its own count; enumerate the thin product side
    CubeSet thin(ambient_dim(), s);
    for (const auto* p : products) thin = set_union(thin, p->enumerate(s, budget));
    std::uint64_t overlap = 0;
    for (std::size_t i = 0; i < thin.size(); ++i) overlap += others[0]->contains(thin[i], s.exponent());
    return total + others[0]->count(s, budget) - static_cast<unsigned long>(overlap);
  }
  if (!others.empty()) {
    CubeSet rest(ambient_dim(), s);
    for (const auto* o : others) rest = set_union(rest, o->enumerate(s, budget));
    for (std::size_t i = 0; i < rest.size(); ++i) {
      bool covered = false;
      for (const auto* p : products)
        if (p->contains(rest[i], s.exponent())) {
          covered = true;
          break;
        }
      if (!covered) total += 1;
    }
  }
  return total;
}

std::optional<CubeSet> UnionOracle::conflicts_within(const CubeSet& u, int n, std::size_t limit,
                                                     const Budget& budget) const {
  CubeSet acc(ambient_dim(), u.scale());
  for (const auto& p : parts_) {
    auto part = p->conflicts_within(u, n, limit, budget);
    if (!part) return std::nullopt;
    acc = set_union(acc, *part);
    if (acc.size() > limit) return std::nullopt;
  }
  return acc;
}

// ---------------------------------------------------------------- sumset

SumsetOracle::SumsetOracle(OraclePtr y, int d, double declared_alpha)
    : PatternOracle(2 * d, declared_alpha, Soundness::over_approx), y_(std::move(y)), d_(d) {
  if (!y_ || y_->ambient_dim() != d) throw ConfigError("sumset target set must live in dimension d");
}

std::string SumsetOracle::describe() const { return "sumset(" + y_->describe() + ")"; }

const CubeSet& SumsetOracle::target_cover(int target) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cover_cache_.find(target);
  if (it == cover_cache_.end())
    it = cover_cache_.emplace(target, std::make_shared<const CubeSet>(y_->enumerate(DyadicScale(target), Budget{}))).first;
  return *it->second;
}

bool SumsetOracle::in_sum_branch(IndexSpan idx, int k) const {
  const CubeSet& cover = target_cover(k);
  const std::size_t d = static_cast<std::size_t>(d_);
  const Index side = Index{1} << k;
  std::vector<Index> c(d);
  for (std::size_t o = 0; o < (std::size_t{1} << d); ++o) {
    bool in_range = true;
    for (std::size_t i = 0; i < d; ++i) {
      c[i] = idx[i] + idx[d + i] + static_cast<Index>((o >> i) & 1);
      in_range = in_range && c[i] < side;
    }
    if (in_range && cover.contains(c)) return true;
  }
  return false;
}

bool SumsetOracle::in_half_branch(IndexSpan idx, int k) const {
  const CubeSet& cover = target_cover(k);
  const std::size_t d = static_cast<std::size_t>(d_);
  std::vector<Index> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = 2 * idx[d + i];
    hi[i] = lo[i] + 1;
  }
  return any_in_box(cover, lo, hi);
}

bool SumsetOracle::meets(IndexSpan idx, int k, int target) const {
  if (k == target) return in_sum_branch(idx, k) || in_half_branch(idx, k);
  const CubeSet& cover = target_cover(target);
  const std::size_t d = static_cast<std::size_t>(d_);
  const int t = target - k;
  const Index top = (Index{1} << target) - 1;
  std::vector<Index> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = (idx[i] + idx[d + i]) << t;
    hi[i] = std::min(top, ((idx[i] + idx[d + i] + 2) << t) - 1);
  }
  if (any_in_box(cover, lo, hi)) return true;
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = (2 * idx[d + i]) << t;
    hi[i] = ((2 * idx[d + i] + 2) << t) - 1;
  }
  return any_in_box(cover, lo, hi);
}

// In one dimension the count has a closed form over the cover cells.
BigInt SumsetOracle::count(DyadicScale s, const Budget& budget) const {
  if (d_ != 1) return PatternOracle::count(s, budget);
  const CubeSet& cover = target_cover(s.exponent());
  const Index m = s.cells_per_axis();
  std::vector<Index> sums;  // sigma with sigma or sigma+1 in the cover
  for (Index c : cover.flat()) {
    if (c - 1 >= 0) sums.push_back(c - 1);
    if (c <= 2 * m - 2) sums.push_back(c);
  }
  std::sort(sums.begin(), sums.end());
  sums.erase(std::unique(sums.begin(), sums.end()), sums.end());
  std::vector<Index> halves;
  for (Index c : cover.flat()) halves.push_back(c >> 1);
  halves.erase(std::unique(halves.begin(), halves.end()), halves.end());

  BigInt z1 = 0;
  for (Index sg : sums) z1 += static_cast<unsigned long>(std::min(sg, 2 * m - 2 - sg) + 1);
  BigInt z2 = BigInt(static_cast<unsigned long>(halves.size())) * BigInt(static_cast<unsigned long>(m));
  BigInt overlap = 0;
  for (Index b : halves) {
    auto first = std::lower_bound(sums.begin(), sums.end(), b);
    auto last = std::upper_bound(sums.begin(), sums.end(), b + m - 1);
    overlap += static_cast<unsigned long>(last - first);
  }
  return z1 + z2 - overlap;
}

// ---------------------------------------------------------------- isosceles

namespace {
// Slack covering the evaluation error of descendants' midpoint enclosures.
constexpr double kAncestorSlack = 1e-12;
}

IsoscelesOracle::IsoscelesOracle(CurvePtr f, double declared_alpha)
    : PatternOracle(3, declared_alpha, Soundness::over_approx), f_(std::move(f)) {
  if (!f_) throw ConfigError("isosceles pattern needs a curve");
}

std::string IsoscelesOracle::describe() const { return "isosceles(" + f_->name() + ")"; }

bool IsoscelesOracle::meets(IndexSpan idx, int k, int target) const {
  const double h = std::ldexp(1.0, -k);
  const double lip = f_->lipschitz();
  const double extra = k < target ? kAncestorSlack : 0.0;
  const std::size_t m = static_cast<std::size_t>(f_->out_dim()) + 1;
  std::vector<Interval> p[3];
  for (int i = 0; i < 3; ++i) {
    const double a = static_cast<double>(idx[static_cast<std::size_t>(i)]);
    auto& pt = p[i];
    pt.reserve(m);
    pt.emplace_back(a * h, (a + 1.0) * h);
    for (const auto& v : f_->eval((a + 0.5) * h)) pt.push_back(v.inflate(lip * 0.5 * h + extra));
  }
  for (int c = 0; c < 3; ++c) {
    const int a = (c + 1) % 3, b = (c + 2) % 3;
    Interval acc = Interval::point(0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const Interval twice_c(2.0 * p[c][j].lo, 2.0 * p[c][j].hi);
      acc = acc + (p[a][j] - p[b][j]) * (p[a][j] + p[b][j] - twice_c);
    }
    if (acc.contains_zero()) return true;
  }
  return false;
}

BigInt IsoscelesOracle::count(DyadicScale s, const Budget& budget) const {
  const int target = s.exponent();
  std::vector<std::array<Index, 3>> stack{{0, 0, 0}};
  std::vector<int> level{0};
  VisitCounter vc{0, budget.max_visits};
  std::uint64_t total = 0;
  while (!level.empty()) {
    const int j = level.back();
    level.pop_back();
    const auto node = stack.back();
    stack.pop_back();
    vc.tick();
    if (!meets(node, j, target)) continue;
    if (j == target) {
      const bool ab = node[0] == node[1], bc = node[1] == node[2];
      total += ab && bc ? 1 : (ab || bc ? 3 : 6);
      continue;
    }
    for (unsigned c = 0; c < 8; ++c) {
      const std::array<Index, 3> child{2 * node[0] + ((c >> 2) & 1), 2 * node[1] + ((c >> 1) & 1), 2 * node[2] + (c & 1)};
      if (child[0] > child[1] || child[1] > child[2]) continue;
      stack.push_back(child);
      level.push_back(j + 1);
    }
  }
  return BigInt(static_cast<unsigned long>(total));
}

// ---------------------------------------------------------------- factories

DilatedOracle::DilatedOracle(OraclePtr inner)
    : PatternOracle(inner ? inner->ambient_dim() : 1, inner ? inner->declared_alpha() : 0.0, Soundness::over_approx),
      inner_(std::move(inner)) {
  if (!inner_) throw PreconditionError("DilatedOracle: null inner pattern");
}

std::string DilatedOracle::describe() const { return "dilate(" + inner_->describe() + ")"; }

const CubeSet& DilatedOracle::cover(int k) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = cache_.find(k);
  if (it != cache_.end()) return *it->second;
  const CubeSet base = inner_->enumerate(DyadicScale(k), Budget{});
  const std::size_t d = static_cast<std::size_t>(ambient_dim());
  const Index side = Index{1} << k;
  std::size_t nbrs = 1;
  for (std::size_t i = 0; i < d; ++i) nbrs *= 3;
  std::vector<Index> flat, c(d);
  for (std::size_t i = 0; i < base.size(); ++i) {
    auto r = base[i];
    for (std::size_t o = 0; o < nbrs; ++o) {
      bool ok = true;
      for (std::size_t j = 0, q = o; j < d; ++j, q /= 3) {
        c[j] = r[j] + static_cast<Index>(q % 3) - 1;
        ok = ok && c[j] >= 0 && c[j] < side;
      }
      if (ok) flat.insert(flat.end(), c.begin(), c.end());
    }
  }
  auto set = std::make_shared<const CubeSet>(CubeSet::from_unsorted(ambient_dim(), DyadicScale(k), std::move(flat)));
  return *cache_.emplace(k, std::move(set)).first->second;
}

bool DilatedOracle::meets(IndexSpan idx, int k, int target) const {
  const std::size_t d = idx.size();
  const int t = target - k;
  std::vector<Index> lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = idx[i] << t;
    hi[i] = ((idx[i] + 1) << t) - 1;
  }
  return any_in_box(cover(target), lo, hi);
}

CubeSet DilatedOracle::enumerate(DyadicScale s, const Budget& budget) const {
  const CubeSet& c = cover(s.exponent());
  if (c.size() > budget.max_cubes) throw BudgetError("dilated cover exceeds cube budget");
  return c;
}

BigInt DilatedOracle::count(DyadicScale s, const Budget&) const {
  return BigInt(static_cast<unsigned long>(cover(s.exponent()).size()));
}

OraclePtr hyperplane_augmentation(int d, int n) {
  if (d < 1 || n < 1 || d * n > kMaxDim) throw PreconditionError("hyperplane_augmentation: bad d or n");
  std::vector<LineSetPtr> lines;
  for (int i = 0; i < d * n; ++i) {
    if (i < d)
      lines.push_back(std::make_shared<FullLine>());
    else
      lines.push_back(std::make_shared<PointLine>(0.0));
  }
  return std::make_shared<ProductOracle>(std::move(lines), static_cast<double>(d));
}

OraclePtr union_oracle(OraclePtr a, OraclePtr b) {
  return std::make_shared<UnionOracle>(std::vector<OraclePtr>{std::move(a), std::move(b)});
}

OraclePtr sumset_pattern(OraclePtr y, int d) {
  if (!y) throw ConfigError("sumset_pattern: missing target set");
  return std::make_shared<SumsetOracle>(y, d, static_cast<double>(d) + y->declared_alpha());
}

OraclePtr isosceles_pattern(CurvePtr rescaled, int space_dim) {
  if (!rescaled) throw ConfigError("isosceles_pattern: missing curve");
  if (space_dim < 2) throw ConfigError("isosceles_pattern: the curve must live in R^n with n >= 2");
  if (rescaled->out_dim() != space_dim - 1) throw ConfigError("isosceles_pattern: curve dimension does not match n - 1");
  return std::make_shared<IsoscelesOracle>(std::move(rescaled), 2.0);
}

// ---------------------------------------------------------------- estimates

MinkowskiEstimate minkowski_estimate(const PatternOracle& o, const std::vector<DyadicScale>& scales,
                                     const Budget& budget) {
  if (scales.size() < 2) throw PreconditionError("minkowski_estimate needs at least two scales");
  for (std::size_t i = 1; i < scales.size(); ++i)
    if (scales[i] <= scales[i - 1]) throw PreconditionError("minkowski_estimate: scales must strictly decrease");
  MinkowskiEstimate e;
  std::vector<double> xs, ys;
  for (auto s : scales) {
    BigInt c = o.count(s, budget);
    if (c == 0) throw PreconditionError("minkowski_estimate: zero count at k=" + std::to_string(s.exponent()) +
                                        ", log undefined");
    const double lc = log2_big(c);
    e.exponents.push_back(s.exponent());
    e.counts.push_back(c);
    e.per_scale.push_back(s.exponent() > 0 ? lc / s.exponent() : std::nan(""));
    xs.push_back(static_cast<double>(s.exponent()));
    ys.push_back(lc);
  }
  for (std::size_t i = 1; i < xs.size(); ++i) e.pairwise.push_back((ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]));
  e.slope = fit_line(xs, ys).slope;
  e.min_pairwise = *std::min_element(e.pairwise.begin(), e.pairwise.end());
  return e;
}

CubeSet trivial_projection_complement(const PatternOracle& z, int d, int n, DyadicScale s, const Budget& budget) {
  if (d < 1 || n < 1 || z.ambient_dim() != d * n) throw PreconditionError("trivial_projection_complement: bad d or n");
  CubeSet cover = z.enumerate(s, budget);
  std::vector<Index> first;
  first.reserve(cover.size() * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < cover.size(); ++i) first.insert(first.end(), cover[i].begin(), cover[i].begin() + d);
  CubeSet shadow = CubeSet::from_unsorted(d, s, std::move(first));
  return set_difference(CubeSet::full_grid(d, s, budget.max_cubes), shadow);
}

}  // namespace pavoid
