#include "pavoid/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pavoid {

DyadicScale::DyadicScale(int exponent) : exponent_(exponent) {
  if (exponent < 0 || exponent > kMaxExponent)
    throw PreconditionError("dyadic exponent " + std::to_string(exponent) + " outside [0, " +
                            std::to_string(kMaxExponent) + "]");
}

double DyadicScale::length() const { return std::ldexp(1.0, -exponent_); }

int compare_index(IndexSpan a, IndexSpan b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return -1;
    if (a[i] > b[i]) return 1;
  }
  return 0;
}

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) throw PreconditionError("cube dimension out of range: " + std::to_string(dim));
}

std::vector<Index> sort_unique_rows(int dim, std::vector<Index> flat) {
  if (dim == 1) {
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    return flat;
  }
  const std::size_t d = static_cast<std::size_t>(dim);
  const std::size_t rows = flat.size() / d;
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto row = [&](std::size_t r) { return IndexSpan(flat.data() + r * d, d); };
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return compare_index(row(a), row(b)) < 0; });
  std::vector<Index> out;
  out.reserve(flat.size());
  for (std::size_t i = 0; i < rows; ++i) {
    auto r = row(order[i]);
    if (i > 0 && compare_index(r, row(order[i - 1])) == 0) continue;
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

}  // namespace

CubeSet::CubeSet(int dim, DyadicScale scale) : dim_(dim), scale_(scale) { check_dim(dim); }

CubeSet CubeSet::from_unsorted(int dim, DyadicScale scale, std::vector<Index> flat) {
  check_dim(dim);
  if (flat.size() % static_cast<std::size_t>(dim) != 0)
    throw PreconditionError("flat index array is not a multiple of dim");
  CubeSet s(dim, scale);
  s.flat_ = sort_unique_rows(dim, std::move(flat));
  return s;
}

CubeSet CubeSet::from_sorted_unique(int dim, DyadicScale scale, std::vector<Index> flat) {
  check_dim(dim);
  CubeSet s(dim, scale);
  s.flat_ = std::move(flat);
  return s;
}

CubeSet CubeSet::full_grid(int dim, DyadicScale scale, std::size_t budget) {
  check_dim(dim);
  const int bits = dim * scale.exponent();
  if (bits >= 63 || (std::size_t{1} << bits) > budget)
    throw BudgetError("full grid of 2^" + std::to_string(bits) + " cubes exceeds budget");
  const std::size_t count = std::size_t{1} << bits;
  const Index side = scale.cells_per_axis();
  std::vector<Index> flat(count * static_cast<std::size_t>(dim));
  std::vector<Index> cur(static_cast<std::size_t>(dim), 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::copy(cur.begin(), cur.end(), flat.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(dim)));
    for (int j = dim - 1; j >= 0; --j) {
      if (++cur[static_cast<std::size_t>(j)] < side) break;
      cur[static_cast<std::size_t>(j)] = 0;
    }
  }
  return from_sorted_unique(dim, scale, std::move(flat));
}

Cube CubeSet::cube(std::size_t i) const {
  auto r = (*this)[i];
  return Cube{scale_, std::vector<Index>(r.begin(), r.end())};
}

std::size_t CubeSet::find(IndexSpan idx) const {
  if (static_cast<int>(idx.size()) != dim_) return size();
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    int c = compare_index((*this)[mid], idx);
    if (c == 0) return mid;
    if (c < 0)
      lo = mid + 1;
    else
      hi = mid;
  }
  return size();
}

bool CubeSet::contains(IndexSpan idx) const { return find(idx) != size(); }

bool CubeSet::insert(IndexSpan idx) {
  if (static_cast<int>(idx.size()) != dim_) throw PreconditionError("insert: dimension mismatch");
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    int c = compare_index((*this)[mid], idx);
    if (c == 0) return false;
    if (c < 0)
      lo = mid + 1;
    else
      hi = mid;
  }
  flat_.insert(flat_.begin() + static_cast<std::ptrdiff_t>(lo * static_cast<std::size_t>(dim_)), idx.begin(),
               idx.end());
  return true;
}

Cube parent(const Cube& c, DyadicScale coarser) {
  if (coarser > c.scale) throw PreconditionError("parent: requested scale is finer than the cube");
  Cube p{coarser, std::vector<Index>(c.index.size())};
  ancestor_into(c.index, c.scale.exponent(), coarser.exponent(), p.index.data());
  return p;
}

CubeSet children(const Cube& c, DyadicScale finer, std::size_t budget) {
  if (finer < c.scale) throw PreconditionError("children: requested scale is coarser than the cube");
  const int dim = c.dim();
  const int steps = finer.exponent() - c.scale.exponent();
  const int bits = dim * steps;
  if (bits >= 63 || (std::size_t{1} << bits) > budget)
    throw BudgetError("children: 2^" + std::to_string(bits) + " cubes exceeds budget");
  const std::size_t count = std::size_t{1} << bits;
  const Index side = Index{1} << steps;
  std::vector<Index> flat;
  flat.reserve(count * static_cast<std::size_t>(dim));
  std::vector<Index> off(static_cast<std::size_t>(dim), 0);
  for (std::size_t i = 0; i < count; ++i) {
    for (int j = 0; j < dim; ++j)
      flat.push_back((c.index[static_cast<std::size_t>(j)] << steps) + off[static_cast<std::size_t>(j)]);
    for (int j = dim - 1; j >= 0; --j) {
      if (++off[static_cast<std::size_t>(j)] < side) break;
      off[static_cast<std::size_t>(j)] = 0;
    }
  }
  return CubeSet::from_sorted_unique(dim, finer, std::move(flat));
}

std::vector<Cube> product_decompose(const Cube& c, int d, int n) {
  if (d < 1 || n < 1 || c.dim() != d * n)
    throw PreconditionError("product_decompose: cube dimension is not d*n");
  std::vector<Cube> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto first = c.index.begin() + static_cast<std::ptrdiff_t>(i * d);
    out.push_back(Cube{c.scale, std::vector<Index>(first, first + d)});
  }
  return out;
}

Cube product_compose(const std::vector<Cube>& factors) {
  if (factors.empty()) throw PreconditionError("product_compose: no factors");
  Cube out{factors.front().scale, {}};
  for (const auto& f : factors) {
    if (f.scale != out.scale || f.dim() != factors.front().dim())
      throw PreconditionError("product_compose: factors disagree in scale or dim");
    out.index.insert(out.index.end(), f.index.begin(), f.index.end());
  }
  return out;
}

bool is_strongly_non_diagonal(IndexSpan idx, int d, int n) {
  if (static_cast<int>(idx.size()) != d * n) throw PreconditionError("is_strongly_non_diagonal: dim is not d*n");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::equal(idx.begin() + i * d, idx.begin() + (i + 1) * d, idx.begin() + j * d)) return false;
  return true;
}

BigInt cover_count(const CubeSet& s) {
  return BigInt(static_cast<unsigned long>(s.size()));
}

namespace {
void check_compatible(const CubeSet& a, const CubeSet& b) {
  if (a.dim() != b.dim() || a.scale() != b.scale())
    throw PreconditionError("cube sets disagree in dim or scale");
}
}  // namespace

CubeSet set_union(const CubeSet& a, const CubeSet& b) {
  check_compatible(a, b);
  std::vector<Index> out;
  out.reserve(a.flat().size() + b.flat().size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    int c = i == a.size() ? 1 : j == b.size() ? -1 : compare_index(a[i], b[j]);
    IndexSpan r = c <= 0 ? a[i] : b[j];
    out.insert(out.end(), r.begin(), r.end());
    if (c <= 0) ++i;
    if (c >= 0) ++j;
  }
  return CubeSet::from_sorted_unique(a.dim(), a.scale(), std::move(out));
}

CubeSet set_intersection(const CubeSet& a, const CubeSet& b) {
  check_compatible(a, b);
  std::vector<Index> out;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    int c = compare_index(a[i], b[j]);
    if (c == 0) {
      out.insert(out.end(), a[i].begin(), a[i].end());
      ++i;
      ++j;
    } else if (c < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  return CubeSet::from_sorted_unique(a.dim(), a.scale(), std::move(out));
}

CubeSet set_difference(const CubeSet& a, const CubeSet& b) {
  check_compatible(a, b);
  std::vector<Index> out;
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    while (j < b.size() && compare_index(b[j], a[i]) < 0) ++j;
    if (j < b.size() && compare_index(b[j], a[i]) == 0) continue;
    out.insert(out.end(), a[i].begin(), a[i].end());
  }
  return CubeSet::from_sorted_unique(a.dim(), a.scale(), std::move(out));
}

CubeSet refine(const CubeSet& s, DyadicScale finer, std::size_t budget) {
  if (finer < s.scale()) throw PreconditionError("refine: target scale is coarser");
  const int bits = s.dim() * (finer.exponent() - s.scale().exponent());
  if (bits >= 63 || s.size() > (budget >> std::min(bits, 62)))
    throw BudgetError("refine: result exceeds budget");
  std::vector<Index> flat;
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto ch = children(s.cube(i), finer, budget);
    flat.insert(flat.end(), ch.flat().begin(), ch.flat().end());
  }
  // Children of lexicographically ordered parents are ordered only when dim == 1.
  if (s.dim() == 1) return CubeSet::from_sorted_unique(1, finer, std::move(flat));
  return CubeSet::from_unsorted(s.dim(), finer, std::move(flat));
}

CubeSet coarsen(const CubeSet& s, DyadicScale coarser) {
  if (coarser > s.scale()) throw PreconditionError("coarsen: target scale is finer");
  std::vector<Index> flat(s.flat().size());
  const std::size_t d = static_cast<std::size_t>(s.dim());
  for (std::size_t i = 0; i < s.size(); ++i)
    ancestor_into(s[i], s.scale().exponent(), coarser.exponent(), flat.data() + i * d);
  return CubeSet::from_unsorted(s.dim(), coarser, std::move(flat));
}

}  // namespace pavoid
