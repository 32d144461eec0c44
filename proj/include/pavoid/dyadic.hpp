#ifndef PAVOID_DYADIC_HPP
#define PAVOID_DYADIC_HPP

// Exact half-open dyadic cubes and sorted cube sets.
//
// A cube of dimension `dim` at scale 2^-k is the product of intervals
// [a_i 2^-k, (a_i + 1) 2^-k). Everything is integer arithmetic; the
// exponent is capped at kMaxExponent so that indices fit in 64 bits.

#include "pavoid/numeric.hpp"

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace pavoid {

inline constexpr int kMaxExponent = 60;
inline constexpr int kMaxDim = 16;

using Index = std::int64_t;
using IndexSpan = std::span<const Index>;

class DyadicScale {
 public:
  constexpr DyadicScale() = default;
  explicit DyadicScale(int exponent);

  constexpr int exponent() const { return exponent_; }
  /// Sidelength 2^-k, for reporting only.
  double length() const;
  /// Number of cells per axis, 2^k.
  Index cells_per_axis() const { return Index{1} << exponent_; }

  DyadicScale finer(int steps = 1) const { return DyadicScale(exponent_ + steps); }

  // Finer scale = larger exponent; ordering is by exponent.
  friend constexpr auto operator<=>(DyadicScale, DyadicScale) = default;

 private:
  int exponent_ = 0;
};

struct Cube {
  DyadicScale scale;
  std::vector<Index> index;

  int dim() const { return static_cast<int>(index.size()); }
  friend bool operator==(const Cube&, const Cube&) = default;
};

/// Duplicate-free, lexicographically ordered set of cubes sharing dim and scale.
/// Storage is a flat row-major array of size() * dim() indices.
class CubeSet {
 public:
  CubeSet() = default;
  CubeSet(int dim, DyadicScale scale);

  /// Sorts and deduplicates `flat` (row-major, dim entries per cube).
  static CubeSet from_unsorted(int dim, DyadicScale scale, std::vector<Index> flat);
  /// Adopts `flat` as-is; caller guarantees order and uniqueness.
  static CubeSet from_sorted_unique(int dim, DyadicScale scale, std::vector<Index> flat);
  /// Every cube of [0,1)^dim at the given scale.
  static CubeSet full_grid(int dim, DyadicScale scale, std::size_t budget);

  int dim() const { return dim_; }
  DyadicScale scale() const { return scale_; }
  std::size_t size() const { return dim_ == 0 ? 0 : flat_.size() / static_cast<std::size_t>(dim_); }
  bool empty() const { return flat_.empty(); }

  IndexSpan operator[](std::size_t i) const {
    return IndexSpan(flat_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_));
  }
  Cube cube(std::size_t i) const;
  const std::vector<Index>& flat() const { return flat_; }

  bool contains(IndexSpan idx) const;
  /// Position of idx, or size() when absent.
  std::size_t find(IndexSpan idx) const;
  /// Inserts keeping order; O(size) per insert.
  bool insert(IndexSpan idx);

  friend bool operator==(const CubeSet&, const CubeSet&) = default;

 private:
  int dim_ = 0;
  DyadicScale scale_;
  std::vector<Index> flat_;
};

/// Lexicographic three-way comparison of equal-length index vectors.
int compare_index(IndexSpan a, IndexSpan b);

Cube parent(const Cube& c, DyadicScale coarser);
CubeSet children(const Cube& c, DyadicScale finer, std::size_t budget = std::size_t{1} << 26);
std::vector<Cube> product_decompose(const Cube& c, int d, int n);
Cube product_compose(const std::vector<Cube>& factors);
bool is_strongly_non_diagonal(IndexSpan idx, int d, int n);
inline bool is_strongly_non_diagonal(const Cube& c, int d, int n) {
  return is_strongly_non_diagonal(IndexSpan(c.index), d, n);
}
BigInt cover_count(const CubeSet& s);

/// Writes the ancestor of idx (at exponent k) at exponent k_coarse into out.
inline void ancestor_into(IndexSpan idx, int k, int k_coarse, Index* out) {
  const int shift = k - k_coarse;
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = idx[i] >> shift;
}

/// Union, intersection and difference of sets with equal dim and scale.
CubeSet set_union(const CubeSet& a, const CubeSet& b);
CubeSet set_intersection(const CubeSet& a, const CubeSet& b);
CubeSet set_difference(const CubeSet& a, const CubeSet& b);

/// Re-expresses every cube of s at a finer scale (all descendants).
CubeSet refine(const CubeSet& s, DyadicScale finer, std::size_t budget);
/// Ancestors of the cubes of s at a coarser scale.
CubeSet coarsen(const CubeSet& s, DyadicScale coarser);

}  // namespace pavoid

#endif
