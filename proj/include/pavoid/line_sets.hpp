#ifndef PAVOID_LINE_SETS_HPP
#define PAVOID_LINE_SETS_HPP

// One-dimensional building blocks for product patterns: the whole interval,
// a single point, and dyadic over-covers of self-similar Cantor sets.

#include "pavoid/dyadic.hpp"

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace pavoid {

class LineSet {
 public:
  virtual ~LineSet() = default;

  virtual bool exact() const = 0;
  virtual bool is_full() const { return false; }
  virtual std::string describe() const = 0;

  /// Cell a at exponent k. Returns true when some cell below it at exponent
  /// target is in the cover at that exponent; for k == target this is the
  /// membership test itself.
  virtual bool meets(Index a, int k, int target) const = 0;

  /// Sorted cover cells at exponent k.
  virtual std::vector<Index> enumerate(int k, std::size_t budget) const;
  virtual BigInt count(int k, std::size_t budget) const;
};

using LineSetPtr = std::shared_ptr<const LineSet>;

class FullLine final : public LineSet {
 public:
  bool exact() const override { return true; }
  bool is_full() const override { return true; }
  std::string describe() const override { return "full"; }
  bool meets(Index, int, int) const override { return true; }
  std::vector<Index> enumerate(int k, std::size_t budget) const override;
  BigInt count(int k, std::size_t budget) const override;
};

/// A single point p in [0,1).
class PointLine final : public LineSet {
 public:
  explicit PointLine(double p);
  bool exact() const override { return true; }
  std::string describe() const override;
  bool meets(Index a, int k, int target) const override;
  std::vector<Index> enumerate(int k, std::size_t budget) const override;
  BigInt count(int k, std::size_t budget) const override;
  double point() const { return p_; }

 private:
  double p_;
};

/// Cantor set with the given base and digit set. At exponent k the cover is
/// every dyadic cell meeting the generation-m approximant, with m the least
/// generation whose intervals are no longer than 2^-k.
class CantorLine final : public LineSet {
 public:
  CantorLine(int base, std::vector<int> digits);
  bool exact() const override { return false; }
  std::string describe() const override;
  bool meets(Index a, int k, int target) const override;
  std::vector<Index> enumerate(int k, std::size_t budget) const override;
  BigInt count(int k, std::size_t budget) const override;

  int base() const { return base_; }
  const std::vector<int>& digits() const { return digits_; }
  int generation(int target) const { return generation_.at(static_cast<std::size_t>(target)); }
  /// Similarity dimension log(#digits)/log(base).
  double dimension() const;

 private:
  bool meets_rec(__int128 lo, __int128 hi, __int128 unit, int depth) const;

  int base_;
  std::vector<int> digits_;
  std::array<int, kMaxExponent + 1> generation_{};
  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<const std::vector<Index>>> cache_;
};

}  // namespace pavoid

#endif
