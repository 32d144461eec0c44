#ifndef PAVOID_AVOIDER_HPP
#define PAVOID_AVOIDER_HPP

// One application of the single-scale avoidance step: from E (a union of
// l-cubes in [0,1)^d) and G (s-cubes in [0,1)^{dn}) pick an intermediate
// scale r and a set F of s-cubes with at most one cube per r-cell, at least
// half of the r-cells of each E cube occupied, and no strongly non-diagonal
// cube of G with all n factors in F.

#include "pavoid/dyadic.hpp"
#include "pavoid/oracle.hpp"

#include <memory>
#include <optional>

namespace pavoid {

/// The cube set G, either held explicitly or produced on demand by an oracle.
class PatternCover {
 public:
  virtual ~PatternCover() = default;
  virtual int dim() const = 0;
  virtual DyadicScale scale() const = 0;
  virtual BigInt count() const = 0;
  virtual bool contains(IndexSpan idx) const = 0;
  /// Strongly non-diagonal members with every factor in u; nullopt when more than `limit`.
  virtual std::optional<CubeSet> conflicts_within(const CubeSet& u, int n, std::size_t limit) const = 0;
};

using CoverPtr = std::shared_ptr<const PatternCover>;

class ExplicitCover final : public PatternCover {
 public:
  explicit ExplicitCover(CubeSet g) : g_(std::move(g)) {}
  int dim() const override { return g_.dim(); }
  DyadicScale scale() const override { return g_.scale(); }
  BigInt count() const override { return cover_count(g_); }
  bool contains(IndexSpan idx) const override { return g_.contains(idx); }
  std::optional<CubeSet> conflicts_within(const CubeSet& u, int n, std::size_t limit) const override;
  const CubeSet& cubes() const { return g_; }

 private:
  CubeSet g_;
};

class OracleCover final : public PatternCover {
 public:
  /// The count is taken once here; a precomputed value may be supplied.
  OracleCover(OraclePtr oracle, DyadicScale s, Budget budget, std::optional<BigInt> known_count = std::nullopt);
  int dim() const override { return oracle_->ambient_dim(); }
  DyadicScale scale() const override { return s_; }
  BigInt count() const override { return count_; }
  bool contains(IndexSpan idx) const override { return oracle_->contains(idx, s_.exponent()); }
  std::optional<CubeSet> conflicts_within(const CubeSet& u, int n, std::size_t limit) const override;
  const OraclePtr& oracle() const { return oracle_; }

 private:
  OraclePtr oracle_;
  DyadicScale s_;
  Budget budget_;
  BigInt count_;
};

struct AvoidanceInstance {
  int d = 1;
  int n = 2;
  DyadicScale l;
  DyadicScale s;
  CubeSet E;
  CoverPtr G;

  void validate() const;
};

struct PropertyReport {
  bool avoidance = false;
  bool non_concentration = false;
  bool large_size = false;
  bool inside_e = false;
  std::size_t worst_cell_count = 0;      // max F cubes in one r-cube
  std::size_t min_per_parent = 0;        // min F cubes in one E cube
  std::vector<Index> offending;          // first conflict found, if any

  bool all() const { return avoidance && non_concentration && large_size && inside_e; }
};

struct AvoidanceResult {
  DyadicScale r;
  CubeSet F;
  std::size_t conflicts = 0;  // #K of the accepted draw
  int attempts = 0;
  std::uint64_t seed = 0;     // per-draw seed that produced the accepted U
  PropertyReport report;
};

bool check_hypothesis(const AvoidanceInstance& inst);
/// Exponent m of the intermediate scale r = 2^-m.
DyadicScale compute_intermediate_scale(const AvoidanceInstance& inst);
/// Same rule from the raw quantities; no hypothesis check.
DyadicScale intermediate_scale_for(int d, int n, DyadicScale l, DyadicScale s, const BigInt& count);
/// floor((l/r)^d / 2).
std::size_t conflict_threshold(int d, DyadicScale l, DyadicScale r);

CubeSet random_select(const AvoidanceInstance& inst, DyadicScale r, std::uint64_t seed,
                      std::size_t budget = std::size_t{1} << 27);
CubeSet collect_conflicts(const CubeSet& u, const CubeSet& g, int d, int n);
CubeSet prune(const CubeSet& u, const CubeSet& k, int d, int n);

/// Seed of draw `attempt` derived from the base seed.
std::uint64_t attempt_seed(std::uint64_t base, int attempt);

AvoidanceResult avoid_single_scale(const AvoidanceInstance& inst, std::uint64_t seed, int max_attempts = 64);

PropertyReport verify_properties(const CubeSet& E, const PatternCover& G, const CubeSet& F, DyadicScale l,
                                 DyadicScale s, DyadicScale r, int d, int n);

}  // namespace pavoid

#endif
