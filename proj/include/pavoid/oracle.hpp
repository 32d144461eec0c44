#ifndef PAVOID_ORACLE_HPP
#define PAVOID_ORACLE_HPP

// Cube-covering oracles for pattern components Z in [0,1)^{dn}.
//
// An oracle answers one question: does the cube `idx` at exponent k meet the
// cover of the pattern at exponent target >= k? At k == target that is the
// membership test for the cover; at coarser k the answer may only err towards
// true. Enumeration, counting and restriction to U^n are all driven by this
// test through a pruned depth-first descent, and subclasses override them
// where structure gives something faster.

#include "pavoid/curves.hpp"
#include "pavoid/dyadic.hpp"
#include "pavoid/line_sets.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace pavoid {

enum class Soundness { exact, over_approx };

inline Soundness weaker(Soundness a, Soundness b) {
  return (a == Soundness::exact && b == Soundness::exact) ? Soundness::exact : Soundness::over_approx;
}
const char* to_string(Soundness s);

struct Budget {
  std::size_t max_cubes = std::size_t{1} << 26;
  std::uint64_t max_visits = std::uint64_t{1} << 32;
};

class PatternOracle {
 public:
  PatternOracle(int ambient_dim, double declared_alpha, Soundness soundness);
  virtual ~PatternOracle() = default;

  int ambient_dim() const { return ambient_dim_; }
  double declared_alpha() const { return alpha_; }
  Soundness soundness() const { return soundness_; }
  virtual std::string describe() const = 0;

  virtual bool meets(IndexSpan idx, int k, int target) const = 0;
  bool contains(IndexSpan idx, int k) const { return meets(idx, k, k); }

  virtual CubeSet enumerate(DyadicScale s, const Budget& budget) const;
  virtual BigInt count(DyadicScale s, const Budget& budget) const;

  /// Strongly non-diagonal cover cubes at u's scale whose n factors all lie
  /// in u (dim ambient/n). Returns nullopt once more than `limit` are found.
  virtual std::optional<CubeSet> conflicts_within(const CubeSet& u, int n, std::size_t limit,
                                                  const Budget& budget) const;

  struct ConflictScan {
    CubeSet found;
    bool truncated = false;  // stopped after limit + 1 finds
  };
  /// The plain pruned descent behind the default conflicts_within, never
  /// overridden; verifiers use it as a second code path.
  ConflictScan descend_conflicts(const CubeSet& u, int n, std::size_t limit, const Budget& budget) const;

 private:
  int ambient_dim_;
  double alpha_;
  Soundness soundness_;
};

using OraclePtr = std::shared_ptr<const PatternOracle>;

/// Components sharing d and n.
struct PatternFamily {
  int d = 1;
  int n = 2;
  std::vector<OraclePtr> components;

  void validate() const;
};

class EmptyOracle final : public PatternOracle {
 public:
  explicit EmptyOracle(int ambient_dim) : PatternOracle(ambient_dim, 0.0, Soundness::exact) {}
  std::string describe() const override { return "empty"; }
  bool meets(IndexSpan, int, int) const override { return false; }
  CubeSet enumerate(DyadicScale s, const Budget&) const override { return CubeSet(ambient_dim(), s); }
  BigInt count(DyadicScale, const Budget&) const override { return 0; }
  std::optional<CubeSet> conflicts_within(const CubeSet& u, int, std::size_t, const Budget&) const override {
    return CubeSet(ambient_dim(), u.scale());
  }
};

/// Finite set of points, each a vector of ambient_dim coordinates in [0,1).
class PointCloudOracle final : public PatternOracle {
 public:
  PointCloudOracle(int ambient_dim, std::vector<std::vector<double>> points, double declared_alpha = 0.0);
  std::string describe() const override;
  bool meets(IndexSpan idx, int k, int target) const override;
  CubeSet enumerate(DyadicScale s, const Budget& budget) const override;
  BigInt count(DyadicScale s, const Budget& budget) const override;

 private:
  std::vector<std::vector<double>> points_;
};

/// {x in [0,1)^D : sum_i c_i x_i + c_0 = 0} with rational coefficients.
/// The half-open cube test is exact.
class LinearZeroSetOracle final : public PatternOracle {
 public:
  LinearZeroSetOracle(std::vector<Rational> coefficients, Rational constant, double declared_alpha);
  std::string describe() const override;
  bool meets(IndexSpan idx, int k, int target) const override;

 private:
  std::vector<Rational> coef_;
  Rational constant_;
};

/// Product of one line set per coordinate.
class ProductOracle final : public PatternOracle {
 public:
  ProductOracle(std::vector<LineSetPtr> lines, double declared_alpha);
  std::string describe() const override;
  bool meets(IndexSpan idx, int k, int target) const override;
  CubeSet enumerate(DyadicScale s, const Budget& budget) const override;
  BigInt count(DyadicScale s, const Budget& budget) const override;
  std::optional<CubeSet> conflicts_within(const CubeSet& u, int n, std::size_t limit,
                                          const Budget& budget) const override;

  const std::vector<LineSetPtr>& lines() const { return lines_; }

  /// Cover count of the intersection of several products.
  static BigInt intersection_count(const std::vector<const ProductOracle*>& parts, DyadicScale s,
                                   const Budget& budget);

 private:
  std::vector<LineSetPtr> lines_;
};

class UnionOracle final : public PatternOracle {
 public:
  explicit UnionOracle(std::vector<OraclePtr> parts);
  std::string describe() const override;
  bool meets(IndexSpan idx, int k, int target) const override;
  CubeSet enumerate(DyadicScale s, const Budget& budget) const override;
  BigInt count(DyadicScale s, const Budget& budget) const override;
  std::optional<CubeSet> conflicts_within(const CubeSet& u, int n, std::size_t limit,
                                          const Budget& budget) const override;

  const std::vector<OraclePtr>& parts() const { return parts_; }

 private:
  std::vector<OraclePtr> parts_;
};

/// Z1 = {(x,y): x + y in Y} and Z2 = {(x,y): y in Y/2} over Y's cover at the
/// query scale. A cube (I,J) is in the Z1 cover when the sum box I+J meets a
/// cover cell of Y, and in the Z2 cover when J meets a halved cover cell.
class SumsetOracle final : public PatternOracle {
 public:
  SumsetOracle(OraclePtr y, int d, double declared_alpha);
  std::string describe() const override;
  bool meets(IndexSpan idx, int k, int target) const override;
  BigInt count(DyadicScale s, const Budget& budget) const override;

  bool in_sum_branch(IndexSpan idx, int k) const;
  bool in_half_branch(IndexSpan idx, int k) const;
  const CubeSet& target_cover(int target) const;

 private:
  OraclePtr y_;
  int d_;
  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<const CubeSet>> cover_cache_;
};

/// Triples (x1,x2,x3) whose graph points (x_i, f(x_i)) contain an isosceles
/// triangle, for a curve f already rescaled to be 1/10-Lipschitz. The cover
/// test encloses each graph point over its cell and checks whether zero lies
/// in an enclosure of |p_a - p_c|^2 - |p_b - p_c|^2 for some apex c.
class IsoscelesOracle final : public PatternOracle {
 public:
  IsoscelesOracle(CurvePtr f, double declared_alpha);
  std::string describe() const override;
  bool meets(IndexSpan idx, int k, int target) const override;
  /// The cover test is symmetric in the three factors; counts weakly
  /// increasing triples and weights them.
  BigInt count(DyadicScale s, const Budget& budget) const override;
  const CurvePtr& curve() const { return f_; }

 private:
  CurvePtr f_;
};

/// The inner cover grown by one cell in every direction, at every scale.
/// Still a cover of the same set, with a margin of one cell.
class DilatedOracle final : public PatternOracle {
 public:
  explicit DilatedOracle(OraclePtr inner);
  std::string describe() const override;
  bool meets(IndexSpan idx, int k, int target) const override;
  CubeSet enumerate(DyadicScale s, const Budget& budget) const override;
  BigInt count(DyadicScale s, const Budget& budget) const override;

 private:
  const CubeSet& cover(int k) const;

  OraclePtr inner_;
  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<const CubeSet>> cache_;
};

OraclePtr hyperplane_augmentation(int d, int n);
OraclePtr union_oracle(OraclePtr a, OraclePtr b);
OraclePtr sumset_pattern(OraclePtr y, int d);
/// `space_dim` is the dimension of the space the curve's graph lives in,
/// i.e. curve output dimension + 1.
OraclePtr isosceles_pattern(CurvePtr rescaled, int space_dim);

struct MinkowskiEstimate {
  std::vector<int> exponents;
  std::vector<BigInt> counts;
  std::vector<double> per_scale;  // log2(count)/k
  std::vector<double> pairwise;   // slopes between adjacent scales
  double slope = 0.0;             // least squares of log2 count on k
  double min_pairwise = 0.0;
};

MinkowskiEstimate minkowski_estimate(const PatternOracle& o, const std::vector<DyadicScale>& scales,
                                     const Budget& budget = {});

/// Cells of [0,1)^d at the given scale that are not the first factor of any
/// cover cube of Z.
CubeSet trivial_projection_complement(const PatternOracle& z, int d, int n, DyadicScale s,
                                      const Budget& budget = {});

}  // namespace pavoid

#endif
