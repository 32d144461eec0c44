#ifndef PAVOID_CURVES_HPP
#define PAVOID_CURVES_HPP

#include "pavoid/interval.hpp"

#include <memory>
#include <string>
#include <vector>

namespace pavoid {

/// Curve g: [0,1] -> R^m with a certified Lipschitz constant. Evaluation
/// returns interval enclosures of each component.
class LipschitzCurve {
 public:
  virtual ~LipschitzCurve() = default;
  virtual int out_dim() const = 0;
  virtual double lipschitz() const = 0;
  virtual std::string name() const = 0;
  virtual std::vector<Interval> eval(double t) const = 0;
};

using CurvePtr = std::shared_ptr<const LipschitzCurve>;

/// Built-in curves: "zero" (g = 0), "identity" (g(t) = t), "sine" (g(t) = sin(5t)/2).
/// The certified constant must be positive and not below the curve's true constant.
CurvePtr make_builtin_curve(const std::string& name, double certified_m);

/// f(t) = g(t / (10 M)) - g(0); Lipschitz constant 1/10 and f(0) = 0.
CurvePtr rescale_curve(const CurvePtr& g);

}  // namespace pavoid

#endif
