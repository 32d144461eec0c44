#include "pavoid/curves.hpp"

#include "pavoid/numeric.hpp"

#include <cmath>

namespace pavoid {

namespace {

constexpr double kUlp = std::numeric_limits<double>::epsilon();

class ZeroCurve final : public LipschitzCurve {
 public:
  explicit ZeroCurve(double m) : m_(m) {}
  int out_dim() const override { return 1; }
  double lipschitz() const override { return m_; }
  std::string name() const override { return "zero"; }
  std::vector<Interval> eval(double) const override { return {Interval::point(0.0)}; }

 private:
  double m_;
};

class IdentityCurve final : public LipschitzCurve {
 public:
  explicit IdentityCurve(double m) : m_(m) {}
  int out_dim() const override { return 1; }
  double lipschitz() const override { return m_; }
  std::string name() const override { return "identity"; }
  std::vector<Interval> eval(double t) const override { return {Interval::point(t)}; }

 private:
  double m_;
};

class SineCurve final : public LipschitzCurve {
 public:
  explicit SineCurve(double m) : m_(m) {}
  int out_dim() const override { return 1; }
  double lipschitz() const override { return m_; }
  std::string name() const override { return "sine"; }
  std::vector<Interval> eval(double t) const override {
    // libm sin is within a few ulps; 5t and the halving add one rounding each.
    const double v = 0.5 * std::sin(5.0 * t);
    const double err = 8.0 * kUlp * (1.0 + std::abs(5.0 * t));
    return {Interval::widen(v - err, v + err)};
  }

 private:
  double m_;
};

class RescaledCurve final : public LipschitzCurve {
 public:
  explicit RescaledCurve(CurvePtr g) : g_(std::move(g)), g0_(g_->eval(0.0)) {}
  int out_dim() const override { return g_->out_dim(); }
  double lipschitz() const override { return 0.1; }
  std::string name() const override { return "rescaled(" + g_->name() + ")"; }
  std::vector<Interval> eval(double t) const override {
    const double m = g_->lipschitz();
    const double u = t / (10.0 * m);
    // |u - t/(10M)| <= 2 ulp(u); propagate through the Lipschitz bound of g.
    const double du = 4.0 * kUlp * std::abs(u) + std::numeric_limits<double>::denorm_min();
    auto gu = g_->eval(u);
    std::vector<Interval> out(gu.size());
    for (std::size_t i = 0; i < gu.size(); ++i) out[i] = gu[i].inflate(m * du) - g0_[i];
    return out;
  }

 private:
  CurvePtr g_;
  std::vector<Interval> g0_;
};

}  // namespace

CurvePtr make_builtin_curve(const std::string& name, double certified_m) {
  if (!(certified_m > 0.0) || !std::isfinite(certified_m))
    throw ConfigError("curve Lipschitz constant must be positive and finite");
  if (name == "zero") return std::make_shared<ZeroCurve>(certified_m);
  if (name == "identity") {
    if (certified_m < 1.0) throw ConfigError("identity curve needs M >= 1");
    return std::make_shared<IdentityCurve>(certified_m);
  }
  if (name == "sine") {
    if (certified_m < 2.5) throw ConfigError("sine curve needs M >= 5/2");
    return std::make_shared<SineCurve>(certified_m);
  }
  throw ConfigError("unknown built-in curve '" + name + "'");
}

CurvePtr rescale_curve(const CurvePtr& g) {
  if (!g || !(g->lipschitz() > 0.0)) throw PreconditionError("rescale_curve: needs a certified M > 0");
  return std::make_shared<RescaledCurve>(g);
}

}  // namespace pavoid
