#include "pavoid/fit.hpp"

#include "pavoid/numeric.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace pavoid {

std::vector<double> least_squares(const std::vector<std::vector<double>>& rows, const std::vector<double>& y) {
  if (rows.empty() || rows.size() != y.size()) throw PreconditionError("least_squares: shape mismatch");
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index p = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd a(m, p);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != p)
      throw PreconditionError("least_squares: ragged design matrix");
    for (Eigen::Index j = 0; j < p; ++j) a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    b(i) = y[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < p) throw PreconditionError("least_squares: design matrix is rank deficient");
  Eigen::VectorXd c = qr.solve(b);
  return std::vector<double>(c.data(), c.data() + c.size());
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::vector<double>> rows;
  rows.reserve(x.size());
  for (double v : x) rows.push_back({v, 1.0});
  auto c = least_squares(rows, y);
  LineFit f{c[0], c[1], 0.0};
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / static_cast<double>(x.size()));
  return f;
}

}  // namespace pavoid
