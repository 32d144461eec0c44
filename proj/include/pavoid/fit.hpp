#ifndef PAVOID_FIT_HPP
#define PAVOID_FIT_HPP

#include <vector>

namespace pavoid {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept. Needs two distinct x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Coefficients minimising |A c - y| for the design matrix given by rows.
std::vector<double> least_squares(const std::vector<std::vector<double>>& rows, const std::vector<double>& y);

}  // namespace pavoid

#endif
