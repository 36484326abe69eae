#pragma once

#include <vector>

namespace twistlab {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;  // max (y - slope*x - intercept) over samples
};

// Ordinary least squares on (x, y). Requires >= 2 distinct x values.
LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys);

// Least-squares slope with the intercept raised so y_i <= slope*x_i + intercept
// for every sample: the fitted line dominates the data. Used to turn measured
// growth sequences into certified (C, rate) envelope pairs via logs.
LineFit upper_envelope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace twistlab
