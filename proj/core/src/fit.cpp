#include "twistlab/fit.hpp"

#include <algorithm>
#include <cmath>

#include "twistlab/errors.hpp"

namespace twistlab {

LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw Error("least_squares: need >= 2 samples, got " + std::to_string(xs.size()));
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30 * (1.0 + sxx))
    throw Error("least_squares: degenerate abscissae (all x equal)");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  for (size_t i = 0; i < xs.size(); ++i)
    f.max_residual = std::max(f.max_residual, ys[i] - f.slope * xs[i] - f.intercept);
  return f;
}

LineFit upper_envelope(const std::vector<double>& xs, const std::vector<double>& ys) {
  LineFit f = least_squares(xs, ys);
  f.intercept += f.max_residual;
  f.max_residual = 0.0;
  return f;
}

}  // namespace twistlab
