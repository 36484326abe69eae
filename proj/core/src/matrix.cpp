#include "twistlab/matrix.hpp"

#include <cmath>
#include <limits>

#include "twistlab/errors.hpp"

namespace twistlab {

double op_norm(const Matrix& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  return m.jacobiSvd().singularValues()(0);
}

double cond_2(const Matrix& m) {
  const auto sv = m.jacobiSvd().singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

Matrix inverse(const Matrix& m) {
  const double c = cond_2(m);
  if (!(c < 1e14))
    throw IllConditioned("matrix inverse: cond_2 = " + std::to_string(c));
  return m.inverse();
}

double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(op_norm(a), 1e-300);
  return op_norm(a - b) / scale;
}

Matrix random_gaussian(Rng& rng, int d) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
  return m;
}

Matrix random_invertible(Rng& rng, int d) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
    if (cond_2(m) < 1e6) return m;
  }
  throw Error("random_invertible: no well-conditioned sample in 64 draws");
}

Matrix random_near_identity(Rng& rng, int d, double scale) {
  Matrix m = Matrix::Identity(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) += scale * rng.normal();
  return m;
}

Matrix rotation2(double angle) {
  Matrix r(2, 2);
  const double c = std::cos(angle), s = std::sin(angle);
  r << c, -s, s, c;
  return r;
}

}  // namespace twistlab
