#pragma once

#include <Eigen/Dense>

#include "twistlab/rng.hpp"

namespace twistlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Operator 2-norm (largest singular value). All matrix norms in this library
// are operator norms unless a function says otherwise.
double op_norm(const Matrix& m);

// 2-norm condition number sigma_max / sigma_min; +inf for singular input.
double cond_2(const Matrix& m);

Matrix inverse(const Matrix& m);  // throws IllConditioned past 1e14

// ||a - b|| / max(||a||, floor) -- relative difference in operator norm.
double rel_diff(const Matrix& a, const Matrix& b);

// i.i.d. N(0,1) entries, no invertibility guarantee.
Matrix random_gaussian(Rng& rng, int d);

// Random GL(d) sample: i.i.d. N(0,1) entries, resampled until cond_2 < 1e6.
Matrix random_invertible(Rng& rng, int d);

// Identity + scale * (N(0,1) entries); scale < 1/(3 sqrt(d)) keeps it
// comfortably invertible.
Matrix random_near_identity(Rng& rng, int d, double scale);

Matrix rotation2(double angle);

}  // namespace twistlab
