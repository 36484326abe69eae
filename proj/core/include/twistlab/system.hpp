#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "twistlab/sft.hpp"
#include "twistlab/torus.hpp"

namespace twistlab {

using Point = std::variant<SymbolicPoint, TorusPoint>;
using System = std::variant<SftSystem, TorusSystem>;

const SftSystem& as_sft(const System& sys);
const TorusSystem& as_torus(const System& sys);

Point iterate(const System& sys, const Point& x, std::int64_t n);
double distance(const System& sys, const Point& x, const Point& y);
double lambda_of(const System& sys);
double epsilon_of(const System& sys);
double tau_of(const System& sys);

// z with z in W^s(x) and W^u(y); pre: d(x, y) <= tau
Point bracket(const System& sys, const Point& x, const Point& y);

std::vector<Point> periodic_points(const System& sys, int n, std::int64_t budget = 1 << 21);
std::int64_t periodic_count_formula(const System& sys, int n);

std::string point_key(const Point& x);
bool same_point(const System& sys, const Point& x, const Point& y);

// minimal m >= 0 such that (f^m y, f^m z) lies in a local stable pair
// (agreement on i >= 0 for SFT, |leaf offset| <= epsilon for torus);
// nullopt when z is not on the stable set of y (or carries no usable leaf
// representation on the torus)
std::optional<std::int64_t> stable_reduction(const System& sys, const Point& y, const Point& z);
// minimal m >= 0 such that (f^-m y, f^-m z) is a local unstable pair
std::optional<std::int64_t> unstable_reduction(const System& sys, const Point& y, const Point& z);

// y in W(x) = W^s(x) cap W^u(x), decided exactly from the representations
bool is_homoclinic(const System& sys, const Point& y, const Point& x);

struct ClosingReport {
  Point p;
  std::vector<double> residuals;  // d(f^j z, f^j p), j = 0..n
  double defect = 0.0;            // d(f^n z, z)
  double c_claimed = 1.0;
  double gamma_claimed = 0.0;
  // sup_j residuals[j] / (c_claimed * exp(-gamma_claimed * min(j, n-j)));
  // <= 1 means the claimed shadowing bound holds on this orbit pair
  double worst_ratio = 0.0;
  double fitted_gamma = 0.0;  // NaN when the fit is degenerate
};

// Anosov closing: p with f^n(p) = p exactly, shadowing z's orbit segment.
// pre: d(f^n z, z) < eps0 (defaults to the system's epsilon). On the torus, z
// without an exact rational form is snapped to denominator 2^20 first and the
// report refers to the snapped orbit.
ClosingReport closing(const System& sys, const Point& z, int n, double eps0 = -1.0);

// SFT bases only: replace y outside the window [-W, W], W = N - r, by the
// fixed point x's symbol, inserting shortest admissible connectors (r is the
// system's connector radius). The result is homoclinic to x and agrees with y
// on |i| <= W, so d(y, y') <= exp(-lambda (N - r)).
Point homoclinic_truncate(const System& sys, const Point& y, const Point& x, int N);

class Rng;

Point random_point(const System& sys, Rng& rng);

// point at distance close to `target` from x (exactly the nearest dyadic
// level exp(-lambda N) on an SFT); throws InsufficientPairs when the
// transition structure admits no perturbation at that scale
Point nearby_point(const System& sys, Rng& rng, const Point& x, double target);

}  // namespace twistlab
