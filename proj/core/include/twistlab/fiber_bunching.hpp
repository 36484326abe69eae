#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "twistlab/cocycle.hpp"

namespace twistlab {

// envelope for the distortion ‖alpha^{-n}(A^n(x))‖ ‖alpha^{-n}(A^n(x)^{-1})‖
// <= c_theta e^{theta |n|}, fitted over a sample
struct ThetaData {
  double theta = 0.0;
  double c_theta = 1.0;
  int n_range = 0;
};

enum class Strictness { FiveTwo, SevenTwo };

struct FiberBunchingReport {
  double theta = 0.0, c_theta = 1.0;
  double rho = 0.0, c_rho = 1.0;
  double nu = 1.0, lambda = 0.0;
  Strictness strictness = Strictness::FiveTwo;
  // margin = nu lambda - (5 or 7) rho - 2 theta; delta = margin/2 when
  // positive, 0 otherwise; satisfied needs margin > 0 and a certifiable
  // growth certificate
  double margin = 0.0;
  double delta = 0.0;
  bool satisfied = false;
  int n_range = 0;
  std::string note;

  // holonomy increment decay exponent from the certified constants
  double hol_rate() const { return 5.0 * rho + 2.0 * theta + delta - nu * lambda; }
  double q_cert() const { return std::exp(hol_rate()); }
};

// NotCertifiable unless the report is satisfied
void require_bunched(const FiberBunchingReport& r);

ThetaData estimate_theta(const TwistedCocycle& c, const std::vector<Point>& sample, int n_max);

FiberBunchingReport certify(const TwistedCocycle& c, double nu, double lambda,
                            const GrowthCertificate& growth, const ThetaData& theta,
                            Strictness strictness);

// Norm family along the forward orbit of the anchor:
//   norm_k(v)^2 = sum_{|m| <= M} ‖B_m v‖^2 / (‖B_m u_k‖^2 e^{w |m|}),
// B_m = alpha^{-m-k}(A_alpha^m(f^k x)), w = 2 theta + delta, with reference
// vectors u_k = normalized alpha^{-k}(A(f^{k-1} x)) u_{k-1}, u_0 = e_1.
// grams[k] is the quadratic form of norm_k; steps[k-1] holds
// T_k = alpha^{-k}(A(f^{k-1} x)).
struct AdaptedNormFamily {
  Point anchor;
  int depth = 0;        // K
  int cutoff = 0;       // M actually used
  double weight = 0.0;  // 2 theta + delta
  double delta = 0.0;
  double tail_bound = 0.0;  // certified relative size of the dropped tail
  std::vector<Vector> references;
  std::vector<Matrix> grams;
  std::vector<Matrix> steps;

  double norm_k(int k, const Vector& v) const;
};

// pre: report satisfied. M <= 0 picks the cutoff adaptively so the dropped
// geometric tail stays below 1e-10 relative; throws TailTooLarge when no
// cutoff under the hard cap certifies that.
AdaptedNormFamily adapted_norms(const TwistedCocycle& c, const Point& x, int K,
                                const FiberBunchingReport& report, int M = -1);

// ‖T_k‖_{k-1 -> k} ‖T_k^{-1}‖_{k -> k-1} between consecutive adapted norms;
// bounded by e^{weight} (1 + 10 tail_bound)
double knorm_step_check(const AdaptedNormFamily& family, int k);

// max over 1 <= n <= n_max of
// ‖alpha^{-n}(A^n(y))‖ ‖alpha^{-n}(A^n(x)^{-1})‖ e^{-(4 rho + 2 theta + delta) n}
// for a forward-contracting pair; throws NotStablePair when the pair leaves
// the epsilon tube over the horizon
double stable_growth_check(const TwistedCocycle& c, const Point& x, const Point& y, int n_max,
                           const FiberBunchingReport& report);

}  // namespace twistlab
