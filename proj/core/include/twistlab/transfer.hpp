#pragma once

#include <cstdint>
#include <map>
#include <shared_mutex>
#include <string>
#include <vector>

#include "twistlab/holonomy.hpp"

namespace twistlab {

struct TransferValue {
  Matrix p;
  double tail = 0.0;  // propagated holonomy tail bounds
};

// P(y) = H^{s,A}_{xy} H^{s,B}_{yx} on the homoclinic set of the anchor fixed
// point; P(anchor) = Id by construction. Values are cached by point key;
// the cache is append-only, exclusive writer, shared readers.
class TransferMap {
 public:
  TransferMap(TwistedCocycle a, TwistedCocycle b, Point anchor, FiberBunchingReport report_a,
              FiberBunchingReport report_b, double tol = 1e-10, int n_max = 200,
              bool periodic_verified = false);

  const TwistedCocycle& a() const { return a_; }
  const TwistedCocycle& b() const { return b_; }
  const Point& anchor() const { return anchor_; }
  const FiberBunchingReport& report_a() const { return ra_; }
  const FiberBunchingReport& report_b() const { return rb_; }
  double tol() const { return tol_; }
  int n_max() const { return n_max_; }
  bool periodic_verified() const { return periodic_verified_; }

  // pre: y homoclinic to the anchor
  TransferValue at(const Point& y) const;

 private:
  TwistedCocycle a_, b_;
  Point anchor_;
  FiberBunchingReport ra_, rb_;
  double tol_;
  int n_max_;
  bool periodic_verified_;
  mutable std::shared_mutex mu_;
  mutable std::map<std::string, TransferValue> cache_;
};

// relative norm of A^n(y) - P(f^n y) B^n(y) alpha^n(P(y))^{-1}; n may be
// negative; y and f^n y must both be homoclinic to the anchor
double cohomology_residual(const TransferMap& pm, const Point& y, std::int64_t n);

struct SuDiscrepancy {
  double value = 0.0;          // ‖P_s(y) - P_u(y)‖
  double combined_tail = 0.0;  // sum of the four holonomy tail bounds
  Matrix p_stable, p_unstable;
};

// compares the stable and unstable constructions of P at y; the two agree
// within tails exactly when the cocycles have matching periodic data
SuDiscrepancy su_discrepancy(const TransferMap& pm, const Point& y);

struct PeriodicDataReport {
  int n_max = 0;
  double tol = 0.0;
  std::vector<double> worst;  // worst relative residual over Fix(f^n), n = 1..n_max
  bool match = true;
  int witness_n = 0;  // first offending (n, point) when match is false
  std::string witness_key;
  double witness_residual = 0.0;
};

// exhaustive relative residuals ‖A^n(p) - B^n(p)‖ / ‖A^n(p)‖ over Fix(f^n)
PeriodicDataReport periodic_check(const TwistedCocycle& a, const TwistedCocycle& b, int n_max,
                                  double tol, std::int64_t budget = 1 << 21);

struct ExtensionResult {
  Matrix p;
  std::vector<int> windows;        // truncation windows actually evaluated
  std::vector<double> increments;  // ‖P(y_{N_j}) - P(y_{N_{j-1}})‖, one per window after the first
  double last_increment = 0.0;
  // periodic data verified and the increments reached the threshold
  bool certified = false;
};

// evaluates P on homoclinic truncations of y_target at growing windows until
// successive values differ by less than threshold. Symbolic bases only: the
// truncations are constructive there; on the torus, evaluate at() on
// explicitly parametrized homoclinic points instead.
ExtensionResult extend(const TransferMap& pm, const Point& y_target,
                       std::vector<int> schedule = {}, double threshold = 1e-5);

struct HolderFit {
  double c_p = 0.0;
  double slope = 0.0;  // +infinity when every sampled difference vanishes
  int pairs_used = 0;
};

// upper-envelope log-log fit of ‖P(y) - P(z)‖ against d(y, z) over sample
// pairs; needs at least 30 pairs at nonzero distance
HolderFit holder_fit(const TransferMap& pm, const std::vector<Point>& samples,
                     int pair_budget = 600);

}  // namespace twistlab
