#pragma once

#include <cstdint>
#include <vector>

#include "twistlab/cocycle.hpp"
#include "twistlab/fiber_bunching.hpp"

namespace twistlab {

enum class HolonomySide { Stable, Unstable };

struct HolonomyResult {
  Matrix h;
  double tail_bound = 0.0;  // bound on the sum of increments beyond n_used
  int n_used = 0;
  HolonomySide side = HolonomySide::Stable;
};

// H^s_{yz} = lim_n alpha^{-n}(A^n(z)^{-1} A^n(y)) for z on the stable set of
// y. Pairs beyond the local scale are forward-iterated until local and the
// limit is pulled back through H_{yz} = alpha^{-m}(A^m(z)^{-1} H' A^m(y)),
// which scales the tail by the norms of the pullback factors. Stops when the
// certified-rate tail bound drops below tol: the remainder is bounded by the
// geometric series at the certified ratio, anchored at the largest observed
// increment relative to that decay. Finite-radius generators on symbolic
// bases provably stabilize at radius + 1 steps, where only roundoff remains.
HolonomyResult stable_holonomy(const TwistedCocycle& c, const Point& y, const Point& z,
                               const FiberBunchingReport& report, double tol = 1e-10,
                               int n_max = 200);

// H^u_{yz} = lim_n alpha^{n}(A^{-n}(z)^{-1} A^{-n}(y)), mirror along backward
// iterates; pullback H_{yz} = A^m(f^{-m}z) alpha^m(H') A^m(f^{-m}y)^{-1}
HolonomyResult unstable_holonomy(const TwistedCocycle& c, const Point& y, const Point& z,
                                 const FiberBunchingReport& report, double tol = 1e-10,
                                 int n_max = 200);

// increment norms ‖S_{n+1} - S_n‖ of the stable partial limits, n = 0..n_max-1,
// with no stopping rule; pairs are reduced exactly as in stable_holonomy and
// the profile refers to the reduced pair
std::vector<double> convergence_profile(const TwistedCocycle& c, const Point& y, const Point& z,
                                        const FiberBunchingReport& report, int n_max);

}  // namespace twistlab
