#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twistlab/rational.hpp"

namespace twistlab {

using Vec2 = std::array<double, 2>;

// Offset along one eigendirection of the torus map: point = anchor + t * v
// (mod 1). The anchor iterates like any torus point while t scales exactly by
// the eigenvalue, so pairs on a common leaf keep full relative precision at
// any depth (independent float orbits decorrelate after ~16 steps).
struct LeafRep {
  Vec2 anchor{0.0, 0.0};
  std::optional<RatVec2> anchor_exact;
  double t = 0.0;
};

struct TorusPoint {
  Vec2 c{0.0, 0.0};  // [0,1)^2
  std::optional<RatVec2> exact;
  std::optional<LeafRep> stable;    // offset along v_s
  std::optional<LeafRep> unstable;  // offset along v_u

  static TorusPoint from_coords(double x, double y);
  static TorusPoint from_exact(const RatVec2& v);
  std::string key() const;
};

// Hyperbolic toral automorphism x -> F x (mod 1) on the 2-torus, F integer
// with |det F| = 1 and |trace F| > 2. Metric: Euclidean distance between
// shortest representatives.
class TorusSystem {
 public:
  explicit TorusSystem(const IntMat2& f, double epsilon = -1.0, double tau = -1.0);

  static TorusSystem cat_map() { return TorusSystem(IntMat2{2, 1, 1, 1}); }

  const IntMat2& f() const { return f_; }
  double lambda() const { return lambda_; }
  double mu_u() const { return mu_u_; }
  double mu_s() const { return mu_s_; }
  Vec2 v_u() const { return vu_; }
  Vec2 v_s() const { return vs_; }
  double epsilon() const { return epsilon_; }
  double tau() const { return tau_; }

  TorusPoint iterate(const TorusPoint& p, std::int64_t n) const;
  double distance(const TorusPoint& x, const TorusPoint& y) const;

  // z = x + s v_s = y + u v_u (mod 1); pre: d(x, y) <= tau
  TorusPoint bracket(const TorusPoint& x, const TorusPoint& y) const;

  std::vector<TorusPoint> periodic_points(int n, std::int64_t budget = 1 << 21) const;
  std::int64_t periodic_count_formula(int n) const;  // |det(F^n - I)|

  // y + t v_s resp. y + t v_u (mod 1), carrying the leaf representation
  TorusPoint stable_translate(const TorusPoint& y, double t) const;
  TorusPoint unstable_translate(const TorusPoint& y, double t) const;

  // intersection point of the stable and unstable leaves through 0 indexed by
  // the integer lift offset m: t_s v_s - t_u v_u = m. Carries both leaf reps,
  // so forward and backward orbits are both exact. m = (0,0) gives 0 itself.
  TorusPoint homoclinic_point(std::int64_t m0, std::int64_t m1) const;

  // exact rational form with denominator `den` (snaps float coords)
  TorusPoint snap_rational(const TorusPoint& p, std::int64_t den = 1 << 20) const;

  // exact fixed point of F^n shadowing the orbit of z; z must carry an exact
  // rational form. Also reports the closing defect f^n(z) - z as the shortest
  // representative.
  struct ClosingSolve {
    TorusPoint p;
    Vec2 defect;
  };
  ClosingSolve closing_solve(const TorusPoint& z, int n) const;

  // offset t with z = y + t v_s (mod 1) when the leaf representations expose
  // it; nullopt otherwise
  std::optional<double> stable_offset(const TorusPoint& y, const TorusPoint& z) const;
  std::optional<double> unstable_offset(const TorusPoint& y, const TorusPoint& z) const;

 private:
  void realize(TorusPoint& p) const;  // refresh float coords from best source

  IntMat2 f_, finv_;
  double mu_u_, mu_s_, lambda_;
  Vec2 vu_, vs_;
  double epsilon_, tau_;
};

}  // namespace twistlab
