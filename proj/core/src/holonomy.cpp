#include "twistlab/holonomy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "twistlab/errors.hpp"

namespace twistlab {

namespace {

// partial limits S_n = U_n V_n; stable: U_n = alpha^{-n}(A^n(z))^{-1},
// V_n = alpha^{-n}(A^n(y)); unstable: U_n = A^n(f^{-n}z), V_n = A^n(f^{-n}y)^{-1}
struct PartialLimits {
  const TwistedCocycle& c;
  HolonomySide side;
  Point py, pz;
  Matrix u, v;
  int n = 0;

  PartialLimits(const TwistedCocycle& cc, const Point& y, const Point& z, HolonomySide s)
      : c(cc),
        side(s),
        py(y),
        pz(z),
        u(Matrix::Identity(cc.dim(), cc.dim())),
        v(Matrix::Identity(cc.dim(), cc.dim())) {}

  Matrix value() const { return u * v; }

  void step() {
    const System& base = c.base();
    if (side == HolonomySide::Stable) {
      v = c.alpha().apply(-(n + 1), c.generator_at(py)) * v;
      u = u * inverse(c.alpha().apply(-(n + 1), c.generator_at(pz)));
      py = iterate(base, py, 1);
      pz = iterate(base, pz, 1);
    } else {
      py = iterate(base, py, -1);
      pz = iterate(base, pz, -1);
      u = u * c.alpha().apply(n, c.generator_at(pz));
      v = inverse(c.alpha().apply(n, c.generator_at(py))) * v;
    }
    ++n;
  }
};

struct LimitRun {
  Matrix h;
  double tail = 0.0;
  int n_used = 0;
};

// profile != nullptr records every increment and disables the stopping rule
LimitRun run_limit(const TwistedCocycle& c, const Point& y, const Point& z, HolonomySide side,
                   double q_cert, double tol, int n_max, std::vector<double>* profile) {
  PartialLimits pl(c, y, z, side);
  if (!profile && same_point(c.base(), y, z)) return {pl.value(), 0.0, 0};

  // finite-radius generators on a symbolic base read only sites the reduced
  // pair agrees on from this step forward; later increments are pure roundoff
  int stab = 0;
  if (std::holds_alternative<SftSystem>(c.base()) && c.generator().radius() >= 0)
    stab = c.generator().radius() + 1;

  Matrix prev = pl.value();
  const double q = q_cert;
  double env = 0.0;  // max_k inc_k q^{n+1-k}, the certified-rate remainder envelope
  double last = 0.0, second_last = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    pl.step();
    Matrix cur = pl.value();
    double inc = op_norm(cur - prev);
    prev = cur;
    if (profile) {
      profile->push_back(inc);
      continue;
    }
    second_last = last;
    last = inc;
    env = q * std::max(env, inc);
    // accumulated product roundoff grows with the step count
    double floor = 1e-15 * n * std::max(1.0, op_norm(cur));
    double tail = (stab > 0 && n >= stab) ? floor : env / (1.0 - q) + floor;
    if (tail <= tol) return {cur, tail, n};
  }
  if (profile) return {prev, 0.0, n_max};
  double ratio = second_last > 0.0 ? last / second_last : q_cert;
  throw NoConvergence("holonomy tail above tol after " + std::to_string(n_max) +
                      " steps (last increment ratio " + std::to_string(ratio) + ")");
}

}  // namespace

HolonomyResult stable_holonomy(const TwistedCocycle& c, const Point& y, const Point& z,
                               const FiberBunchingReport& report, double tol, int n_max) {
  require_bunched(report);
  if (n_max < 1) throw Error("stable_holonomy needs n_max >= 1");
  auto m = stable_reduction(c.base(), y, z);
  if (!m) throw NotStablePair("stable_holonomy: z is not on the stable set of y");

  Point ym = iterate(c.base(), y, *m);
  Point zm = iterate(c.base(), z, *m);
  LimitRun r = run_limit(c, ym, zm, HolonomySide::Stable, report.q_cert(), tol, n_max, nullptr);
  if (*m == 0) return {r.h, r.tail, r.n_used, HolonomySide::Stable};

  Matrix amy = c.evaluate(y, *m);
  Matrix amz_inv = inverse(c.evaluate(z, *m));
  Matrix h = c.alpha().apply(-*m, amz_inv * r.h * amy);
  double scale = c.alpha().kappa(-*m) * op_norm(amz_inv) * op_norm(amy);
  return {h, r.tail * scale, r.n_used, HolonomySide::Stable};
}

HolonomyResult unstable_holonomy(const TwistedCocycle& c, const Point& y, const Point& z,
                                 const FiberBunchingReport& report, double tol, int n_max) {
  require_bunched(report);
  if (n_max < 1) throw Error("unstable_holonomy needs n_max >= 1");
  auto m = unstable_reduction(c.base(), y, z);
  if (!m) throw NotUnstablePair("unstable_holonomy: z is not on the unstable set of y");

  Point ym = iterate(c.base(), y, -*m);
  Point zm = iterate(c.base(), z, -*m);
  LimitRun r = run_limit(c, ym, zm, HolonomySide::Unstable, report.q_cert(), tol, n_max, nullptr);
  if (*m == 0) return {r.h, r.tail, r.n_used, HolonomySide::Unstable};

  Matrix amy_inv = inverse(c.evaluate(ym, *m));
  Matrix amz = c.evaluate(zm, *m);
  Matrix h = amz * c.alpha().apply(*m, r.h) * amy_inv;
  double scale = c.alpha().kappa(*m) * op_norm(amz) * op_norm(amy_inv);
  return {h, r.tail * scale, r.n_used, HolonomySide::Unstable};
}

std::vector<double> convergence_profile(const TwistedCocycle& c, const Point& y, const Point& z,
                                        const FiberBunchingReport& report, int n_max) {
  require_bunched(report);
  if (n_max < 1) throw Error("convergence_profile needs n_max >= 1");
  auto m = stable_reduction(c.base(), y, z);
  if (!m) throw NotStablePair("convergence_profile: z is not on the stable set of y");

  Point ym = iterate(c.base(), y, *m);
  Point zm = iterate(c.base(), z, *m);
  std::vector<double> profile;
  profile.reserve(static_cast<std::size_t>(n_max));
  run_limit(c, ym, zm, HolonomySide::Stable, report.q_cert(), 0.0, n_max, &profile);
  return profile;
}

}  // namespace twistlab
