#include "twistlab/torus.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "twistlab/errors.hpp"

namespace twistlab {

namespace {

double wrap01(double x) {
  double r = x - std::floor(x);
  if (r >= 1.0) r = 0.0;
  return r;
}

double wrap_half(double x) {
  return x - std::round(x);
}

Rat wrap_half_rat(const Rat& x) {
  // x - round(x), in [-1/2, 1/2)
  const Rat half(1, 2);
  return (x + half).mod1() - half;
}

RatVec2 step_exact(const IntMat2& m, const RatVec2& v) {
  RatVec2 w = m.apply(v);
  return {w[0].mod1(), w[1].mod1()};
}

double signed_power(double base, std::int64_t n) {
  double s = std::pow(std::abs(base), static_cast<double>(n));
  if (base < 0 && (n & 1)) s = -s;
  return s;
}

}  // namespace

TorusPoint TorusPoint::from_coords(double x, double y) {
  TorusPoint p;
  p.c = {wrap01(x), wrap01(y)};
  return p;
}

TorusPoint TorusPoint::from_exact(const RatVec2& v) {
  TorusPoint p;
  p.exact = RatVec2{v[0].mod1(), v[1].mod1()};
  p.c = {(*p.exact)[0].to_double(), (*p.exact)[1].to_double()};
  return p;
}

std::string TorusPoint::key() const {
  if (exact) return "E:" + (*exact)[0].str() + "," + (*exact)[1].str();
  char buf[80];
  std::snprintf(buf, sizeof buf, "F:%.17g,%.17g", c[0], c[1]);
  return buf;
}

TorusSystem::TorusSystem(const IntMat2& f, double epsilon, double tau) : f_(f) {
  const std::int64_t det = f_.det();
  if (det != 1 && det != -1)
    throw ConfigError("TorusSystem: |det F| must be 1, got det = " + std::to_string(det));
  if (std::abs(f_.trace()) <= 2)
    throw ConfigError("TorusSystem: |trace F| must exceed 2 for hyperbolicity, got " +
                      std::to_string(f_.trace()));
  finv_ = f_.unimodular_inverse();

  const double tr = static_cast<double>(f_.trace());
  const double dd = static_cast<double>(det);
  const double disc = std::sqrt(tr * tr - 4.0 * dd);
  const double m1 = (tr + disc) / 2.0, m2 = (tr - disc) / 2.0;
  mu_u_ = std::abs(m1) >= std::abs(m2) ? m1 : m2;
  mu_s_ = dd / mu_u_;
  lambda_ = std::log(std::abs(mu_u_));

  const auto eigvec = [this](double mu) -> Vec2 {
    const double b = static_cast<double>(f_.b), c = static_cast<double>(f_.c);
    const double a = static_cast<double>(f_.a), d = static_cast<double>(f_.d);
    Vec2 v1{b, mu - a}, v2{mu - d, c};
    const double n1 = std::hypot(v1[0], v1[1]), n2 = std::hypot(v2[0], v2[1]);
    Vec2 v = n1 >= n2 ? v1 : v2;
    const double n = std::hypot(v[0], v[1]);
    return {v[0] / n, v[1] / n};
  };
  vu_ = eigvec(mu_u_);
  vs_ = eigvec(mu_s_);
  const auto residual = [this](const Vec2& v, double mu) {
    const double r0 = static_cast<double>(f_.a) * v[0] + static_cast<double>(f_.b) * v[1] - mu * v[0];
    const double r1 = static_cast<double>(f_.c) * v[0] + static_cast<double>(f_.d) * v[1] - mu * v[1];
    return std::hypot(r0, r1);
  };
  if (residual(vu_, mu_u_) > 1e-12 || residual(vs_, mu_s_) > 1e-12)
    throw ConfigError("TorusSystem: eigenvector residual exceeds 1e-12");

  epsilon_ = epsilon > 0 ? epsilon : 0.05;
  tau_ = tau > 0 ? tau : 0.05;
}

void TorusSystem::realize(TorusPoint& p) const {
  if (p.exact) {
    p.c = {(*p.exact)[0].to_double(), (*p.exact)[1].to_double()};
    return;
  }
  const LeafRep* best = nullptr;
  const Vec2* dir = nullptr;
  if (p.stable) {
    best = &*p.stable;
    dir = &vs_;
  }
  if (p.unstable && (!best || std::abs(p.unstable->t) < std::abs(best->t))) {
    best = &*p.unstable;
    dir = &vu_;
  }
  if (best) {
    p.c = {wrap01(best->anchor[0] + best->t * (*dir)[0]),
           wrap01(best->anchor[1] + best->t * (*dir)[1])};
  }
}

TorusPoint TorusSystem::iterate(const TorusPoint& p, std::int64_t n) const {
  if (n == 0) return p;
  TorusPoint q = p;
  const IntMat2& step = n > 0 ? f_ : finv_;
  const std::int64_t count = std::llabs(n);

  if (q.exact) {
    for (std::int64_t i = 0; i < count; ++i) *q.exact = step_exact(step, *q.exact);
  }
  const auto advance_leaf = [&](std::optional<LeafRep>& rep, double mu) {
    if (!rep) return;
    if (rep->anchor_exact) {
      for (std::int64_t i = 0; i < count; ++i)
        *rep->anchor_exact = step_exact(step, *rep->anchor_exact);
      rep->anchor = {(*rep->anchor_exact)[0].to_double(), (*rep->anchor_exact)[1].to_double()};
    } else {
      Vec2 a = rep->anchor;
      for (std::int64_t i = 0; i < count; ++i) {
        const double x = static_cast<double>(step.a) * a[0] + static_cast<double>(step.b) * a[1];
        const double y = static_cast<double>(step.c) * a[0] + static_cast<double>(step.d) * a[1];
        a = {wrap01(x), wrap01(y)};
      }
      rep->anchor = a;
    }
    rep->t *= signed_power(mu, n);
  };
  advance_leaf(q.stable, mu_s_);
  advance_leaf(q.unstable, mu_u_);

  if (!q.exact && !q.stable && !q.unstable) {
    Vec2 a = q.c;
    for (std::int64_t i = 0; i < count; ++i) {
      const double x = static_cast<double>(step.a) * a[0] + static_cast<double>(step.b) * a[1];
      const double y = static_cast<double>(step.c) * a[0] + static_cast<double>(step.d) * a[1];
      a = {wrap01(x), wrap01(y)};
    }
    q.c = a;
    return q;
  }
  realize(q);
  return q;
}

double TorusSystem::distance(const TorusPoint& x, const TorusPoint& y) const {
  const double dx = wrap_half(x.c[0] - y.c[0]);
  const double dy = wrap_half(x.c[1] - y.c[1]);
  return std::hypot(dx, dy);
}

TorusPoint TorusSystem::bracket(const TorusPoint& x, const TorusPoint& y) const {
  const double d = distance(x, y);
  if (d > tau_)
    throw DistanceExceedsTau("bracket: d(x, y) = " + std::to_string(d) + " exceeds tau = " +
                             std::to_string(tau_));
  const double dx = wrap_half(y.c[0] - x.c[0]);
  const double dy = wrap_half(y.c[1] - x.c[1]);
  // solve s*v_s - u*v_u = y - x
  const double den = vs_[0] * (-vu_[1]) + vu_[0] * vs_[1];
  if (std::abs(den) < 1e-9)
    throw SolveFailure("bracket: eigendirections nearly parallel, det = " + std::to_string(den));
  const double s = (dx * (-vu_[1]) + vu_[0] * dy) / den;
  const double u = (vs_[0] * dy - vs_[1] * dx) / den;

  TorusPoint z;
  z.stable = LeafRep{x.c, x.exact, s};
  z.unstable = LeafRep{y.c, y.exact, u};
  realize(z);

  const double r0 = (x.c[0] + s * vs_[0]) - (x.c[0] + dx + u * vu_[0]);
  const double r1 = (x.c[1] + s * vs_[1]) - (x.c[1] + dy + u * vu_[1]);
  if (std::hypot(r0, r1) > 1e-10)
    throw SolveFailure("bracket: leaf intersection residual " + std::to_string(std::hypot(r0, r1)));
  return z;
}

std::int64_t TorusSystem::periodic_count_formula(int n) const {
  if (n < 1) throw ConfigError("periodic_count_formula: n must be >= 1");
  const IntMat2 m = f_.pow(n) - IntMat2::identity();
  return std::llabs(m.det());
}

std::vector<TorusPoint> TorusSystem::periodic_points(int n, std::int64_t budget) const {
  if (n < 1) throw ConfigError("periodic_points: n must be >= 1");
  const IntMat2 m = f_.pow(n) - IntMat2::identity();
  const std::int64_t det = m.det();
  if (det == 0) throw SolveFailure("periodic_points: F^n - I is singular");
  const std::int64_t da = std::llabs(det);
  if (da > budget)
    throw BudgetExceeded("periodic_points: " + std::to_string(da) + " points at period " +
                         std::to_string(n) + " exceeds budget " + std::to_string(budget));

  // fixed points of F^n are (1/det) * adj(m) Z^2 inside [0,1)^2; reduce the
  // integer lattice adj(m) Z^2 to column echelon form and walk its cosets
  const IntMat2 adj = m.adjugate();
  std::int64_t ax = adj.a, ay = adj.c;  // first column
  std::int64_t bx = adj.b, by = adj.d;  // second column
  while (bx != 0) {
    const std::int64_t q = ax / bx;
    const std::int64_t rx = ax - checked_mul(q, bx);
    const std::int64_t ry = ay - checked_mul(q, by);
    ax = bx;
    ay = by;
    bx = rx;
    by = ry;
  }
  if (ax < 0) {
    ax = -ax;
    ay = -ay;
  }
  if (by < 0) by = -by;
  const std::int64_t g = ax, h22 = by;
  if (g <= 0 || h22 <= 0 || g * h22 != da)
    throw SolveFailure("periodic_points: lattice reduction failed");

  std::vector<TorusPoint> out;
  out.reserve(static_cast<size_t>(da));
  for (std::int64_t a = 0; a * g < da; ++a) {
    const std::int64_t xnum = a * g;
    const std::int64_t ybase = ((checked_mul(ay, a)) % da + da) % da;
    for (std::int64_t b = 0; b < g; ++b) {
      const std::int64_t ynum = (ybase + checked_mul(h22, b)) % da;
      out.push_back(TorusPoint::from_exact({Rat(xnum, da), Rat(ynum, da)}));
    }
  }
  // each point must satisfy m p in Z^2 exactly
  for (const auto& p : out) {
    const RatVec2 img = m.apply(*p.exact);
    if (!img[0].is_integer() || !img[1].is_integer())
      throw SolveFailure("periodic_points: enumerated point fails exact check at " + p.key());
  }
  return out;
}

TorusPoint TorusSystem::stable_translate(const TorusPoint& y, double t) const {
  TorusPoint z;
  // chain through y's own anchor: translated families must share one float
  // trajectory, or iteration decoheres the pair at rate e^{lambda n}
  if (y.stable)
    z.stable = LeafRep{y.stable->anchor, y.stable->anchor_exact, y.stable->t + t};
  else
    z.stable = LeafRep{y.c, y.exact, t};
  realize(z);
  return z;
}

TorusPoint TorusSystem::unstable_translate(const TorusPoint& y, double t) const {
  TorusPoint z;
  if (y.unstable)
    z.unstable = LeafRep{y.unstable->anchor, y.unstable->anchor_exact, y.unstable->t + t};
  else
    z.unstable = LeafRep{y.c, y.exact, t};
  realize(z);
  return z;
}

TorusPoint TorusSystem::homoclinic_point(std::int64_t m0, std::int64_t m1) const {
  // t_s v_s - t_u v_u = m
  const double den = vs_[0] * (-vu_[1]) + vu_[0] * vs_[1];
  if (std::abs(den) < 1e-9) throw SolveFailure("homoclinic_point: eigendirections nearly parallel");
  const double b0 = static_cast<double>(m0), b1 = static_cast<double>(m1);
  const double ts = (b0 * (-vu_[1]) + vu_[0] * b1) / den;
  const double tu = (vs_[0] * b1 - vs_[1] * b0) / den;
  const RatVec2 zero{Rat::integer(0), Rat::integer(0)};
  TorusPoint z;
  z.stable = LeafRep{{0.0, 0.0}, zero, ts};
  z.unstable = LeafRep{{0.0, 0.0}, zero, tu};
  realize(z);
  return z;
}

TorusPoint TorusSystem::snap_rational(const TorusPoint& p, std::int64_t den) const {
  if (p.exact) return p;
  const auto snap = [den](double v) {
    return Rat(static_cast<std::int64_t>(std::llround(v * static_cast<double>(den))), den).mod1();
  };
  return TorusPoint::from_exact({snap(p.c[0]), snap(p.c[1])});
}

TorusSystem::ClosingSolve TorusSystem::closing_solve(const TorusPoint& z, int n) const {
  if (n < 1) throw ConfigError("closing_solve: n must be >= 1");
  if (!z.exact)
    throw SolveFailure("closing_solve: z must carry an exact rational form (see snap_rational)");
  RatVec2 w = *z.exact;
  for (int i = 0; i < n; ++i) w = step_exact(f_, w);
  const RatVec2 e{wrap_half_rat(w[0] - (*z.exact)[0]), wrap_half_rat(w[1] - (*z.exact)[1])};

  const IntMat2 m = f_.pow(n) - IntMat2::identity();
  const std::int64_t det = m.det();
  if (det == 0) throw SolveFailure("closing_solve: F^n - I is singular");

  // (F^n - I) z differs from the defect e by the integer sheet vector k, and
  // the shadowing fixed point is exactly (F^n - I)^{-1} k
  const RatVec2 mz = m.apply(*z.exact);
  const RatVec2 k{mz[0] - e[0], mz[1] - e[1]};
  if (!k[0].is_integer() || !k[1].is_integer())
    throw SolveFailure("closing_solve: sheet vector not integral (internal)");

  const IntMat2 adj = m.adjugate();
  const Rat inv_det(1, det);
  const RatVec2 p_hat{(Rat::integer(adj.a) * k[0] + Rat::integer(adj.b) * k[1]) * inv_det,
                      (Rat::integer(adj.c) * k[0] + Rat::integer(adj.d) * k[1]) * inv_det};
  TorusPoint p = TorusPoint::from_exact(p_hat);

  RatVec2 check = *p.exact;
  for (int i = 0; i < n; ++i) check = step_exact(f_, check);
  if (check[0] != (*p.exact)[0] || check[1] != (*p.exact)[1])
    throw SolveFailure("closing_solve: constructed point is not n-periodic (internal)");

  return {p, {e[0].to_double(), e[1].to_double()}};
}

std::optional<double> TorusSystem::stable_offset(const TorusPoint& y, const TorusPoint& z) const {
  const auto anchored_at = [this](const LeafRep& rep, const TorusPoint& q) {
    const double dx = wrap_half(rep.anchor[0] - q.c[0]);
    const double dy = wrap_half(rep.anchor[1] - q.c[1]);
    return std::hypot(dx, dy) < 1e-12;
  };
  if (z.stable && anchored_at(*z.stable, y)) return z.stable->t;
  if (y.stable && anchored_at(*y.stable, z)) return -y.stable->t;
  if (z.stable && y.stable && anchored_at(*z.stable, TorusPoint::from_coords(y.stable->anchor[0], y.stable->anchor[1])))
    return z.stable->t - y.stable->t;
  if (distance(y, z) == 0.0) return 0.0;
  return std::nullopt;
}

std::optional<double> TorusSystem::unstable_offset(const TorusPoint& y, const TorusPoint& z) const {
  const auto anchored_at = [this](const LeafRep& rep, const TorusPoint& q) {
    const double dx = wrap_half(rep.anchor[0] - q.c[0]);
    const double dy = wrap_half(rep.anchor[1] - q.c[1]);
    return std::hypot(dx, dy) < 1e-12;
  };
  if (z.unstable && anchored_at(*z.unstable, y)) return z.unstable->t;
  if (y.unstable && anchored_at(*y.unstable, z)) return -y.unstable->t;
  if (z.unstable && y.unstable &&
      anchored_at(*z.unstable, TorusPoint::from_coords(y.unstable->anchor[0], y.unstable->anchor[1])))
    return z.unstable->t - y.unstable->t;
  if (distance(y, z) == 0.0) return 0.0;
  return std::nullopt;
}

}  // namespace twistlab
