#include "twistlab/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twistlab/errors.hpp"
#include "twistlab/fit.hpp"
#include "twistlab/matrix.hpp"

namespace twistlab {

namespace {

const SymbolicPoint& as_symbolic(const Point& x) {
  const auto* p = std::get_if<SymbolicPoint>(&x);
  if (!p) throw Error("expected a symbolic point for an SFT base");
  return *p;
}

const TorusPoint& as_planar(const Point& x) {
  const auto* p = std::get_if<TorusPoint>(&x);
  if (!p) throw Error("expected a torus point for a toral base");
  return *p;
}

// shifts needed so a disagreement-free window of that many symbols
// puts the pair inside the epsilon ball
std::int64_t epsilon_depth(double lambda, double epsilon) {
  double k = -std::log(epsilon) / lambda;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(k - 1e-9)));
}

}  // namespace

const SftSystem& as_sft(const System& sys) {
  const auto* s = std::get_if<SftSystem>(&sys);
  if (!s) throw Error("operation requires an SFT base system");
  return *s;
}

const TorusSystem& as_torus(const System& sys) {
  const auto* s = std::get_if<TorusSystem>(&sys);
  if (!s) throw Error("operation requires a toral base system");
  return *s;
}

Point iterate(const System& sys, const Point& x, std::int64_t n) {
  if (std::holds_alternative<SftSystem>(sys)) return as_symbolic(x).shifted(n);
  return std::get<TorusSystem>(sys).iterate(as_planar(x), n);
}

double distance(const System& sys, const Point& x, const Point& y) {
  if (const auto* s = std::get_if<SftSystem>(&sys)) return s->distance(as_symbolic(x), as_symbolic(y));
  return std::get<TorusSystem>(sys).distance(as_planar(x), as_planar(y));
}

double lambda_of(const System& sys) {
  return std::visit([](const auto& s) { return s.lambda(); }, sys);
}

double epsilon_of(const System& sys) {
  return std::visit([](const auto& s) { return s.epsilon(); }, sys);
}

double tau_of(const System& sys) {
  return std::visit([](const auto& s) { return s.tau(); }, sys);
}

Point bracket(const System& sys, const Point& x, const Point& y) {
  if (const auto* s = std::get_if<SftSystem>(&sys)) return s->bracket(as_symbolic(x), as_symbolic(y));
  return std::get<TorusSystem>(sys).bracket(as_planar(x), as_planar(y));
}

std::vector<Point> periodic_points(const System& sys, int n, std::int64_t budget) {
  std::vector<Point> out;
  if (const auto* s = std::get_if<SftSystem>(&sys)) {
    for (auto& p : s->periodic_points(n, budget)) out.emplace_back(std::move(p));
  } else {
    for (auto& p : std::get<TorusSystem>(sys).periodic_points(n, budget)) out.emplace_back(std::move(p));
  }
  return out;
}

std::int64_t periodic_count_formula(const System& sys, int n) {
  return std::visit([n](const auto& s) { return s.periodic_count_formula(n); }, sys);
}

std::string point_key(const Point& x) {
  if (const auto* p = std::get_if<SymbolicPoint>(&x)) return p->canonical_key();
  return std::get<TorusPoint>(x).key();
}

bool same_point(const System& sys, const Point& x, const Point& y) {
  if (std::holds_alternative<SftSystem>(sys)) return as_symbolic(x).same_sequence(as_symbolic(y));
  const auto& t = std::get<TorusSystem>(sys);
  return t.distance(as_planar(x), as_planar(y)) < 1e-12;
}

std::optional<std::int64_t> stable_reduction(const System& sys, const Point& y, const Point& z) {
  if (const auto* s = std::get_if<SftSystem>(&sys)) {
    auto from = s->stable_from(as_symbolic(y), as_symbolic(z));
    if (!from) return std::nullopt;
    std::int64_t depth = epsilon_depth(s->lambda(), s->epsilon());
    return std::max<std::int64_t>(0, *from - 1 + depth);
  }
  const auto& t = std::get<TorusSystem>(sys);
  auto off = t.stable_offset(as_planar(y), as_planar(z));
  if (!off) return std::nullopt;
  double a = std::abs(*off);
  if (a <= t.epsilon()) return 0;
  return static_cast<std::int64_t>(std::ceil(std::log(a / t.epsilon()) / t.lambda() + 1e-12));
}

std::optional<std::int64_t> unstable_reduction(const System& sys, const Point& y, const Point& z) {
  if (const auto* s = std::get_if<SftSystem>(&sys)) {
    auto until = s->unstable_until(as_symbolic(y), as_symbolic(z));
    if (!until) return std::nullopt;
    std::int64_t depth = epsilon_depth(s->lambda(), s->epsilon());
    return std::max<std::int64_t>(0, depth - 1 - *until);
  }
  const auto& t = std::get<TorusSystem>(sys);
  auto off = t.unstable_offset(as_planar(y), as_planar(z));
  if (!off) return std::nullopt;
  double a = std::abs(*off);
  if (a <= t.epsilon()) return 0;
  return static_cast<std::int64_t>(std::ceil(std::log(a / t.epsilon()) / t.lambda() + 1e-12));
}

bool is_homoclinic(const System& sys, const Point& y, const Point& x) {
  if (const auto* s = std::get_if<SftSystem>(&sys)) {
    const auto& ys = as_symbolic(y);
    const auto& xs = as_symbolic(x);
    return s->stable_from(ys, xs).has_value() && s->unstable_until(ys, xs).has_value();
  }
  const auto& t = std::get<TorusSystem>(sys);
  const auto& yt = as_planar(y);
  const auto& xt = as_planar(x);
  if (t.distance(yt, xt) < 1e-12) return true;
  return t.stable_offset(xt, yt).has_value() && t.unstable_offset(xt, yt).has_value();
}

namespace {

// fitted_gamma = -slope of log residual against min(j, n-j); NaN when the
// usable residuals span fewer than two grid values
double fit_decay(const std::vector<double>& residuals, int n) {
  std::vector<double> xs, ys;
  for (int j = 0; j <= n; ++j) {
    double d = residuals[static_cast<std::size_t>(j)];
    if (d <= 1e-12) continue;
    xs.push_back(static_cast<double>(std::min<std::int64_t>(j, n - j)));
    ys.push_back(std::log(d));
  }
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  bool degenerate = std::all_of(xs.begin(), xs.end(), [&](double v) { return v == xs.front(); });
  if (degenerate) return std::numeric_limits<double>::quiet_NaN();
  return -least_squares(xs, ys).slope;
}

ClosingReport closing_sft(const SftSystem& sys, const SymbolicPoint& z, int n, double eps0) {
  double defect = sys.distance(z.shifted(n), z);
  if (!(defect < eps0))
    throw NotClose("closing precondition failed: d(f^n z, z) = " + std::to_string(defect) +
                   " >= " + std::to_string(eps0));

  SymbolicPoint p = SymbolicPoint::periodic(z.window(0, n - 1));
  sys.validate_point(p);

  ClosingReport rep;
  rep.residuals.resize(static_cast<std::size_t>(n) + 1);
  rep.defect = defect;
  rep.c_claimed = 1.0;
  rep.gamma_claimed = sys.lambda();

  // track the exponent gap min(j, n-j) - N_j exactly; the shadowing bound
  // holds iff it stays <= 0
  std::int64_t worst_gap = std::numeric_limits<std::int64_t>::min();
  for (int j = 0; j <= n; ++j) {
    SymbolicPoint zj = z.shifted(j);
    SymbolicPoint pj = p.shifted(j);
    auto agree = zj.agreement(pj);
    if (!agree) {
      rep.residuals[static_cast<std::size_t>(j)] = 0.0;
      continue;
    }
    rep.residuals[static_cast<std::size_t>(j)] = std::exp(-sys.lambda() * static_cast<double>(*agree));
    worst_gap = std::max(worst_gap, std::min<std::int64_t>(j, n - j) - *agree);
  }
  rep.worst_ratio = worst_gap == std::numeric_limits<std::int64_t>::min()
                        ? 0.0
                        : std::exp(sys.lambda() * static_cast<double>(worst_gap));
  rep.fitted_gamma = fit_decay(rep.residuals, n);
  rep.p = std::move(p);
  return rep;
}

ClosingReport closing_torus(const TorusSystem& sys, const TorusPoint& z0, int n, double eps0) {
  TorusPoint z = z0.exact ? z0 : sys.snap_rational(z0);
  double defect = sys.distance(sys.iterate(z, n), z);
  if (!(defect < eps0))
    throw NotClose("closing precondition failed: d(f^n z, z) = " + std::to_string(defect) +
                   " >= " + std::to_string(eps0));

  auto solved = sys.closing_solve(z, n);

  ClosingReport rep;
  rep.defect = std::hypot(solved.defect[0], solved.defect[1]);
  rep.gamma_claimed = sys.lambda();
  // orbit error splits along the eigenbasis; each component is driven by the
  // matching component of the defect and decays geometrically from its end,
  // so C = 2 cond(basis) / (1 - e^{-lambda}) times the defect dominates
  Matrix basis(2, 2);
  basis << sys.v_s()[0], sys.v_u()[0], sys.v_s()[1], sys.v_u()[1];
  rep.c_claimed = std::max(rep.defect * 2.0 * cond_2(basis) / (1.0 - std::exp(-sys.lambda())), 1e-300);

  rep.residuals.resize(static_cast<std::size_t>(n) + 1);
  double worst = 0.0;
  for (int j = 0; j <= n; ++j) {
    double d = sys.distance(sys.iterate(z, j), sys.iterate(solved.p, j));
    rep.residuals[static_cast<std::size_t>(j)] = d;
    double bound = rep.c_claimed * std::exp(-sys.lambda() * static_cast<double>(std::min(j, n - j)));
    worst = std::max(worst, d / bound);
  }
  rep.worst_ratio = worst;
  rep.fitted_gamma = fit_decay(rep.residuals, n);
  rep.p = solved.p;
  return rep;
}

}  // namespace

ClosingReport closing(const System& sys, const Point& z, int n, double eps0) {
  if (n < 1) throw Error("closing needs n >= 1");
  if (eps0 <= 0.0) eps0 = epsilon_of(sys);
  if (const auto* s = std::get_if<SftSystem>(&sys)) return closing_sft(*s, as_symbolic(z), n, eps0);
  return closing_torus(std::get<TorusSystem>(sys), as_planar(z), n, eps0);
}

Point homoclinic_truncate(const System& sys, const Point& y, const Point& x, int N) {
  const SftSystem& s = as_sft(sys);
  const auto& ys = as_symbolic(y);
  const auto& xs = as_symbolic(x);

  int a = xs.at(0);
  if (xs.agreement(SymbolicPoint::constant(a)).has_value())
    throw Error("homoclinic truncation needs a fixed point to splice onto");
  if (!s.admissible(a, a)) throw Error("fixed-point symbol is not self-admissible");

  int r = s.connector_radius();
  std::int64_t W = static_cast<std::int64_t>(N) - r;
  if (W < 1) throw Error("truncation window too small: N must exceed the connector radius");

  Word mid = ys.window(-W, W);
  const Word& via_in = s.connector(a, mid.front()).via;
  const Word& via_out = s.connector(mid.back(), a).via;

  Word core;
  core.reserve(via_in.size() + mid.size() + via_out.size() + 2);
  core.push_back(a);
  core.insert(core.end(), via_in.begin(), via_in.end());
  core.insert(core.end(), mid.begin(), mid.end());
  core.insert(core.end(), via_out.begin(), via_out.end());
  core.push_back(a);
  int origin = static_cast<int>(1 + via_in.size() + W);

  SymbolicPoint out({a}, core, {a}, origin);
  s.validate_point(out);
  return out;
}

Point random_point(const System& sys, Rng& rng) {
  if (const auto* s = std::get_if<SftSystem>(&sys)) return random_symbolic_point(*s, rng, 24);
  return TorusPoint::from_coords(rng.uniform(), rng.uniform());
}

Point nearby_point(const System& sys, Rng& rng, const Point& x, double target) {
  if (target <= 0.0 || target >= 0.5) throw Error("nearby_point target must be in (0, 0.5)");
  if (const auto* s = std::get_if<SftSystem>(&sys)) {
    const auto& xs = as_symbolic(x);
    auto N = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::llround(-std::log(target) / s->lambda())));
    bool in_past = rng.uniform() < 0.5;  // which side of the origin gets the change
    for (int attempt = 0; attempt < 2; ++attempt) {
      auto cand =
          in_past ? stable_perturbation(*s, rng, xs, N) : unstable_perturbation(*s, rng, xs, N);
      if (cand) return *cand;
      in_past = !in_past;
    }
    throw InsufficientPairs("no admissible perturbation at scale N = " + std::to_string(N));
  }
  const auto& xt = as_planar(x);
  double ang = rng.uniform(0.0, 6.283185307179586);
  return TorusPoint::from_coords(xt.c[0] + target * std::cos(ang),
                                 xt.c[1] + target * std::sin(ang));
}

}  // namespace twistlab
