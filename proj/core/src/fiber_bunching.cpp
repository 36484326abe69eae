#include "twistlab/fiber_bunching.hpp"

#include <algorithm>
#include <cmath>

#include "twistlab/errors.hpp"
#include "twistlab/fit.hpp"

namespace twistlab {

namespace {

// alpha^{-j} for j = 0..len as explicit conjugator pairs; one composition
// step each, so deep series cutoffs stay linear instead of quadratic
struct NegLadder {
  std::vector<std::pair<Matrix, Matrix>> p;
  bool ti = false;

  Matrix apply(std::size_t j, const Matrix& x) const {
    if (j == 0) return x;
    const auto& [m, minv] = p[j];
    if (ti && (j & 1)) return m * inverse(x).transpose() * minv;
    return m * x * minv;
  }
};

NegLadder build_neg_ladder(const Automorphism& a, int len) {
  NegLadder lad;
  lad.ti = a.flips();
  int d = a.dim();
  TwistPower base = a.power(-1);
  lad.p.reserve(static_cast<std::size_t>(len) + 1);
  lad.p.emplace_back(Matrix::Identity(d, d), Matrix::Identity(d, d));
  for (int j = 1; j <= len; ++j) {
    const auto& prev = lad.p.back();
    Matrix m = base.m * (lad.ti ? Matrix(prev.second.transpose()) : prev.first);
    Matrix minv = (lad.ti ? Matrix(prev.first.transpose()) : prev.second) * base.minv;
    lad.p.emplace_back(std::move(m), std::move(minv));
  }
  return lad;
}

double distortion(const Matrix& m) { return op_norm(m) * op_norm(inverse(m)); }

}  // namespace

void require_bunched(const FiberBunchingReport& r) {
  if (r.satisfied) return;
  throw NotCertifiable(r.note.empty() ? "fiber bunching is not certified for this cocycle"
                                      : "fiber bunching not certified: " + r.note);
}

ThetaData estimate_theta(const TwistedCocycle& c, const std::vector<Point>& sample, int n_max) {
  if (sample.empty()) throw Error("estimate_theta needs a nonempty sample");
  if (n_max < 8) throw Error("estimate_theta needs n_max >= 8");

  const System& base = c.base();
  std::vector<double> ns, logd, vals;
  auto record = [&](int n, double dval) {
    ns.push_back(static_cast<double>(n));
    vals.push_back(dval);
    logd.push_back(std::log(std::max(dval, 1.0)));
  };

  for (const Point& x : sample) {
    // forward: distortion of alpha^{-n}(A^n(x))
    Matrix p = c.generator_at(x);
    Point cur = x;
    for (int n = 1; n <= n_max; ++n) {
      record(n, distortion(c.alpha().apply(-n, p)));
      if (n < n_max) {
        cur = iterate(base, cur, 1);
        p = c.generator_at(cur) * c.alpha().apply(1, p);
      }
    }
    // backward: alpha^{n}(A^{-n}(x)) = A^n(f^{-n} x)^{-1}, so the distortion
    // is that of the plain backward-orbit product
    Point w = iterate(base, x, -1);
    Matrix q = c.generator_at(w);
    for (int n = 1; n <= n_max; ++n) {
      record(n, distortion(q));
      if (n < n_max) {
        w = iterate(base, w, -1);
        q = q * c.alpha().apply(n, c.generator_at(w));
      }
    }
  }

  double slope = least_squares(ns, logd).slope;
  ThetaData out;
  out.theta = std::max(0.0, slope);
  out.c_theta = 1.0;
  for (std::size_t i = 0; i < ns.size(); ++i)
    out.c_theta = std::max(out.c_theta, vals[i] * std::exp(-out.theta * ns[i]));
  out.n_range = n_max;
  return out;
}

FiberBunchingReport certify(const TwistedCocycle& c, double nu, double lambda,
                            const GrowthCertificate& growth, const ThetaData& theta,
                            Strictness strictness) {
  if (nu <= 0.0 || nu > 1.0) throw ConfigError("certify: nu must lie in (0, 1]");
  if (lambda <= 0.0) throw ConfigError("certify: lambda must be positive");

  FiberBunchingReport r;
  r.theta = theta.theta;
  r.c_theta = theta.c_theta;
  r.rho = growth.rho;
  r.c_rho = growth.c_growth;
  r.nu = nu;
  r.lambda = lambda;
  r.strictness = strictness;
  r.n_range = std::min(growth.n_range, theta.n_range);

  double w = strictness == Strictness::FiveTwo ? 5.0 : 7.0;
  r.margin = nu * lambda - w * growth.rho - 2.0 * theta.theta;
  r.delta = r.margin > 0.0 ? 0.5 * r.margin : 0.0;
  r.satisfied = r.margin > 0.0 && growth.certifiable;

  if (!growth.certifiable)
    r.note = "growth certificate is empirical only; " + growth.note;
  else if (r.margin <= 0.0)
    r.note = "margin nonpositive at requested strictness";
  if (std::abs(lambda - lambda_of(c.base())) > 1e-9)
    r.note += std::string(r.note.empty() ? "" : "; ") + "lambda differs from the base rate";
  return r;
}

double AdaptedNormFamily::norm_k(int k, const Vector& v) const {
  const Matrix& g = grams.at(static_cast<std::size_t>(k));
  double q = v.dot(g * v);
  return std::sqrt(std::max(q, 0.0));
}

AdaptedNormFamily adapted_norms(const TwistedCocycle& c, const Point& x, int K,
                                const FiberBunchingReport& report, int M) {
  require_bunched(report);
  if (K < 1) throw Error("adapted_norms needs K >= 1");
  const int d = c.dim();
  const System& base = c.base();
  const double delta = report.delta;
  const double w = 2.0 * report.theta + delta;

  // per-term envelope: distortion of B_m is at most
  // kappa_alpha(k)^2 c_theta e^{theta |m|}, so terms decay like e^{-delta |m|}
  double kap_max = 1.0;
  for (int k = 0; k <= K; ++k) kap_max = std::max(kap_max, c.alpha().kappa(-k));
  const double term_env = std::pow(kap_max, 4) * report.c_theta * report.c_theta;
  auto tail_at = [&](int m) {
    return 2.0 * term_env * std::exp(-delta * (m + 1)) / (1.0 - std::exp(-delta));
  };

  constexpr int kCutoffCap = 2000;
  constexpr double kTailTol = 1e-10;
  if (M <= 0) {
    M = 4;
    while (M <= kCutoffCap && tail_at(M) > kTailTol) ++M;
  }
  if (M > kCutoffCap || tail_at(M) > kTailTol)
    throw TailTooLarge("adapted_norms: no cutoff below " + std::to_string(kCutoffCap) +
                       " certifies a tail under 1e-10 (delta = " + std::to_string(delta) + ")");

  AdaptedNormFamily fam;
  fam.anchor = x;
  fam.depth = K;
  fam.cutoff = M;
  fam.weight = w;
  fam.delta = delta;
  fam.tail_bound = tail_at(M);
  fam.references.resize(static_cast<std::size_t>(K) + 1);
  fam.grams.resize(static_cast<std::size_t>(K) + 1);
  fam.steps.resize(static_cast<std::size_t>(K));

  NegLadder lad = build_neg_ladder(c.alpha(), M + K);

  // references u_k along the twisted orbit of u_0 = e_1
  Vector u = Vector::Zero(d);
  u(0) = 1.0;
  fam.references[0] = u;
  {
    Point a = x;
    for (int k = 1; k <= K; ++k) {
      Matrix t = lad.apply(static_cast<std::size_t>(k), c.generator_at(a));
      a = iterate(base, a, 1);
      fam.steps[static_cast<std::size_t>(k - 1)] = t;
      u = t * u;
      double nrm = u.norm();
      if (nrm < 1e-300) throw Error("adapted_norms: reference vector collapsed");
      u /= nrm;
      fam.references[static_cast<std::size_t>(k)] = u;
    }
  }

  Point anchor_k = x;
  for (int k = 0; k <= K; ++k) {
    const Vector& uk = fam.references[static_cast<std::size_t>(k)];
    Matrix gram = Matrix::Zero(d, d);
    auto add_term = [&](const Matrix& b, int m) {
      double denom = (b * uk).squaredNorm() * std::exp(w * std::abs(m));
      gram += (b.transpose() * b) / denom;
    };

    add_term(Matrix::Identity(d, d), 0);

    // m > 0: B_m = alpha^{-m-k}(A^m(f^k x)), accumulated incrementally
    {
      Matrix p = c.generator_at(anchor_k);
      Point cur = anchor_k;
      for (int m = 1; m <= M; ++m) {
        add_term(lad.apply(static_cast<std::size_t>(m + k), p), m);
        if (m < M) {
          cur = iterate(base, cur, 1);
          p = c.generator_at(cur) * c.alpha().apply(1, p);
        }
      }
    }
    // m < 0: B_{-m} = alpha^{-k}(Q_m^{-1}) with Q_m = A^m(f^{k-m} x)
    {
      Point wpt = iterate(base, anchor_k, -1);
      Matrix q = c.generator_at(wpt);
      for (int m = 1; m <= M; ++m) {
        add_term(lad.apply(static_cast<std::size_t>(k), inverse(q)), -m);
        if (m < M) {
          wpt = iterate(base, wpt, -1);
          q = q * c.alpha().apply(m, c.generator_at(wpt));
        }
      }
    }

    fam.grams[static_cast<std::size_t>(k)] = 0.5 * (gram + gram.transpose());
    if (k < K) anchor_k = iterate(base, anchor_k, 1);
  }
  return fam;
}

double knorm_step_check(const AdaptedNormFamily& family, int k) {
  if (k < 1 || k > family.depth) throw Error("knorm_step_check: k out of range");
  const Matrix& t = family.steps[static_cast<std::size_t>(k - 1)];
  Eigen::LLT<Matrix> lo(family.grams[static_cast<std::size_t>(k - 1)]);
  Eigen::LLT<Matrix> hi(family.grams[static_cast<std::size_t>(k)]);
  if (lo.info() != Eigen::Success || hi.info() != Eigen::Success)
    throw Error("knorm_step_check: gram matrix not positive definite");
  Matrix l_lo = lo.matrixL();
  Matrix l_hi = hi.matrixL();
  Matrix m = l_hi.transpose() * t * l_lo.transpose().inverse();
  return cond_2(m);
}

double stable_growth_check(const TwistedCocycle& c, const Point& x, const Point& y, int n_max,
                           const FiberBunchingReport& report) {
  if (n_max < 1) throw Error("stable_growth_check needs n_max >= 1");
  const System& base = c.base();
  const double eps = epsilon_of(base) * (1.0 + 1e-12);

  {
    Point cx = x, cy = y;
    for (int j = 0; j <= n_max; ++j) {
      if (distance(base, cx, cy) > eps)
        throw NotStablePair("pair leaves the epsilon tube at step " + std::to_string(j));
      if (j < n_max) {
        cx = iterate(base, cx, 1);
        cy = iterate(base, cy, 1);
      }
    }
  }

  const double rate = 4.0 * report.rho + 2.0 * report.theta + report.delta;
  double worst = 0.0;
  Matrix px = c.generator_at(x), py = c.generator_at(y);
  Point cx = x, cy = y;
  for (int n = 1; n <= n_max; ++n) {
    double v = op_norm(c.alpha().apply(-n, py)) * op_norm(inverse(c.alpha().apply(-n, px))) *
               std::exp(-rate * n);
    worst = std::max(worst, v);
    if (n < n_max) {
      cx = iterate(base, cx, 1);
      cy = iterate(base, cy, 1);
      px = c.generator_at(cx) * c.alpha().apply(1, px);
      py = c.generator_at(cy) * c.alpha().apply(1, py);
    }
  }
  return worst;
}

}  // namespace twistlab
