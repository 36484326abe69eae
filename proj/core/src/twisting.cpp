#include "twistlab/twisting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twistlab/errors.hpp"
#include "twistlab/fit.hpp"
#include "twistlab/rng.hpp"

namespace twistlab {

namespace {

constexpr double kDistortionCap = 1e12;

Matrix phi(const Matrix& x) { return inverse(x).transpose(); }

// smallest C >= 1 with values[i] <= C * exp(rho * ns[i]) over the whole range
double envelope_constant(const std::vector<double>& ns, const std::vector<double>& values,
                         double rho) {
  double c = 1.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    c = std::max(c, values[i] * std::exp(-rho * ns[i]));
  }
  return c;
}

}  // namespace

void require_certified(const GrowthCertificate& cert) {
  if (cert.certifiable) return;
  throw NotCertifiable(cert.note.empty()
                           ? "automorphism growth certificate is empirical only"
                           : cert.note);
}

Automorphism::Automorphism(int d, bool ti, Matrix m, TwistKind kind, int n_cache)
    : d_(d), ti_(ti), m_(std::move(m)), kind_(kind) {
  if (d_ < 1) throw Error("automorphism dimension must be >= 1");
  if (m_.rows() != d_ || m_.cols() != d_) throw Error("conjugator shape mismatch");
  if (n_cache < 1) throw Error("power cache depth must be >= 1");

  Power id{Matrix::Identity(d_, d_), Matrix::Identity(d_, d_), 1.0, true};
  Power base{m_, inverse(m_), 0.0, true};
  base.kappa = op_norm(base.m) * op_norm(base.minv);
  base.ok = std::isfinite(base.kappa) && base.kappa <= kDistortionCap;
  // alpha^{-1} = (M^{-1}, 0) without the flip, (M^T, 1) with it
  Power ibase{ti_ ? Matrix(m_.transpose()) : base.minv, ti_ ? Matrix(base.minv.transpose()) : m_,
              base.kappa, base.ok};

  pos_.reserve(static_cast<std::size_t>(n_cache) + 1);
  neg_.reserve(static_cast<std::size_t>(n_cache) + 1);
  pos_.push_back(id);
  neg_.push_back(id);
  for (int k = 1; k <= n_cache; ++k) {
    pos_.push_back(raise(base, pos_.back()));
    neg_.push_back(raise(ibase, neg_.back()));
  }
}

Automorphism::Power Automorphism::raise(const Power& base, const Power& prev) const {
  if (!prev.ok || !base.ok) {
    Power dead = prev;
    dead.ok = false;
    return dead;
  }
  Power next;
  next.m = base.m * (ti_ ? Matrix(prev.minv.transpose()) : prev.m);
  next.minv = (ti_ ? Matrix(prev.m.transpose()) : prev.minv) * base.minv;
  next.kappa = op_norm(next.m) * op_norm(next.minv);
  next.ok = std::isfinite(next.kappa) && next.kappa <= kDistortionCap;
  return next;
}

Automorphism Automorphism::identity(int d, int n_cache) {
  return Automorphism(d, false, Matrix::Identity(d, d), TwistKind::Identity, n_cache);
}

Automorphism Automorphism::inner(const Matrix& L, int n_cache) {
  if (L.rows() != L.cols()) throw Error("inner automorphism needs a square matrix");
  if (cond_2(L) > 1e14) throw IllConditioned("inner conjugator is numerically singular");
  return Automorphism(static_cast<int>(L.rows()), false, L, TwistKind::Inner, n_cache);
}

Automorphism Automorphism::transpose_inverse(int d, int n_cache) {
  return Automorphism(d, true, Matrix::Identity(d, d), TwistKind::TransposeInverse, n_cache);
}

Automorphism Automorphism::compose(const std::vector<Automorphism>& parts, int n_cache) {
  if (parts.empty()) throw Error("composition needs at least one part");
  int d = parts.front().dim();
  bool ti = false;
  Matrix m = Matrix::Identity(d, d);
  // canonical collapse: (M1,t1) after (M2,t2) = (M1 phi^{t1}(M2), t1 xor t2);
  // the list is applied first-to-last, so each new part acts from the outside
  for (const auto& p : parts) {
    if (p.dim() != d) throw Error("composition parts must share the dimension");
    m = p.m_ * (p.ti_ ? phi(m) : m);
    ti = ti != p.ti_;
  }
  return Automorphism(d, ti, std::move(m), TwistKind::Composition, n_cache);
}

Automorphism::Power Automorphism::power_at(std::int64_t n) const {
  const auto& side = n >= 0 ? pos_ : neg_;
  std::uint64_t a = n >= 0 ? static_cast<std::uint64_t>(n) : static_cast<std::uint64_t>(-n);
  if (a < side.size()) return side[a];

  Power base = n >= 0 ? pos_[1] : neg_[1];
  Power acc = side.back();
  for (std::uint64_t k = side.size() - 1; k < a; ++k) acc = raise(base, acc);
  return acc;
}

Matrix Automorphism::apply(std::int64_t n, const Matrix& X) const {
  if (n == 0) return X;
  Power p = power_at(n);
  if (!p.ok)
    throw IllConditioned("automorphism power " + std::to_string(n) +
                         " exceeds the conjugator distortion cap");
  bool flip = ti_ && (n & 1);
  if (flip) return p.m * phi(X) * p.minv;
  return p.m * X * p.minv;
}

double Automorphism::kappa(std::int64_t n) const { return power_at(n).kappa; }

TwistPower Automorphism::power(std::int64_t n) const {
  Power p = power_at(n);
  if (!p.ok)
    throw IllConditioned("automorphism power " + std::to_string(n) +
                         " exceeds the conjugator distortion cap");
  return TwistPower{p.m, p.minv, ti_ && (n & 1), p.kappa};
}

bool Automorphism::is_identity_action(double tol) const {
  if (ti_) return false;
  double c = m_(0, 0);
  if (c == 0.0) return false;
  return rel_diff(m_, c * Matrix::Identity(d_, d_)) < tol;
}

GrowthCertificate Automorphism::certify_growth(int n_max, int sample_size, Rng& rng) const {
  if (n_max < 4) throw Error("growth certification needs n_max >= 4");

  GrowthCertificate cert;
  cert.n_range = n_max;

  if (!ti_) {
    // flip-free: alpha^n is the linear map X -> M_n X M_n^{-1}; its operator
    // norm and Lipschitz constant both equal kappa(n) = ‖M_n‖ ‖M_n^{-1}‖
    // exactly, and kappa(-n) = kappa(n)
    std::vector<double> ns, logk, vals;
    for (int n = 1; n <= n_max; ++n) {
      double k = kappa(n);
      ns.push_back(static_cast<double>(n));
      vals.push_back(k);
      logk.push_back(std::log(k));
    }
    double slope = least_squares(ns, logk).slope;
    cert.rho = std::max(0.0, slope);
    cert.c_growth = cert.c_lip = envelope_constant(ns, vals, cert.rho);
    cert.method = FitMethod::Exact;
    cert.certifiable = true;
    cert.note = "conjugation acts linearly; envelope exact over |n| <= " + std::to_string(n_max);
    return cert;
  }

  if (sample_size < 2) throw Error("empirical certification needs sample_size >= 2");
  std::vector<double> ns, growth, lip;
  for (int n = -n_max; n <= n_max; ++n) {
    if (n == 0) continue;
    double g = 0.0, l = 0.0;
    for (int s = 0; s < sample_size; ++s) {
      Matrix t1 = random_invertible(rng, d_);
      Matrix t2 = t1 + 0.02 * op_norm(t1) * random_gaussian(rng, d_);
      Matrix a1 = apply(n, t1);
      g = std::max(g, op_norm(a1) / op_norm(t1));
      double sep = op_norm(t1 - t2);
      if (sep > 1e-12) l = std::max(l, op_norm(a1 - apply(n, t2)) / sep);
    }
    ns.push_back(std::abs(static_cast<double>(n)));
    growth.push_back(g);
    lip.push_back(l);
  }
  std::vector<double> logg(growth.size()), logl(lip.size());
  std::transform(growth.begin(), growth.end(), logg.begin(),
                 [](double v) { return std::log(std::max(v, 1e-300)); });
  std::transform(lip.begin(), lip.end(), logl.begin(),
                 [](double v) { return std::log(std::max(v, 1e-300)); });
  double slope = std::max(least_squares(ns, logg).slope, least_squares(ns, logl).slope);
  cert.rho = std::max(0.0, slope);
  cert.c_growth = envelope_constant(ns, growth, cert.rho);
  cert.c_lip = envelope_constant(ns, lip, cert.rho);
  cert.method = FitMethod::Empirical;
  cert.certifiable = false;
  cert.note =
      "transpose-inverse component: not globally norm-Lipschitz, constants "
      "hold only on the sampled family";
  return cert;
}

}  // namespace twistlab
