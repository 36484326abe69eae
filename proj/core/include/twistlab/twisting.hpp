#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twistlab/matrix.hpp"

namespace twistlab {

class Rng;

enum class TwistKind { Identity, Inner, TransposeInverse, Composition };
enum class FitMethod { Exact, Empirical };

struct GrowthCertificate {
  double rho = 0.0;
  double c_growth = 1.0;
  double c_lip = 1.0;
  int n_range = 0;
  FitMethod method = FitMethod::Exact;
  bool certifiable = true;
  std::string note;
};

// throws NotCertifiable when the certificate is empirical-only
void require_certified(const GrowthCertificate& cert);

// canonical form of one power: X -> m phi^flip(X) minv
struct TwistPower {
  Matrix m, minv;
  bool flip = false;
  double kappa = 1.0;  // ‖m‖ ‖minv‖
};

// Automorphism of GL(d, R) generated by Identity, Inner(L): X -> L X L^{-1},
// TransposeInverse: X -> (X^T)^{-1}, and compositions. Every composition
// collapses to the canonical form X -> M phi^t(X) M^{-1} with
// phi = transpose-inverse and t in {0,1}, since phi conjugates Inner(L) to
// Inner(phi(L)) and phi^2 = id. Powers are cached eagerly for |n| <= n_cache;
// immutable after construction, safe to share across threads.
class Automorphism {
 public:
  static Automorphism identity(int d, int n_cache = kDefaultCache);
  static Automorphism inner(const Matrix& L, int n_cache = kDefaultCache);
  static Automorphism transpose_inverse(int d, int n_cache = kDefaultCache);
  // applied in list order: the first entry acts on X first
  static Automorphism compose(const std::vector<Automorphism>& parts, int n_cache = kDefaultCache);

  int dim() const { return d_; }
  TwistKind kind() const { return kind_; }
  bool flips() const { return ti_; }  // canonical form carries one phi
  int cache_depth() const { return static_cast<int>(pos_.size()) - 1; }

  // alpha^n(X); throws IllConditioned when the conjugator distortion
  // ‖M_n‖ ‖M_n^{-1}‖ exceeds 1e12
  Matrix apply(std::int64_t n, const Matrix& X) const;
  // conjugator distortion ‖M_n‖ ‖M_n^{-1}‖ of alpha^n
  double kappa(std::int64_t n) const;
  // explicit canonical form of alpha^n; IllConditioned past the cap
  TwistPower power(std::int64_t n) const;

  // acts as the identity map on GL(d) (conjugator a scalar matrix, no flip)
  bool is_identity_action(double tol = 1e-12) const;

  // Growth/Lipschitz envelope over |n| <= n_max. Flip-free automorphisms act
  // linearly on matrices, so the fit is exact: the operator and Lipschitz
  // norms both equal the conjugator distortion. With a flip the certificate
  // is empirical over the sample and flagged non-certifiable (the map is not
  // globally norm-Lipschitz).
  GrowthCertificate certify_growth(int n_max, int sample_size, Rng& rng) const;

  static constexpr int kDefaultCache = 512;

 private:
  struct Power {
    Matrix m, minv;
    double kappa = 1.0;
    bool ok = true;
  };

  Automorphism(int d, bool ti, Matrix m, TwistKind kind, int n_cache);

  Power raise(const Power& base, const Power& prev) const;
  Power power_at(std::int64_t n) const;  // cached or extended on the fly

  int d_;
  bool ti_;
  Matrix m_;
  TwistKind kind_;
  std::vector<Power> pos_, neg_;  // alpha^k, alpha^{-k} for k <= n_cache
};

}  // namespace twistlab
