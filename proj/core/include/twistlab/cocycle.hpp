#pragma once

#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "twistlab/matrix.hpp"
#include "twistlab/system.hpp"
#include "twistlab/twisting.hpp"

namespace twistlab {

struct HolderData {
  double nu = 1.0;
  double c = 0.0;
  bool analytic = true;  // true: bound derived from structure; false: sampled envelope
};

// coefficient of cos/sin(2 pi (kx x1 + ky x2)); the constant part is the
// kx = ky = 0 cosine term
struct TrigTerm {
  int kx = 0, ky = 0;
  Matrix c_cos, c_sin;
};

// Matrix-valued map on the base. Cheap to copy (shared immutable state).
class Generator {
 public:
  // SFT: one matrix per admissible word of length 2*radius+1 centred at the
  // origin coordinate
  static Generator locally_constant(int radius, std::map<Word, Matrix> table, double lambda,
                                    double nu = 1.0);
  // SFT: A(x) = prod_{i=-r..r} (I + eps e^{-nu lambda |i|} site[i][x_i]),
  // ordered by i; genuinely nu-Holder at every dyadic scale
  static Generator symbolic_holder(int radius, double eps,
                                   std::vector<std::vector<Matrix>> site_matrices, double lambda,
                                   double nu);
  static Generator torus_smooth(std::vector<TrigTerm> terms, double nu = 1.0);
  // B(x) = Q(f x)^{-1} A(x) alpha(Q(x))
  static Generator conjugated(std::shared_ptr<const Generator> base,
                              std::shared_ptr<const Generator> q,
                              std::shared_ptr<const Automorphism> alpha, HolderData holder);

  int dim() const;
  const HolderData& holder() const;
  bool symbolic_domain() const;  // needs an SFT base (vs a toral one)
  int radius() const;            // locally constant / symbolic holder; -1 otherwise
  // checks every admissible window / symbol is handled, recursing through
  // conjugations; throws ConfigError with the first gap
  void validate_coverage(const SftSystem& sys) const;

  // A(x); every value is condition-checked (cap 1e8)
  Matrix eval(const System& sys, const Point& x) const;

 private:
  struct Impl;
  explicit Generator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

class TwistedCocycle {
 public:
  TwistedCocycle(System base, Automorphism alpha, Generator gen);

  const System& base() const { return *base_; }
  const Automorphism& alpha() const { return *alpha_; }
  const Generator& generator() const { return gen_; }
  std::shared_ptr<const System> base_ptr() const { return base_; }
  std::shared_ptr<const Automorphism> alpha_ptr() const { return alpha_; }
  int dim() const;

  Matrix generator_at(const Point& x) const;

  // A_alpha^n(x); positive n accumulates A(f^{n-1}x) alpha(A(f^{n-2}x)) ...
  // alpha^{n-1}(A(x)) incrementally, negative n uses
  // alpha^n(A_alpha^{-n}(f^n x)^{-1}); products are condition-monitored
  Matrix evaluate(const Point& x, std::int64_t n) const;

  // ‖A^{m+n}(x) - A^n(f^m x) alpha^n(A^m(x))‖ / ‖A^{m+n}(x)‖
  double law_residual(const Point& x, std::int64_t m, std::int64_t n) const;

  // one step of the skew product (x, g) -> (f x, A(x) alpha(g))
  std::pair<Point, Matrix> skew_step(const Point& x, const Matrix& g) const;

  // same base and twist, different generator
  TwistedCocycle with_generator(Generator gen) const;

 private:
  std::shared_ptr<const System> base_;
  std::shared_ptr<const Automorphism> alpha_;
  Generator gen_;
};

// cocycle generated by B(x) = Q(f x)^{-1} A(x) alpha(Q(x)), so that
// A^n(x) = Q(f^n x) B^n(x) alpha^n(Q(x))^{-1} identically. Holder data for B
// is a sampled envelope over dyadic pairs at the conservative exponent
// min(nu_A, nu_Q).
TwistedCocycle conjugate(const TwistedCocycle& c, const Generator& q, Rng& rng,
                         int pair_samples = 200);

// fleet builders; spread/eps control how far entries sit from the identity
Generator random_locally_constant(const SftSystem& sys, Rng& rng, int d, int radius,
                                  double spread);
Generator random_symbolic_holder(const SftSystem& sys, Rng& rng, int d, int radius, double eps,
                                 double nu);
Generator random_torus_smooth(Rng& rng, int d, int kmax, double eps);

// near-identity conjugator with Q(anchor) = Id exactly on symbolic bases (to
// float addition error on toral ones); ground-truth reconstructions normalize
// the transfer map at the anchor, so their Q must carry the identity there
Generator random_conjugator(const System& sys, Rng& rng, int d, const Point& anchor,
                            double spread);

}  // namespace twistlab
