#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <twistlab/errors.hpp>
#include <twistlab/matrix.hpp>
#include <twistlab/twisting.hpp>

#include <cmath>
#include <vector>

using namespace twistlab;

namespace {

std::vector<Automorphism> fleet2() {
  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 1.3;
  diag(1, 1) = 1.0 / 1.3;
  return {
      Automorphism::identity(2),
      Automorphism::inner(rotation2(0.7)),
      Automorphism::inner(diag),
      Automorphism::transpose_inverse(2),
      Automorphism::compose({Automorphism::inner(rotation2(0.4)), Automorphism::transpose_inverse(2)}),
  };
}

}  // namespace

TEST_CASE("powers compose as a group action") {
  Rng rng(21);
  for (const Automorphism& a : fleet2()) {
    for (int trial = 0; trial < 20; ++trial) {
      Matrix x = random_invertible(rng, 2);
      std::int64_t m = rng.uniform_int(-6, 6);
      std::int64_t n = rng.uniform_int(-6, 6);
      Matrix lhs = a.apply(m + n, x);
      Matrix rhs = a.apply(m, a.apply(n, x));
      CHECK(rel_diff(lhs, rhs) < 1e-11);
    }
    Matrix x = random_invertible(rng, 2);
    CHECK(rel_diff(a.apply(0, x), x) == 0.0);
  }
}

TEST_CASE("each twist is a group automorphism of GL(d)") {
  Rng rng(22);
  Matrix id = Matrix::Identity(2, 2);
  for (const Automorphism& a : fleet2()) {
    for (std::int64_t n : {-3, -1, 1, 2, 5}) {
      Matrix x = random_invertible(rng, 2);
      Matrix y = random_invertible(rng, 2);
      CHECK(rel_diff(a.apply(n, x * y), a.apply(n, x) * a.apply(n, y)) < 1e-11);
      CHECK(rel_diff(a.apply(n, inverse(x)), inverse(a.apply(n, x))) < 1e-10);
      CHECK(op_norm(a.apply(n, id) - id) < 1e-13);
    }
  }
}

TEST_CASE("composition acts left to right and collapses to canonical form") {
  Matrix l = rotation2(0.6);
  Automorphism inner = Automorphism::inner(l);
  Automorphism ti = Automorphism::transpose_inverse(2);
  Automorphism both = Automorphism::compose({inner, ti});
  CHECK(both.flips());
  Rng rng(23);
  Matrix x = random_invertible(rng, 2);
  // inner first, then transpose-inverse
  Matrix expect = inverse((l * x * inverse(l)).transpose());
  CHECK(rel_diff(both.apply(1, x), expect) < 1e-12);

  // transpose-inverse twice is the identity map
  Automorphism titi = Automorphism::compose({ti, ti});
  CHECK(!titi.flips());
  CHECK(titi.is_identity_action());
  CHECK(rel_diff(titi.apply(1, x), x) < 1e-12);
}

TEST_CASE("conjugator distortion is submultiplicative with unit base") {
  for (const Automorphism& a : fleet2()) {
    CHECK(a.kappa(0) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::int64_t m : {-5, -2, 1, 3}) {
      for (std::int64_t n : {-4, 2, 6}) {
        CHECK(a.kappa(m + n) <= a.kappa(m) * a.kappa(n) * (1.0 + 1e-10));
      }
    }
  }
  // orthogonal conjugators have no distortion at any power
  Automorphism rot = Automorphism::inner(rotation2(1.1));
  for (std::int64_t n : {-40, -7, 11, 60}) CHECK(rot.kappa(n) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("growth certificates are exact for flip-free twists") {
  Rng rng(24);
  const double s = 1.07;
  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = s;
  diag(1, 1) = 1.0 / s;
  Automorphism a = Automorphism::inner(diag);
  GrowthCertificate g = a.certify_growth(24, 40, rng);
  CHECK(g.certifiable);
  CHECK(g.method == FitMethod::Exact);
  CHECK(g.rho == doctest::Approx(2.0 * std::log(s)).epsilon(1e-9));
  CHECK_NOTHROW(require_certified(g));
  // the envelope really covers the cached powers
  for (int n = -24; n <= 24; ++n)
    CHECK(a.kappa(n) <= g.c_growth * std::exp(g.rho * std::abs(n)) * (1.0 + 1e-9));

  GrowthCertificate gid = Automorphism::identity(2).certify_growth(24, 40, rng);
  CHECK(gid.rho == doctest::Approx(0.0));
  CHECK(gid.certifiable);

  GrowthCertificate gt = Automorphism::transpose_inverse(2).certify_growth(24, 40, rng);
  CHECK(!gt.certifiable);
  CHECK(gt.method == FitMethod::Empirical);
  CHECK_THROWS_AS(require_certified(gt), NotCertifiable);
}

TEST_CASE("canonical power form reproduces apply") {
  Rng rng(25);
  Automorphism a = Automorphism::compose(
      {Automorphism::inner(rotation2(0.9)), Automorphism::transpose_inverse(2)});
  for (std::int64_t n : {-5, -1, 0, 1, 2, 7}) {
    TwistPower p = a.power(n);
    Matrix x = random_invertible(rng, 2);
    Matrix via = p.flip ? p.m * inverse(x.transpose()) * p.minv : p.m * x * p.minv;
    CHECK(rel_diff(via, a.apply(n, x)) < 1e-12);
    CHECK(p.kappa == doctest::Approx(a.kappa(n)).epsilon(1e-12));
  }
}

TEST_CASE("identity action detection sees through scalar conjugators") {
  CHECK(Automorphism::identity(3).is_identity_action());
  Matrix scalar = 2.5 * Matrix::Identity(2, 2);
  CHECK(Automorphism::inner(scalar).is_identity_action());
  CHECK(!Automorphism::inner(rotation2(0.3)).is_identity_action());
  CHECK(!Automorphism::transpose_inverse(2).is_identity_action());
}

TEST_CASE("distortion past the conditioning cap raises") {
  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 10.0;
  diag(1, 1) = 0.1;
  Automorphism a = Automorphism::inner(diag);
  Matrix x = rotation2(0.2);
  CHECK_NOTHROW(a.apply(5, x));
  CHECK_THROWS_AS(a.apply(8, x), IllConditioned);
}
