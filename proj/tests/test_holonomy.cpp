#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <twistlab/holonomy.hpp>

#include <cmath>
#include <vector>

using namespace twistlab;

namespace {

const double kLn2 = std::log(2.0);

struct Rig {
  TwistedCocycle c;
  FiberBunchingReport report;
};

Rig rig_sft(Rng& rng, const Automorphism& alpha, Generator gen, const SftSystem& sys) {
  TwistedCocycle c(sys, alpha, gen);
  GrowthCertificate growth = alpha.certify_growth(24, 40, rng);
  std::vector<Point> sample;
  for (int i = 0; i < 5; ++i) sample.push_back(random_point(c.base(), rng));
  ThetaData theta = estimate_theta(c, sample, 20);
  FiberBunchingReport rep = certify(c, 1.0, kLn2, growth, theta, Strictness::FiveTwo);
  return {c, rep};
}

// brute-force partial limit: alpha^{-n}(A^n(z)^{-1} A^n(y)), no recurrences
Matrix stable_partial(const TwistedCocycle& c, const Point& y, const Point& z, int n) {
  return c.alpha().apply(-n, inverse(c.evaluate(z, n)) * c.evaluate(y, n));
}

// mirror for the backward side: alpha^{n}(A^{-n}(z)^{-1} A^{-n}(y))
Matrix unstable_partial(const TwistedCocycle& c, const Point& y, const Point& z, int n) {
  return c.alpha().apply(n, inverse(c.evaluate(z, -n)) * c.evaluate(y, -n));
}

// the transition rule can block a flip at the requested depth; redraw until
// it admits one
std::pair<SymbolicPoint, SymbolicPoint> stable_pair(const SftSystem& sys, Rng& rng, int core,
                                                    std::int64_t depth) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    SymbolicPoint y = random_symbolic_point(sys, rng, core);
    if (auto z = stable_perturbation(sys, rng, y, depth)) return {y, *z};
  }
  throw Error("no admissible stable flip in 200 draws");
}

std::pair<SymbolicPoint, SymbolicPoint> unstable_pair(const SftSystem& sys, Rng& rng, int core,
                                                      std::int64_t depth) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    SymbolicPoint y = random_symbolic_point(sys, rng, core);
    if (auto z = unstable_perturbation(sys, rng, y, depth)) return {y, *z};
  }
  throw Error("no admissible unstable flip in 200 draws");
}

}  // namespace

TEST_CASE("equal points have exact identity holonomy") {
  Rng rng(51);
  SftSystem gm = SftSystem::golden_mean(kLn2);
  Rig r = rig_sft(rng, Automorphism::inner(rotation2(0.7)),
                  random_locally_constant(gm, rng, 2, 1, 0.08), gm);
  REQUIRE(r.report.satisfied);
  Point y = random_point(r.c.base(), rng);
  for (auto side : {HolonomySide::Stable, HolonomySide::Unstable}) {
    HolonomyResult h = side == HolonomySide::Stable ? stable_holonomy(r.c, y, y, r.report)
                                                    : unstable_holonomy(r.c, y, y, r.report);
    CHECK(op_norm(h.h - Matrix::Identity(2, 2)) == 0.0);
    CHECK(h.tail_bound == 0.0);
    CHECK(h.n_used == 0);
  }
}

TEST_CASE("radius one stable holonomy equals its closed form") {
  Rng rng(52);
  for (bool full : {false, true}) {
    SftSystem sys = full ? SftSystem::full_shift(2, kLn2) : SftSystem::golden_mean(kLn2);
    for (const Automorphism& alpha : {Automorphism::identity(2), Automorphism::inner(rotation2(0.7))}) {
      Rig r = rig_sft(rng, alpha, random_locally_constant(sys, rng, 2, 1, 0.08), sys);
      REQUIRE(r.report.satisfied);
      for (int trial = 0; trial < 10; ++trial) {
        auto [y, z] = stable_pair(sys, rng, 24, 1 + trial % 3);
        HolonomyResult h = stable_holonomy(r.c, y, z, r.report, 1e-10);
        Matrix closed =
            r.c.alpha().apply(-1, inverse(r.c.generator_at(z)) * r.c.generator_at(y));
        CHECK(op_norm(h.h - closed) <= 1e-12);
        CHECK(h.n_used <= 2);
      }
    }
  }
}

TEST_CASE("locally constant holonomy stabilizes within radius plus one") {
  Rng rng(53);
  SftSystem gm = SftSystem::golden_mean(kLn2);
  for (int radius : {0, 1, 2}) {
    Rig r = rig_sft(rng, Automorphism::inner(rotation2(0.7)),
                    random_locally_constant(gm, rng, 2, radius, 0.07), gm);
    REQUIRE(r.report.satisfied);
    for (int trial = 0; trial < 6; ++trial) {
      auto [y, z] = stable_pair(gm, rng, 30, 1);
      HolonomyResult h = stable_holonomy(r.c, y, z, r.report, 1e-10);
      CHECK(h.n_used <= radius + 1);
      // increments are exactly zero once the factors leave the disagreement
      std::vector<double> prof = convergence_profile(r.c, y, z, r.report, 12);
      for (int n = radius + 1; n < static_cast<int>(prof.size()); ++n)
        CHECK(prof[static_cast<std::size_t>(n)] <= 1e-13);
      // telescoping oracle: the limit is the partial product at the stall depth
      CHECK(op_norm(h.h - stable_partial(r.c, y, z, radius + 1)) <= 1e-12);
      if (radius == 0) CHECK(op_norm(h.h - Matrix::Identity(2, 2)) <= 1e-13);
    }
  }
}

TEST_CASE("unstable holonomy of a past-agreeing pair is the identity") {
  Rng rng(54);
  SftSystem gm = SftSystem::golden_mean(kLn2);
  Rig r = rig_sft(rng, Automorphism::inner(rotation2(0.7)),
                  random_locally_constant(gm, rng, 2, 1, 0.08), gm);
  REQUIRE(r.report.satisfied);
  for (int trial = 0; trial < 8; ++trial) {
    auto [y, z] = unstable_pair(gm, rng, 24, 1);
    // brute force first: every backward word reads agreeing sites only
    for (int n = 1; n <= 4; ++n)
      CHECK(op_norm(unstable_partial(r.c, y, z, n) - Matrix::Identity(2, 2)) <= 1e-12);
    HolonomyResult h = unstable_holonomy(r.c, y, z, r.report, 1e-10);
    CHECK(op_norm(h.h - Matrix::Identity(2, 2)) <= 1e-12);
    CHECK(h.n_used <= 2);
  }
}

TEST_CASE("reported tails cover the distance to a much deeper run") {
  Rng rng(55);
  SftSystem full = SftSystem::full_shift(2, kLn2);
  Rig r = rig_sft(rng, Automorphism::inner(rotation2(0.7)),
                  random_symbolic_holder(full, rng, 2, 12, 0.03, 1.0), full);
  REQUIRE(r.report.satisfied);
  for (int trial = 0; trial < 6; ++trial) {
    SymbolicPoint y = random_symbolic_point(full, rng, 30);
    auto z = stable_perturbation(full, rng, y, 1 + trial % 2);
    REQUIRE(z.has_value());
    HolonomyResult h = stable_holonomy(r.c, y, *z, r.report, 1e-8);
    Matrix deep = stable_partial(r.c, y, *z, 60);
    CHECK(op_norm(h.h - deep) <= h.tail_bound * 1.01 + 1e-12);
  }
}

TEST_CASE("distant pairs are pulled back through their entry time") {
  Rng rng(56);
  SftSystem gm = SftSystem::golden_mean(kLn2);
  Rig r = rig_sft(rng, Automorphism::inner(rotation2(0.7)),
                  random_locally_constant(gm, rng, 2, 1, 0.08), gm);
  REQUIRE(r.report.satisfied);
  auto [y0, z0] = stable_pair(gm, rng, 28, 2);
  // shift the disagreement into the future so reduction is forced
  Point y = y0.shifted(-6), z = z0.shifted(-6);
  auto m = stable_reduction(r.c.base(), y, z);
  REQUIRE(m.has_value());
  CHECK(*m == 5);
  HolonomyResult h = stable_holonomy(r.c, y, z, r.report, 1e-10);
  HolonomyResult hloc =
      stable_holonomy(r.c, iterate(r.c.base(), y, *m), iterate(r.c.base(), z, *m), r.report, 1e-12);
  Matrix pulled = r.c.alpha().apply(
      -*m, inverse(r.c.evaluate(z, *m)) * hloc.h * r.c.evaluate(y, *m));
  CHECK(op_norm(h.h - pulled) <= 5.0 * (h.tail_bound + hloc.tail_bound) + 1e-11);
}

TEST_CASE("holonomies compose and invert within their tails") {
  Rng rng(57);
  SftSystem full = SftSystem::full_shift(2, kLn2);
  Rig r = rig_sft(rng, Automorphism::inner(rotation2(0.7)),
                  random_symbolic_holder(full, rng, 2, 8, 0.04, 1.0), full);
  REQUIRE(r.report.satisfied);
  for (int trial = 0; trial < 10; ++trial) {
    SymbolicPoint y = random_symbolic_point(full, rng, 30);
    auto z1 = stable_perturbation(full, rng, y, 1);
    REQUIRE(z1.has_value());
    auto z2 = stable_perturbation(full, rng, *z1, 2);
    REQUIRE(z2.has_value());
    HolonomyResult a = stable_holonomy(r.c, y, *z1, r.report);
    HolonomyResult b = stable_holonomy(r.c, *z1, *z2, r.report);
    HolonomyResult ab = stable_holonomy(r.c, y, *z2, r.report);
    double res = op_norm(ab.h - b.h * a.h);
    CHECK(res <= 5.0 * (a.tail_bound + b.tail_bound + ab.tail_bound) + 1e-13);

    HolonomyResult back = stable_holonomy(r.c, *z1, y, r.report);
    double sym = op_norm(back.h * a.h - Matrix::Identity(2, 2));
    CHECK(sym <= 2.0 * (a.tail_bound + back.tail_bound) + 1e-13);
  }
}

TEST_CASE("toral holonomy respects leaf translations") {
  Rng rng(58);
  TorusSystem cat = TorusSystem::cat_map();
  Generator gen = random_torus_smooth(rng, 2, 2, 0.04);
  TwistedCocycle c(cat, Automorphism::inner(rotation2(0.7)), gen);
  GrowthCertificate growth = c.alpha().certify_growth(24, 40, rng);
  std::vector<Point> sample;
  for (int i = 0; i < 5; ++i) sample.push_back(random_point(c.base(), rng));
  ThetaData theta = estimate_theta(c, sample, 20);
  FiberBunchingReport rep = certify(c, 1.0, cat.lambda(), growth, theta, Strictness::FiveTwo);
  REQUIRE(rep.satisfied);

  for (int trial = 0; trial < 5; ++trial) {
    TorusPoint y = TorusPoint::from_coords(rng.uniform(), rng.uniform());
    TorusPoint z = cat.stable_translate(y, 0.004 * (trial + 1));
    HolonomyResult h = stable_holonomy(c, y, z, rep, 1e-9);
    CHECK(h.tail_bound <= 1e-9);
    Matrix deep = stable_partial(c, y, z, 100);
    CHECK(op_norm(h.h - deep) <= h.tail_bound * 1.01 + 1e-10);

    HolonomyResult back = stable_holonomy(c, z, y, rep, 1e-9);
    CHECK(op_norm(back.h * h.h - Matrix::Identity(2, 2)) <=
          2.0 * (h.tail_bound + back.tail_bound) + 1e-12);
  }
}

TEST_CASE("a horizon too short for the tail reports no convergence") {
  Rng rng(59);
  SftSystem full = SftSystem::full_shift(2, kLn2);
  Rig r = rig_sft(rng, Automorphism::inner(rotation2(0.7)),
                  random_symbolic_holder(full, rng, 2, 12, 0.03, 1.0), full);
  REQUIRE(r.report.satisfied);
  SymbolicPoint y = random_symbolic_point(full, rng, 30);
  auto z = stable_perturbation(full, rng, y, 1);
  REQUIRE(z.has_value());
  CHECK_THROWS_AS(stable_holonomy(r.c, y, *z, r.report, 1e-14, 3), NoConvergence);
}
