#include <benchmark/benchmark.h>

#include "twistlab/cocycle.hpp"
#include "twistlab/fiber_bunching.hpp"
#include "twistlab/holonomy.hpp"
#include "twistlab/system.hpp"

namespace {

using namespace twistlab;

struct Fixture {
  System sys = System(SftSystem::golden_mean(std::log(2.0)));
  Automorphism alpha = Automorphism::inner(rotation2(0.7));
  Rng rng{7};
  Generator gen = random_symbolic_holder(as_sft(sys), rng, 2, 12, 0.03, 1.0);
  TwistedCocycle c{sys, alpha, gen};
  FiberBunchingReport rep;
  Point y, z;

  Fixture() {
    GrowthCertificate g = alpha.certify_growth(16, 20, rng);
    std::vector<Point> sample;
    for (int i = 0; i < 4; ++i) sample.push_back(random_point(sys, rng));
    rep = certify(c, 1.0, lambda_of(sys), g, estimate_theta(c, sample, 16), Strictness::FiveTwo);
    y = random_point(sys, rng);
    auto zz = stable_perturbation(as_sft(sys), rng, std::get<SymbolicPoint>(y), 2);
    z = Point(*zz);
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void bm_cocycle_word(benchmark::State& state) {
  Fixture& f = fixture();
  const auto n = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(f.c.evaluate(f.y, n));
}
BENCHMARK(bm_cocycle_word)->Arg(8)->Arg(32)->Arg(128);

void bm_stable_holonomy(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(stable_holonomy(f.c, f.y, f.z, f.rep, 1e-10, 200));
}
BENCHMARK(bm_stable_holonomy);

void bm_adapted_norms(benchmark::State& state) {
  Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(adapted_norms(f.c, f.y, 8, f.rep));
}
BENCHMARK(bm_adapted_norms);

void bm_periodic_points(benchmark::State& state) {
  Fixture& f = fixture();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(periodic_points(f.sys, n));
}
BENCHMARK(bm_periodic_points)->Arg(6)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
