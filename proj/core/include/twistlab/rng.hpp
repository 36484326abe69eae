#pragma once

#include <cstdint>
#include <vector>

namespace twistlab {

// splitmix64 stream with hand-rolled converters. Reports must be
// byte-identical for a fixed seed, so we avoid std:: distributions whose
// output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1) with 53 bits
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t uniform_u64(std::uint64_t n);

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);  // inclusive range

  double normal();  // standard normal, Box-Muller

  // derive an independent stream (stable under reordering of consumers)
  Rng fork(std::uint64_t salt) const;

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace twistlab
