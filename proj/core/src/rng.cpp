#include "twistlab/rng.hpp"

#include <cmath>

namespace twistlab {

std::uint64_t Rng::uniform_u64(std::uint64_t n) {
  if (n == 0) return 0;
  // rejection sample to kill modulo bias
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(uniform_u64(span));
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1, u2;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(t);
  have_spare_ = true;
  return r * std::cos(t);
}

Rng Rng::fork(std::uint64_t salt) const {
  Rng child(state_ ^ (0xa0761d6478bd642full + salt * 0xe7037ed1a0b428dbull));
  child.next_u64();
  return child;
}

}  // namespace twistlab
