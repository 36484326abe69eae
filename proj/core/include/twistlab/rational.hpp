#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace twistlab {

// Exact rational on int64 with overflow-checked arithmetic (__int128
// intermediates). Throws OverflowError when a reduced result leaves the
// int64 range; callers treat that as a budget limit, not a bug.
struct Rat {
  std::int64_t num = 0;
  std::int64_t den = 1;  // > 0, gcd(|num|, den) == 1

  Rat() = default;
  Rat(std::int64_t n, std::int64_t d);
  static Rat integer(std::int64_t n) { return Rat(n, 1); }

  Rat operator+(const Rat& o) const;
  Rat operator-(const Rat& o) const;
  Rat operator*(const Rat& o) const;
  Rat operator-() const { return Rat(-num, den); }

  bool operator==(const Rat& o) const { return num == o.num && den == o.den; }
  bool operator!=(const Rat& o) const { return !(*this == o); }
  bool operator<(const Rat& o) const;

  bool is_integer() const { return den == 1; }
  std::int64_t floor() const;
  Rat mod1() const;  // this - floor(this), in [0, 1)
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

using RatVec2 = std::array<Rat, 2>;

// 2x2 integer matrix with overflow-checked ops; enough for hyperbolic toral
// automorphisms and their powers at desk scale.
struct IntMat2 {
  std::int64_t a = 1, b = 0, c = 0, d = 1;  // [[a, b], [c, d]]

  static IntMat2 identity() { return {}; }
  IntMat2 operator*(const IntMat2& o) const;
  IntMat2 operator-(const IntMat2& o) const;
  std::int64_t det() const;
  std::int64_t trace() const { return a + d; }
  IntMat2 adjugate() const { return {d, -b, -c, a}; }
  IntMat2 pow(int n) const;  // n >= 0
  // inverse as an integer matrix; requires |det| == 1
  IntMat2 unimodular_inverse() const;
  RatVec2 apply(const RatVec2& v) const;
};

std::int64_t checked_mul(std::int64_t x, std::int64_t y);
std::int64_t checked_add(std::int64_t x, std::int64_t y);

}  // namespace twistlab
