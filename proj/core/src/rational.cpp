#include "twistlab/rational.hpp"

#include <numeric>

#include "twistlab/errors.hpp"

namespace twistlab {

namespace {

using i128 = __int128;

constexpr std::int64_t kMax = INT64_MAX;

std::int64_t narrow(i128 v, const char* where) {
  if (v > static_cast<i128>(kMax) || v < -static_cast<i128>(kMax))
    throw OverflowError(std::string("rational arithmetic overflow in ") + where);
  return static_cast<std::int64_t>(v);
}

i128 gcd128(i128 x, i128 y) {
  if (x < 0) x = -x;
  if (y < 0) y = -y;
  while (y != 0) {
    i128 t = x % y;
    x = y;
    y = t;
  }
  return x;
}

Rat from128(i128 n, i128 d, const char* where) {
  if (d == 0) throw Error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const i128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  Rat r;
  r.num = narrow(n, where);
  r.den = narrow(d, where);
  return r;
}

}  // namespace

std::int64_t checked_mul(std::int64_t x, std::int64_t y) {
  return narrow(static_cast<i128>(x) * y, "checked_mul");
}

std::int64_t checked_add(std::int64_t x, std::int64_t y) {
  return narrow(static_cast<i128>(x) + y, "checked_add");
}

Rat::Rat(std::int64_t n, std::int64_t d) {
  *this = from128(n, d, "Rat()");
}

Rat Rat::operator+(const Rat& o) const {
  return from128(static_cast<i128>(num) * o.den + static_cast<i128>(o.num) * den,
                 static_cast<i128>(den) * o.den, "operator+");
}

Rat Rat::operator-(const Rat& o) const {
  return from128(static_cast<i128>(num) * o.den - static_cast<i128>(o.num) * den,
                 static_cast<i128>(den) * o.den, "operator-");
}

Rat Rat::operator*(const Rat& o) const {
  return from128(static_cast<i128>(num) * o.num, static_cast<i128>(den) * o.den, "operator*");
}

bool Rat::operator<(const Rat& o) const {
  return static_cast<i128>(num) * o.den < static_cast<i128>(o.num) * den;
}

std::int64_t Rat::floor() const {
  std::int64_t q = num / den;
  if (num % den != 0 && num < 0) --q;
  return q;
}

Rat Rat::mod1() const {
  return *this - Rat::integer(floor());
}

IntMat2 IntMat2::operator*(const IntMat2& o) const {
  IntMat2 r;
  r.a = checked_add(checked_mul(a, o.a), checked_mul(b, o.c));
  r.b = checked_add(checked_mul(a, o.b), checked_mul(b, o.d));
  r.c = checked_add(checked_mul(c, o.a), checked_mul(d, o.c));
  r.d = checked_add(checked_mul(c, o.b), checked_mul(d, o.d));
  return r;
}

IntMat2 IntMat2::operator-(const IntMat2& o) const {
  return {a - o.a, b - o.b, c - o.c, d - o.d};
}

std::int64_t IntMat2::det() const {
  return narrow(static_cast<i128>(a) * d - static_cast<i128>(b) * c, "IntMat2::det");
}

IntMat2 IntMat2::pow(int n) const {
  if (n < 0) throw Error("IntMat2::pow: negative exponent");
  IntMat2 acc = identity();
  IntMat2 base = *this;
  while (n > 0) {
    if (n & 1) acc = acc * base;
    base = (n >>= 1) ? base * base : base;
  }
  return acc;
}

IntMat2 IntMat2::unimodular_inverse() const {
  const std::int64_t dt = det();
  if (dt != 1 && dt != -1)
    throw Error("unimodular_inverse: |det| != 1, det = " + std::to_string(dt));
  IntMat2 adj = adjugate();
  if (dt == -1) {
    adj.a = -adj.a;
    adj.b = -adj.b;
    adj.c = -adj.c;
    adj.d = -adj.d;
  }
  return adj;
}

RatVec2 IntMat2::apply(const RatVec2& v) const {
  return {Rat::integer(a) * v[0] + Rat::integer(b) * v[1],
          Rat::integer(c) * v[0] + Rat::integer(d) * v[1]};
}

}  // namespace twistlab
