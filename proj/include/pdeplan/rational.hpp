// rational.hpp — small exact rational, used for worked-example reference values.
#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pdeplan {

struct Rat64 {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rat64() = default;
  Rat64(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }
  Rat64(std::int64_t n) : num(n), den(1) {}  // NOLINT(google-explicit-constructor)

  void normalize() {
    if (den == 0) throw std::invalid_argument("Rat64: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  std::string str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }

  friend bool operator==(const Rat64& a, const Rat64& b) {
    return a.num == b.num && a.den == b.den;
  }
};

}  // namespace pdeplan
