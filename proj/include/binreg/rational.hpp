#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace binreg {

// Exact non-negative-denominator fraction. Used for hyperparameters and
// thresholds so that the encoded objective stays integral.
struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  Rational() = default;
  Rational(int64_t n, int64_t d = 1);

  // Accepts "5", "-3", "2.5", "5/2".
  static Rational parse(std::string_view text);

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;

  friend bool operator==(const Rational&, const Rational&) = default;
  friend Rational operator*(const Rational& a, const Rational& b);
  friend bool operator<(const Rational& a, const Rational& b);
};

int64_t lcm_checked(int64_t a, int64_t b);

}  // namespace binreg
