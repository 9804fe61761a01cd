// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NKL_DYADIC_HPP
#define NKL_DYADIC_HPP

#include <cmath>
#include <cstdint>
#include <string>

#include "nkl/rational.hpp"

namespace nkl {

/// Exact distance value restricted to 0 and powers of two.  Several of the
/// constructed spaces take distances only of this form, and equality of two
/// Dyadic values is the exact tie test, no bignum traffic involved.
struct Dyadic {
  bool positive = false;  // false encodes the value 0
  std::int32_t exp = 0;   // value = 2^exp when positive

  static constexpr Dyadic zero() { return Dyadic{}; }
  static constexpr Dyadic pow2(std::int32_t e) { return Dyadic{true, e}; }
  static constexpr Dyadic one() { return pow2(0); }

  double to_double() const { return positive ? std::ldexp(1.0, exp) : 0.0; }

  Rational to_rational() const {
    if (!positive) return Rational(0);
    if (exp >= 0) return Rational(BigInt::pow(BigInt(2), static_cast<unsigned long long>(exp)));
    return Rational(BigInt(1), BigInt::pow(BigInt(2), static_cast<unsigned long long>(-exp)));
  }

  std::string to_string() const { return to_rational().to_string(); }

  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.positive == b.positive && (!a.positive || a.exp == b.exp);
  }
  friend bool operator!=(const Dyadic& a, const Dyadic& b) { return !(a == b); }
  friend bool operator<(const Dyadic& a, const Dyadic& b) {
    if (!a.positive) return b.positive;
    if (!b.positive) return false;
    return a.exp < b.exp;
  }
  friend bool operator<=(const Dyadic& a, const Dyadic& b) { return a < b || a == b; }
  friend bool operator>(const Dyadic& a, const Dyadic& b) { return b < a; }
  friend bool operator>=(const Dyadic& a, const Dyadic& b) { return b <= a; }
};

/// Uniform real view of the distance scalar types used across the library.
inline double to_real(double v) { return v; }
inline double to_real(std::int64_t v) { return static_cast<double>(v); }
inline double to_real(const Dyadic& v) { return v.to_double(); }
inline double to_real(const Rational& v) { return v.to_double(); }

inline Rational to_exact(std::int64_t v) { return Rational(static_cast<long long>(v)); }
inline Rational to_exact(const Dyadic& v) { return v.to_rational(); }
inline Rational to_exact(const Rational& v) { return v; }

}  // namespace nkl

#endif
