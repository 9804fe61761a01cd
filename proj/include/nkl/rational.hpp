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

#ifndef NKL_RATIONAL_HPP
#define NKL_RATIONAL_HPP

#include <stdexcept>
#include <string>
#include <utility>

#include "nkl/bigint.hpp"

namespace nkl {

/// Exact rational with arbitrary-precision numerator/denominator,
/// always reduced, denominator > 0.
class Rational {
public:
  Rational() : num_(0), den_(1) {}
  Rational(long long v) : num_(v), den_(1) {}
  Rational(long v) : num_(v), den_(1) {}
  Rational(int v) : num_(v), den_(1) {}
  Rational(BigInt n) : num_(std::move(n)), den_(1) {}
  Rational(BigInt n, BigInt d) : num_(std::move(n)), den_(std::move(d)) { reduce(); }
  Rational(long long n, long long d) : num_(n), den_(d) { reduce(); }

  /// Parses "p/q", plain integers, and decimal literals ("0.2" -> 1/5).
  static Rational from_string(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
      return Rational(BigInt::from_decimal(s.substr(0, slash)),
                      BigInt::from_decimal(s.substr(slash + 1)));
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(BigInt::from_decimal(s));
    std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
    if (whole.empty() || whole == "-" || whole == "+") whole += "0";
    bool neg = whole[0] == '-';
    BigInt n = BigInt::from_decimal(whole);
    BigInt scale = BigInt::pow(BigInt(10), frac.size());
    BigInt f = frac.empty() ? BigInt(0) : BigInt::from_decimal(frac);
    n = n * scale;
    n = neg ? n - f : n + f;
    return Rational(n, scale);
  }

  const BigInt& num() const { return num_; }
  const BigInt& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  int sign() const { return num_.sign(); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero()) throw std::domain_error("Rational: division by zero");
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
  }
  Rational operator-() const {
    Rational r = *this;
    r.num_ = -r.num_;
    return r;
  }

  static int cmp(const Rational& a, const Rational& b) {
    return BigInt::cmp(a.num_ * b.den_, b.num_ * a.den_);
  }
  friend bool operator==(const Rational& a, const Rational& b) { return cmp(a, b) == 0; }
  friend bool operator!=(const Rational& a, const Rational& b) { return cmp(a, b) != 0; }
  friend bool operator<(const Rational& a, const Rational& b) { return cmp(a, b) < 0; }
  friend bool operator<=(const Rational& a, const Rational& b) { return cmp(a, b) <= 0; }
  friend bool operator>(const Rational& a, const Rational& b) { return cmp(a, b) > 0; }
  friend bool operator>=(const Rational& a, const Rational& b) { return cmp(a, b) >= 0; }

  /// floor(num/den) as a BigInt.
  BigInt floor() const {
    BigInt q, r;
    BigInt::divmod(num_, den_, q, r);
    if (r.sign() < 0) q = q - BigInt(1);
    return q;
  }

  double to_double() const { return num_.to_double() / den_.to_double(); }

  std::string to_string() const {
    if (den_ == BigInt(1)) return num_.to_string();
    return num_.to_string() + "/" + den_.to_string();
  }

private:
  BigInt num_, den_;

  void reduce() {
    if (den_.is_zero()) throw std::domain_error("Rational: zero denominator");
    if (den_.sign() < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    if (num_.is_zero()) {
      den_ = BigInt(1);
      return;
    }
    BigInt g = BigInt::gcd(num_, den_);
    if (g != BigInt(1)) {
      num_ = num_ / g;
      den_ = den_ / g;
    }
  }
};

}  // namespace nkl

#endif
