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

#ifndef NKL_BIGINT_HPP
#define NKL_BIGINT_HPP

#include <cstdint>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace nkl {

/// Arbitrary-precision signed integer, base 2^32 magnitude limbs.
/// Sizes here stay in the thousands of digits at most, so schoolbook
/// arithmetic is all we need.
class BigInt {
public:
  BigInt() : sign_(0) {}

  BigInt(long long v) : sign_(0) {
    unsigned long long m;
    if (v < 0) {
      sign_ = -1;
      m = static_cast<unsigned long long>(-(v + 1)) + 1ULL;
    } else if (v > 0) {
      sign_ = 1;
      m = static_cast<unsigned long long>(v);
    } else {
      return;
    }
    while (m) {
      mag_.push_back(static_cast<std::uint32_t>(m & 0xffffffffULL));
      m >>= 32;
    }
  }
  BigInt(int v) : BigInt(static_cast<long long>(v)) {}
  BigInt(long v) : BigInt(static_cast<long long>(v)) {}
  BigInt(unsigned long long v) : sign_(v ? 1 : 0) {
    while (v) {
      mag_.push_back(static_cast<std::uint32_t>(v & 0xffffffffULL));
      v >>= 32;
    }
  }
  BigInt(unsigned long v) : BigInt(static_cast<unsigned long long>(v)) {}
  BigInt(unsigned int v) : BigInt(static_cast<unsigned long long>(v)) {}

  static BigInt from_decimal(const std::string& s) {
    BigInt r;
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      neg = s[i] == '-';
      ++i;
    }
    if (i == s.size()) throw std::invalid_argument("BigInt: empty decimal string");
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("BigInt: bad digit");
      r.mul_small_inplace(10);
      r.add_small_inplace(static_cast<std::uint32_t>(s[i] - '0'));
    }
    if (neg && r.sign_ != 0) r.sign_ = -1;
    return r;
  }

  bool is_zero() const { return sign_ == 0; }
  int sign() const { return sign_; }
  bool odd() const { return sign_ != 0 && (mag_[0] & 1u); }

  /// -1, 0, +1 comparison.
  static int cmp(const BigInt& a, const BigInt& b) {
    if (a.sign_ != b.sign_) return a.sign_ < b.sign_ ? -1 : 1;
    int c = cmp_mag(a.mag_, b.mag_);
    return a.sign_ >= 0 ? c : -c;
  }

  friend bool operator==(const BigInt& a, const BigInt& b) { return cmp(a, b) == 0; }
  friend bool operator!=(const BigInt& a, const BigInt& b) { return cmp(a, b) != 0; }
  friend bool operator<(const BigInt& a, const BigInt& b) { return cmp(a, b) < 0; }
  friend bool operator<=(const BigInt& a, const BigInt& b) { return cmp(a, b) <= 0; }
  friend bool operator>(const BigInt& a, const BigInt& b) { return cmp(a, b) > 0; }
  friend bool operator>=(const BigInt& a, const BigInt& b) { return cmp(a, b) >= 0; }

  BigInt operator-() const {
    BigInt r = *this;
    r.sign_ = -r.sign_;
    return r;
  }

  friend BigInt operator+(const BigInt& a, const BigInt& b) {
    if (a.sign_ == 0) return b;
    if (b.sign_ == 0) return a;
    BigInt r;
    if (a.sign_ == b.sign_) {
      r.mag_ = add_mag(a.mag_, b.mag_);
      r.sign_ = a.sign_;
    } else {
      int c = cmp_mag(a.mag_, b.mag_);
      if (c == 0) return BigInt();
      if (c > 0) {
        r.mag_ = sub_mag(a.mag_, b.mag_);
        r.sign_ = a.sign_;
      } else {
        r.mag_ = sub_mag(b.mag_, a.mag_);
        r.sign_ = b.sign_;
      }
    }
    return r;
  }
  friend BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

  friend BigInt operator*(const BigInt& a, const BigInt& b) {
    if (a.sign_ == 0 || b.sign_ == 0) return BigInt();
    BigInt r;
    r.mag_.assign(a.mag_.size() + b.mag_.size(), 0);
    for (std::size_t i = 0; i < a.mag_.size(); ++i) {
      std::uint64_t carry = 0;
      std::uint64_t ai = a.mag_[i];
      for (std::size_t j = 0; j < b.mag_.size(); ++j) {
        std::uint64_t cur = r.mag_[i + j] + ai * b.mag_[j] + carry;
        r.mag_[i + j] = static_cast<std::uint32_t>(cur & 0xffffffffULL);
        carry = cur >> 32;
      }
      std::size_t j = i + b.mag_.size();
      while (carry) {
        std::uint64_t cur = r.mag_[j] + carry;
        r.mag_[j] = static_cast<std::uint32_t>(cur & 0xffffffffULL);
        carry = cur >> 32;
        ++j;
      }
    }
    r.trim();
    r.sign_ = a.sign_ == b.sign_ ? 1 : -1;
    return r;
  }

  /// Truncated division; remainder has the sign of the dividend.
  static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
    if (b.sign_ == 0) throw std::domain_error("BigInt: division by zero");
    int c = cmp_mag(a.mag_, b.mag_);
    if (c < 0) {
      q = BigInt();
      r = a;
      return;
    }
    // binary long division on magnitudes
    std::vector<std::uint32_t> quo(a.mag_.size(), 0);
    std::vector<std::uint32_t> rem;
    for (std::size_t bit = a.mag_.size() * 32; bit-- > 0;) {
      shl1(rem);
      if ((a.mag_[bit / 32] >> (bit % 32)) & 1u) {
        if (rem.empty()) rem.push_back(1);
        else rem[0] |= 1u;
      }
      if (cmp_mag(rem, b.mag_) >= 0) {
        rem = sub_mag(rem, b.mag_);
        quo[bit / 32] |= (1u << (bit % 32));
      }
    }
    q.mag_ = std::move(quo);
    q.trim();
    q.sign_ = q.mag_.empty() ? 0 : (a.sign_ == b.sign_ ? 1 : -1);
    r.mag_ = std::move(rem);
    r.trim();
    r.sign_ = r.mag_.empty() ? 0 : a.sign_;
  }

  friend BigInt operator/(const BigInt& a, const BigInt& b) {
    BigInt q, r;
    divmod(a, b, q, r);
    return q;
  }
  friend BigInt operator%(const BigInt& a, const BigInt& b) {
    BigInt q, r;
    divmod(a, b, q, r);
    return r;
  }

  static BigInt gcd(BigInt a, BigInt b) {
    a.sign_ = a.mag_.empty() ? 0 : 1;
    b.sign_ = b.mag_.empty() ? 0 : 1;
    while (!b.is_zero()) {
      BigInt q, r;
      divmod(a, b, q, r);
      a = b;
      b = r;
    }
    return a;
  }

  static BigInt pow(const BigInt& base, unsigned long long e) {
    BigInt r(1), b = base;
    while (e) {
      if (e & 1) r = r * b;
      b = b * b;
      e >>= 1;
    }
    return r;
  }

  /// Exact when the value fits; otherwise the nearest double (top 64 bits).
  double to_double() const {
    if (sign_ == 0) return 0.0;
    double v = 0.0;
    int extra = 0;
    std::size_t n = mag_.size();
    std::size_t lo = n > 3 ? n - 3 : 0;
    for (std::size_t i = n; i-- > lo;) v = v * 4294967296.0 + mag_[i];
    extra = static_cast<int>(lo) * 32;
    v = std::ldexp(v, extra);
    return sign_ < 0 ? -v : v;
  }

  bool fits_u64() const {
    return sign_ >= 0 && mag_.size() <= 2;
  }
  std::uint64_t to_u64() const {
    if (!fits_u64()) throw std::overflow_error("BigInt: does not fit u64");
    std::uint64_t v = 0;
    if (mag_.size() > 1) v = static_cast<std::uint64_t>(mag_[1]) << 32;
    if (!mag_.empty()) v |= mag_[0];
    return v;
  }

  std::string to_string() const {
    if (sign_ == 0) return "0";
    std::vector<std::uint32_t> tmp = mag_;
    std::string digits;
    while (!tmp.empty()) {
      std::uint64_t rem = 0;
      for (std::size_t i = tmp.size(); i-- > 0;) {
        std::uint64_t cur = (rem << 32) | tmp[i];
        tmp[i] = static_cast<std::uint32_t>(cur / 1000000000ULL);
        rem = cur % 1000000000ULL;
      }
      while (!tmp.empty() && tmp.back() == 0) tmp.pop_back();
      for (int d = 0; d < 9; ++d) {
        digits.push_back(static_cast<char>('0' + rem % 10));
        rem /= 10;
      }
    }
    while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
    std::string out;
    if (sign_ < 0) out.push_back('-');
    out.append(digits.rbegin(), digits.rend());
    return out;
  }

private:
  int sign_;
  std::vector<std::uint32_t> mag_;  // little-endian, no trailing zeros

  void trim() {
    while (!mag_.empty() && mag_.back() == 0) mag_.pop_back();
    if (mag_.empty()) sign_ = 0;
  }
  void mul_small_inplace(std::uint32_t m) {
    std::uint64_t carry = 0;
    for (auto& limb : mag_) {
      std::uint64_t cur = static_cast<std::uint64_t>(limb) * m + carry;
      limb = static_cast<std::uint32_t>(cur & 0xffffffffULL);
      carry = cur >> 32;
    }
    if (carry) mag_.push_back(static_cast<std::uint32_t>(carry));
    trim();
    if (!mag_.empty() && sign_ == 0) sign_ = 1;
  }
  void add_small_inplace(std::uint32_t a) {
    std::uint64_t carry = a;
    for (std::size_t i = 0; carry && i < mag_.size(); ++i) {
      std::uint64_t cur = mag_[i] + carry;
      mag_[i] = static_cast<std::uint32_t>(cur & 0xffffffffULL);
      carry = cur >> 32;
    }
    if (carry) mag_.push_back(static_cast<std::uint32_t>(carry));
    if (!mag_.empty()) sign_ = sign_ == 0 ? 1 : sign_;
  }

  static int cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (std::size_t i = a.size(); i-- > 0;) {
      if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    }
    return 0;
  }
  static std::vector<std::uint32_t> add_mag(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b) {
    const auto& big = a.size() >= b.size() ? a : b;
    const auto& sml = a.size() >= b.size() ? b : a;
    std::vector<std::uint32_t> r = big;
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < sml.size(); ++i) {
      std::uint64_t cur = static_cast<std::uint64_t>(r[i]) + sml[i] + carry;
      r[i] = static_cast<std::uint32_t>(cur & 0xffffffffULL);
      carry = cur >> 32;
    }
    for (std::size_t i = sml.size(); carry && i < r.size(); ++i) {
      std::uint64_t cur = static_cast<std::uint64_t>(r[i]) + carry;
      r[i] = static_cast<std::uint32_t>(cur & 0xffffffffULL);
      carry = cur >> 32;
    }
    if (carry) r.push_back(static_cast<std::uint32_t>(carry));
    return r;
  }
  // requires |a| >= |b|
  static std::vector<std::uint32_t> sub_mag(const std::vector<std::uint32_t>& a,
                                            const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> r = a;
    std::int64_t borrow = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::int64_t cur = static_cast<std::int64_t>(r[i]) - borrow - (i < b.size() ? b[i] : 0);
      if (cur < 0) {
        cur += 1LL << 32;
        borrow = 1;
      } else {
        borrow = 0;
      }
      r[i] = static_cast<std::uint32_t>(cur);
    }
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
  }
  static void shl1(std::vector<std::uint32_t>& v) {
    std::uint32_t carry = 0;
    for (auto& limb : v) {
      std::uint32_t nc = limb >> 31;
      limb = (limb << 1) | carry;
      carry = nc;
    }
    if (carry) v.push_back(carry);
  }
};

}  // namespace nkl

#endif
