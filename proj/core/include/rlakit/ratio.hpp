#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace rla {

// Exact rational arithmetic on 64-bit integers with 128-bit intermediates.
// Vote margins, error bounds, and taints stay exact until the caller asks
// for a double; this keeps equalities like sum(e_p) == U * mean_taint free
// of rounding drift.
//
// Invariants: den > 0, gcd(|num|, den) == 1. Operations throw
// std::overflow_error if a reduced result no longer fits in int64.
class Ratio {
 public:
  constexpr Ratio() : num_(0), den_(1) {}
  Ratio(long long value) : num_(value), den_(1) {}  // NOLINT: implicit by design
  Ratio(long long num, long long den) { assign(num, den); }

  static Ratio of(long long num, long long den) { return Ratio(num, den); }

  long long num() const { return num_; }
  long long den() const { return den_; }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  bool is_negative() const { return num_ < 0; }
  bool is_zero() const { return num_ == 0; }

  Ratio operator-() const { return Ratio(-num_, den_); }

  friend Ratio operator+(const Ratio& a, const Ratio& b) {
    __int128 n = i128(a.num_) * b.den_ + i128(b.num_) * a.den_;
    __int128 d = i128(a.den_) * b.den_;
    return from128(n, d);
  }
  friend Ratio operator-(const Ratio& a, const Ratio& b) { return a + (-b); }
  friend Ratio operator*(const Ratio& a, const Ratio& b) {
    return from128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Ratio operator/(const Ratio& a, const Ratio& b) {
    if (b.num_ == 0) throw std::invalid_argument("Ratio: division by zero");
    return from128(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }

  friend bool operator==(const Ratio& a, const Ratio& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Ratio& a, const Ratio& b) { return !(a == b); }
  friend bool operator<(const Ratio& a, const Ratio& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }
  friend bool operator>(const Ratio& a, const Ratio& b) { return b < a; }
  friend bool operator<=(const Ratio& a, const Ratio& b) { return !(b < a); }
  friend bool operator>=(const Ratio& a, const Ratio& b) { return !(a < b); }

  // Smallest integer >= this value.
  long long ceil() const {
    long long q = num_ / den_;
    if (num_ % den_ > 0) ++q;
    return q;
  }
  long long floor() const {
    long long q = num_ / den_;
    if (num_ % den_ < 0) --q;
    return q;
  }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

 private:
  using i128 = __int128;

  void assign(long long num, long long den) {
    if (den == 0) throw std::invalid_argument("Ratio: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    num_ = num;
    den_ = den;
  }

  static Ratio from128(i128 num, i128 den) {
    if (den == 0) throw std::invalid_argument("Ratio: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    i128 a = num < 0 ? -num : num;
    i128 b = den;
    while (b != 0) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      num /= a;
      den /= a;
    }
    constexpr i128 lo = std::numeric_limits<long long>::min();
    constexpr i128 hi = std::numeric_limits<long long>::max();
    if (num < lo || num > hi || den > hi)
      throw std::overflow_error("Ratio: value exceeds 64-bit range");
    Ratio r;
    r.num_ = static_cast<long long>(num);
    r.den_ = static_cast<long long>(den);
    return r;
  }

  long long num_;
  long long den_;
};

}  // namespace rla
