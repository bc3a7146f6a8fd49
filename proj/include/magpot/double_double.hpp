#pragma once

#include <cmath>
#include <limits>

namespace magpot {

/// Unevaluated sum hi + lo of two doubles with |lo| <= ulp(hi)/2, giving
/// about 106 bits of significand. Error-free transformations use Dekker's
/// splitting so no hardware FMA is assumed; compile without FP contraction.
class DoubleDouble {
 public:
  constexpr DoubleDouble() = default;
  constexpr DoubleDouble(double x) : hi_(x), lo_(0.0) {}  // NOLINT(google-explicit-constructor)
  constexpr DoubleDouble(double hi, double lo) : hi_(hi), lo_(lo) {}

  constexpr double hi() const { return hi_; }
  constexpr double lo() const { return lo_; }
  explicit constexpr operator double() const { return hi_ + lo_; }

  static constexpr DoubleDouble epsilon() { return DoubleDouble(4.93038065763132e-32); }

  friend DoubleDouble operator+(const DoubleDouble& a, const DoubleDouble& b) {
    auto [s, e] = two_sum(a.hi_, b.hi_);
    auto [t, f] = two_sum(a.lo_, b.lo_);
    e += t;
    auto [s2, e2] = quick_two_sum(s, e);
    e2 += f;
    auto [h, l] = quick_two_sum(s2, e2);
    return DoubleDouble(h, l);
  }
  friend DoubleDouble operator-(const DoubleDouble& a) { return DoubleDouble(-a.hi_, -a.lo_); }
  friend DoubleDouble operator-(const DoubleDouble& a, const DoubleDouble& b) { return a + (-b); }

  friend DoubleDouble operator*(const DoubleDouble& a, const DoubleDouble& b) {
    auto [p, e] = two_prod(a.hi_, b.hi_);
    e += a.hi_ * b.lo_ + a.lo_ * b.hi_;
    auto [h, l] = quick_two_sum(p, e);
    return DoubleDouble(h, l);
  }

  friend DoubleDouble operator/(const DoubleDouble& a, const DoubleDouble& b) {
    // Long division: three correction steps.
    const double q1 = a.hi_ / b.hi_;
    DoubleDouble r = a - b * DoubleDouble(q1);
    const double q2 = r.hi_ / b.hi_;
    r = r - b * DoubleDouble(q2);
    const double q3 = r.hi_ / b.hi_;
    auto [h, l] = quick_two_sum(q1, q2);
    return DoubleDouble(h, l) + DoubleDouble(q3);
  }

  DoubleDouble& operator+=(const DoubleDouble& o) { return *this = *this + o; }
  DoubleDouble& operator-=(const DoubleDouble& o) { return *this = *this - o; }
  DoubleDouble& operator*=(const DoubleDouble& o) { return *this = *this * o; }
  DoubleDouble& operator/=(const DoubleDouble& o) { return *this = *this / o; }

  friend bool operator==(const DoubleDouble& a, const DoubleDouble& b) {
    return a.hi_ == b.hi_ && a.lo_ == b.lo_;
  }
  friend bool operator<(const DoubleDouble& a, const DoubleDouble& b) {
    return a.hi_ < b.hi_ || (a.hi_ == b.hi_ && a.lo_ < b.lo_);
  }
  friend bool operator>(const DoubleDouble& a, const DoubleDouble& b) { return b < a; }
  friend bool operator<=(const DoubleDouble& a, const DoubleDouble& b) { return !(b < a); }
  friend bool operator>=(const DoubleDouble& a, const DoubleDouble& b) { return !(a < b); }

  friend DoubleDouble abs(const DoubleDouble& a) { return a.hi_ < 0.0 ? -a : a; }

  friend DoubleDouble sqrt(const DoubleDouble& a) {
    if (a.hi_ <= 0.0) return DoubleDouble(a.hi_ == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN());
    // One Newton step on the double approximation doubles the precision.
    const double x = std::sqrt(a.hi_);
    const DoubleDouble xx = DoubleDouble(x) * DoubleDouble(x);
    return DoubleDouble(x) + DoubleDouble((a - xx).hi_ * (0.5 / x));
  }

  friend bool isfinite(const DoubleDouble& a) { return std::isfinite(a.hi_) && std::isfinite(a.lo_); }

 private:
  struct Pair {
    double first;
    double second;
  };

  static Pair two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double e = (a - (s - bb)) + (b - bb);
    return {s, e};
  }
  static Pair quick_two_sum(double a, double b) {
    const double s = a + b;
    return {s, b - (s - a)};
  }
  static Pair split(double a) {
    constexpr double kSplitter = 134217729.0;  // 2^27 + 1
    const double t = kSplitter * a;
    const double hi = t - (t - a);
    return {hi, a - hi};
  }
  static Pair two_prod(double a, double b) {
    const double p = a * b;
    const auto [ah, al] = split(a);
    const auto [bh, bl] = split(b);
    const double e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    return {p, e};
  }

  double hi_ = 0.0;
  double lo_ = 0.0;
};

}  // namespace magpot
