// Extended-precision and extended-range floating-point primitives.
//
// DoubleDouble is the usual unevaluated sum of two binary64 values giving
// roughly 106 significand bits. Scaled<T> pairs a significand with a 64-bit
// binary exponent so that products of thousands of factors can be formed
// without intermediate underflow or overflow.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ksone {

/// An error-free pair: s is the rounded result, e the exact residual.
struct ExactPair {
  double s;
  double e;
};

/// Knuth's TwoSum: s + e == a + b exactly.
inline ExactPair two_sum(double a, double b) noexcept {
  const double s = a + b;
  const double bb = s - a;
  const double e = (a - (s - bb)) + (b - bb);
  return {s, e};
}

/// Requires |a| >= |b| (or a == 0).
inline ExactPair fast_two_sum(double a, double b) noexcept {
  const double s = a + b;
  return {s, b - (s - a)};
}

/// p + e == a * b exactly (barring underflow of e).
inline ExactPair two_prod(double a, double b) noexcept {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DoubleDouble() = default;
  constexpr explicit DoubleDouble(double h) : hi(h) {}
  constexpr DoubleDouble(double h, double l) : hi(h), lo(l) {}

  [[nodiscard]] double to_double() const noexcept { return hi + lo; }
  [[nodiscard]] bool is_zero() const noexcept { return hi == 0.0; }
};

// Basic double-double arithmetic. Relative error bounds (u = 2^-53):
// add/sub <= 4u^2, mul <= 8u^2, div <= 16u^2.
DoubleDouble dd_add(DoubleDouble a, DoubleDouble b) noexcept;
DoubleDouble dd_sub(DoubleDouble a, DoubleDouble b) noexcept;
DoubleDouble dd_mul(DoubleDouble a, DoubleDouble b) noexcept;
/// Throws std::domain_error when b is zero.
DoubleDouble dd_div(DoubleDouble a, DoubleDouble b);

// Mixed operand variants.
DoubleDouble add_d2(DoubleDouble a, double b) noexcept;
DoubleDouble mul_d2(DoubleDouble a, double b) noexcept;
DoubleDouble div_d2(DoubleDouble a, double b);
DoubleDouble div2d(double a, DoubleDouble b);
/// Double-double approximation of a / b for binary64 operands.
DoubleDouble div22(double a, double b);

DoubleDouble dd_ldexp(DoubleDouble a, int e) noexcept;

inline DoubleDouble operator+(DoubleDouble a, DoubleDouble b) noexcept { return dd_add(a, b); }
inline DoubleDouble operator-(DoubleDouble a, DoubleDouble b) noexcept { return dd_sub(a, b); }
inline DoubleDouble operator*(DoubleDouble a, DoubleDouble b) noexcept { return dd_mul(a, b); }
inline DoubleDouble operator/(DoubleDouble a, DoubleDouble b) { return dd_div(a, b); }
inline DoubleDouble operator+(DoubleDouble a, double b) noexcept { return add_d2(a, b); }
inline DoubleDouble operator-(DoubleDouble a, double b) noexcept { return add_d2(a, -b); }
inline DoubleDouble operator*(DoubleDouble a, double b) noexcept { return mul_d2(a, b); }
inline DoubleDouble operator/(DoubleDouble a, double b) { return div_d2(a, b); }
inline DoubleDouble operator-(DoubleDouble a) noexcept { return {-a.hi, -a.lo}; }

inline bool operator<(DoubleDouble a, DoubleDouble b) noexcept {
  return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}
inline bool operator==(DoubleDouble a, DoubleDouble b) noexcept {
  return a.hi == b.hi && a.lo == b.lo;
}

inline DoubleDouble abs(DoubleDouble a) noexcept { return a.hi < 0.0 ? -a : a; }

/// Power of a double-double following the powDSimple recipe: libm pow on the
/// leading part plus a first-order correction for the trailing part.
/// Requires a.hi > 0 and m >= 0; the result must be within binary64 range.
DoubleDouble pow_d_simple(DoubleDouble a, std::int64_t m);

/// sig * 2^expt, with 0.5 <= |sig| < 1 or sig == 0 && expt == 0.
template <typename T>
struct Scaled {
  T sig{};
  std::int64_t expt = 0;
};

using ScaledFloat = Scaled<double>;
using ScaledDD = Scaled<DoubleDouble>;

ScaledFloat normalize(ScaledFloat v) noexcept;
ScaledDD normalize(ScaledDD v) noexcept;

/// Exact significand/exponent split; throws std::domain_error on non-finite x.
ScaledFloat split_scaled(double x);

struct Combined {
  double value = 0.0;
  /// The true value is below the normal binary64 range (result is subnormal or 0).
  bool underflow = false;
};

/// sig * 2^expt rounded to binary64. Throws std::range_error when the value
/// exceeds the binary64 range.
Combined combine_scaled(ScaledFloat v);
Combined combine_scaled(const ScaledDD& v);

/// (a/b)^m carried as a scaled double-double; binary exponentiation with
/// renormalization after every multiply. Throws std::domain_error if a.hi <= 0
/// or m < 0.
ScaledDD pow_scaled_dd(DoubleDouble a, std::int64_t m);

/// Same contract as pow_scaled_dd but built on pow_d_simple: the exponent is
/// consumed in chunks small enough that every pow_d_simple call stays inside
/// the binary64 range.
ScaledDD pow_scaled_simple(DoubleDouble a, std::int64_t m);

/// ((a + b) / (c + d))^m as a ScaledFloat. The base is formed in double-double
/// (exact numerator and denominator, one double-double division).
ScaledFloat pow_frac_scaled(std::int64_t a, double b, std::int64_t c, double d, std::int64_t m);

/// Neumaier's variant of compensated summation. T is double or DoubleDouble.
template <typename T>
class CompensatedSum {
 public:
  void add(T term) noexcept {
    const T t = total_ + term;
    if (magnitude(total_) >= magnitude(term)) {
      compensation_ = compensation_ + ((total_ - t) + term);
    } else {
      compensation_ = compensation_ + ((term - t) + total_);
    }
    total_ = t;
  }

  CompensatedSum& operator+=(T term) noexcept {
    add(term);
    return *this;
  }

  [[nodiscard]] T finalize() const noexcept { return total_ + compensation_; }
  [[nodiscard]] T total() const noexcept { return total_; }
  [[nodiscard]] T compensation() const noexcept { return compensation_; }

  /// Multiplies the running state by 2^e.
  void rescale(int e) noexcept {
    total_ = ldexp_any(total_, e);
    compensation_ = ldexp_any(compensation_, e);
  }

 private:
  static double magnitude(double v) noexcept { return std::fabs(v); }
  static double magnitude(DoubleDouble v) noexcept { return std::fabs(v.hi); }
  static double ldexp_any(double v, int e) noexcept { return std::ldexp(v, e); }
  static DoubleDouble ldexp_any(DoubleDouble v, int e) noexcept { return dd_ldexp(v, e); }

  T total_{};
  T compensation_{};
};

}  // namespace ksone
