#include "ksone/extended_arith.hpp"

#include <cfloat>
#include <climits>
#include <limits>

namespace ksone {

DoubleDouble dd_add(DoubleDouble a, DoubleDouble b) noexcept {
  // Accurate (IEEE-style) addition: both components summed error-free.
  auto [s, e] = two_sum(a.hi, b.hi);
  auto [t, f] = two_sum(a.lo, b.lo);
  e += t;
  auto r = fast_two_sum(s, e);
  r.e += f;
  r = fast_two_sum(r.s, r.e);
  return {r.s, r.e};
}

DoubleDouble dd_sub(DoubleDouble a, DoubleDouble b) noexcept { return dd_add(a, -b); }

DoubleDouble dd_mul(DoubleDouble a, DoubleDouble b) noexcept {
  auto [p, e] = two_prod(a.hi, b.hi);
  e += a.hi * b.lo + a.lo * b.hi;
  const auto r = fast_two_sum(p, e);
  return {r.s, r.e};
}

DoubleDouble add_d2(DoubleDouble a, double b) noexcept {
  auto [s, e] = two_sum(a.hi, b);
  e += a.lo;
  const auto r = fast_two_sum(s, e);
  return {r.s, r.e};
}

DoubleDouble mul_d2(DoubleDouble a, double b) noexcept {
  auto [p, e] = two_prod(a.hi, b);
  e += a.lo * b;
  const auto r = fast_two_sum(p, e);
  return {r.s, r.e};
}

DoubleDouble dd_div(DoubleDouble a, DoubleDouble b) {
  if (b.hi == 0.0) {
    throw std::domain_error("double-double division by zero");
  }
  // Long division with three partial quotients.
  const double q1 = a.hi / b.hi;
  DoubleDouble r = dd_sub(a, mul_d2(b, q1));
  const double q2 = r.hi / b.hi;
  r = dd_sub(r, mul_d2(b, q2));
  const double q3 = r.hi / b.hi;
  auto q = fast_two_sum(q1, q2);
  return add_d2({q.s, q.e}, q3);
}

DoubleDouble div_d2(DoubleDouble a, double b) { return dd_div(a, DoubleDouble{b}); }

DoubleDouble div2d(double a, DoubleDouble b) { return dd_div(DoubleDouble{a}, b); }

DoubleDouble div22(double a, double b) { return dd_div(DoubleDouble{a}, DoubleDouble{b}); }

DoubleDouble dd_ldexp(DoubleDouble a, int e) noexcept {
  return {std::ldexp(a.hi, e), std::ldexp(a.lo, e)};
}

DoubleDouble pow_d_simple(DoubleDouble a, std::int64_t m) {
  if (!(a.hi > 0.0) || m < 0) {
    throw std::domain_error("pow_d_simple requires a positive base and m >= 0");
  }
  const double md = static_cast<double>(m);
  const double y = std::pow(a.hi, md);
  const double z = a.lo / a.hi;
  double w;
  if (md > 1e8) {
    w = std::expm1(md * std::log1p(z));
  } else {
    w = md * z * (1.0 + (md - 1.0) * z / 2.0);
  }
  const auto r = two_sum(y, y * w);
  return {r.s, r.e};
}

ScaledFloat normalize(ScaledFloat v) noexcept {
  if (v.sig == 0.0) {
    return {0.0, 0};
  }
  int e = 0;
  const double s = std::frexp(v.sig, &e);
  return {s, v.expt + e};
}

ScaledDD normalize(ScaledDD v) noexcept {
  if (v.sig.hi == 0.0) {
    return {DoubleDouble{}, 0};
  }
  int e = 0;
  std::frexp(v.sig.hi, &e);
  return {dd_ldexp(v.sig, -e), v.expt + e};
}

ScaledFloat split_scaled(double x) {
  if (!std::isfinite(x)) {
    throw std::domain_error("split_scaled requires a finite value");
  }
  return normalize(ScaledFloat{x, 0});
}

namespace {

constexpr std::int64_t kMaxExpt = DBL_MAX_EXP;         // 1024
constexpr std::int64_t kMinNormalExpt = DBL_MIN_EXP;   // -1021: 0.5 * 2^-1021 = 2^-1022
constexpr std::int64_t kMinSubnormalExpt = -1100;      // well below 2^-1074

}  // namespace

Combined combine_scaled(ScaledFloat v) {
  v = normalize(v);
  if (v.sig == 0.0) {
    return {0.0, false};
  }
  if (v.expt > kMaxExpt) {
    throw std::range_error("combine_scaled: value exceeds binary64 range");
  }
  if (v.expt < kMinSubnormalExpt) {
    return {std::copysign(0.0, v.sig), true};
  }
  return {std::ldexp(v.sig, static_cast<int>(v.expt)), v.expt < kMinNormalExpt};
}

Combined combine_scaled(const ScaledDD& in) {
  const ScaledDD v = normalize(in);
  if (v.sig.hi == 0.0) {
    return {0.0, false};
  }
  if (v.expt > kMaxExpt) {
    throw std::range_error("combine_scaled: value exceeds binary64 range");
  }
  if (v.expt < kMinSubnormalExpt) {
    return {std::copysign(0.0, v.sig.hi), true};
  }
  const int e = static_cast<int>(v.expt);
  if (v.expt >= kMinNormalExpt) {
    // hi is already the correctly rounded value of hi + lo.
    return {std::ldexp(v.sig.hi, e), false};
  }
  // Subnormal: count in units of 2^-1074, where the scaled hi and lo are exact,
  // and round hi + lo to an integer once. lo only matters at an exact tie of hi.
  const int to_units = e + 1074;
  const double t = std::ldexp(v.sig.hi, to_units);
  const double tl = std::ldexp(v.sig.lo, to_units);
  double n = std::nearbyint(t);
  const double h = t - n;
  if (h == 0.5 && tl > 0.0) n += 1.0;
  if (h == -0.5 && tl < 0.0) n -= 1.0;
  return {std::ldexp(n, -1074), true};
}

ScaledDD pow_scaled_dd(DoubleDouble a, std::int64_t m) {
  if (!(a.hi > 0.0) || m < 0) {
    throw std::domain_error("pow_scaled_dd requires a positive base and m >= 0");
  }
  const ScaledDD base = normalize(ScaledDD{a, 0});
  DoubleDouble b = base.sig;
  std::int64_t b_expt = 0;
  DoubleDouble r{1.0};
  std::int64_t r_expt = 0;
  std::int64_t k = m;
  while (k > 0) {
    if (k & 1) {
      r = r * b;
      r_expt += b_expt;
      const ScaledDD rn = normalize(ScaledDD{r, r_expt});
      r = rn.sig;
      r_expt = rn.expt;
    }
    k >>= 1;
    if (k > 0) {
      b = b * b;
      b_expt *= 2;
      const ScaledDD bn = normalize(ScaledDD{b, b_expt});
      b = bn.sig;
      b_expt = bn.expt;
    }
  }
  ScaledDD out = normalize(ScaledDD{r, r_expt});
  out.expt += base.expt * m;
  return out;
}

namespace {

// Split a = s * 2^e with s in [1/sqrt(2), sqrt(2)), minimising |log2 s|.
ScaledDD normalize_centered(DoubleDouble a) {
  ScaledDD v = normalize(ScaledDD{a, 0});
  if (v.sig.hi < M_SQRT1_2) {
    v.sig = dd_ldexp(v.sig, 1);
    v.expt -= 1;
  }
  return v;
}

// Largest exponent for which s^m stays inside [2^-1000, 2^1000].
std::int64_t safe_chunk(double s) {
  const double lg = std::fabs(std::log2(s));
  if (lg * 4.0e15 < 1000.0) {
    return std::numeric_limits<std::int64_t>::max();
  }
  return static_cast<std::int64_t>(1000.0 / lg);
}

}  // namespace

ScaledDD pow_scaled_simple(DoubleDouble a, std::int64_t m) {
  if (!(a.hi > 0.0) || m < 0) {
    throw std::domain_error("pow_scaled_simple requires a positive base and m >= 0");
  }
  ScaledDD s = normalize_centered(a);
  std::int64_t expt = s.expt * m;
  DoubleDouble acc{1.0};
  std::int64_t acc_expt = 0;
  std::int64_t remaining = m;
  DoubleDouble base = s.sig;
  while (remaining > 0) {
    const std::int64_t chunk = safe_chunk(base.hi);
    if (remaining <= chunk) {
      acc = acc * pow_d_simple(base, remaining);
      break;
    }
    const std::int64_t q = remaining / chunk;
    const std::int64_t r = remaining % chunk;
    if (r > 0) {
      acc = acc * pow_d_simple(base, r);
      const ScaledDD n = normalize(ScaledDD{acc, acc_expt});
      acc = n.sig;
      acc_expt = n.expt;
    }
    const ScaledDD next = normalize_centered(pow_d_simple(base, chunk));
    expt += next.expt * q;
    base = next.sig;
    remaining = q;
  }
  ScaledDD out = normalize(ScaledDD{acc, acc_expt});
  out.expt += expt;
  return out;
}

ScaledFloat pow_frac_scaled(std::int64_t a, double b, std::int64_t c, double d, std::int64_t m) {
  const auto num = two_sum(static_cast<double>(a), b);
  const auto den = two_sum(static_cast<double>(c), d);
  if (den.s == 0.0) {
    throw std::domain_error("pow_frac_scaled: zero denominator");
  }
  const DoubleDouble base = dd_div({num.s, num.e}, {den.s, den.e});
  if (!(base.hi > 0.0)) {
    throw std::domain_error("pow_frac_scaled requires a positive base");
  }
  const ScaledDD p = pow_scaled_dd(base, m);
  // hi is the rounded significand; rounding may carry it to 1.0.
  return normalize(ScaledFloat{p.sig.hi, p.expt});
}

}  // namespace ksone
