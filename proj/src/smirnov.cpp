#include "ksone/smirnov.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <type_traits>

namespace ksone {

std::string_view to_string(PrecisionMode mode) noexcept {
  switch (mode) {
    case PrecisionMode::Fast64:
      return "fast64";
    case PrecisionMode::Hybrid:
      return "hybrid";
    case PrecisionMode::Full:
      return "full";
  }
  return "unknown";
}

PrecisionMode parse_mode(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "fast64") return PrecisionMode::Fast64;
  if (lower == "hybrid") return PrecisionMode::Hybrid;
  if (lower == "full") return PrecisionMode::Full;
  throw std::invalid_argument("unknown precision mode: " + std::string(name));
}

// The alternating sum amplifies the error of its terms; only Full computes the
// powers accurately enough to afford nx up to 3.
int dwass_cutoff(PrecisionMode mode) noexcept { return mode == PrecisionMode::Full ? 3 : 1; }

NxSplit nx_split(std::int64_t n, double x) {
  const auto [u, v] = two_prod(static_cast<double>(n), x);
  const double kf = std::floor(u);
  // u - kf is exact: the fractional part of a binary64 value is representable.
  const auto [u1, v1] = two_sum(u - kf, v);
  auto k = static_cast<std::int64_t>(kf);
  if (u1 >= 0.0 && u1 < 1.0) {
    return {k, u1, v1};
  }
  if (u1 > 1.0 || (u1 == 1.0 && v1 >= 0.0)) {
    const auto r = two_sum(u1 - 1.0, v1);
    return {k + 1, r.s, r.e};
  }
  // n*x lies just below an integer. alpha is usually still a double-double
  // below 1; snap to the knot only when it rounds to 1.
  const auto w = u1 == 1.0 ? ExactPair{u1, 0.0} : two_sum(1.0, u1);
  const auto r = two_sum(w.s, w.e + v1);
  if (u1 == 1.0) {
    return r.s < 1.0 ? NxSplit{k, r.s, r.e} : NxSplit{k + 1, 0.0, 0.0};
  }
  return r.s < 1.0 ? NxSplit{k - 1, r.s, r.e} : NxSplit{k, 0.0, 0.0};
}

namespace {

constexpr double kTwo512 = 0x1p512;

DoubleDouble dd_from_i128(__int128 v) {
  const auto hi = static_cast<double>(v);
  const auto lo = static_cast<double>(v - static_cast<__int128>(hi));
  return {hi, lo};
}

DoubleDouble dd_from_i64(std::int64_t v) { return dd_from_i128(v); }

}  // namespace

BinomAccum binom_step(BinomAccum acc, std::int64_t n, std::int64_t i, PrecisionMode mode) {
  const auto num = static_cast<double>(n - i + 1);
  const auto den = static_cast<double>(i);
  if (mode == PrecisionMode::Fast64) {
    acc.c = DoubleDouble{acc.c.hi * num / den};
  } else {
    acc.c = div_d2(mul_d2(acc.c, num), den);
  }
  if (acc.c.hi >= kTwo512) {
    acc.c = dd_ldexp(acc.c, -512);
    acc.e_c += 512;
  } else if (acc.c.hi < 1.0) {
    acc.c = dd_ldexp(acc.c, 512);
    acc.e_c -= 512;
  }
  return acc;
}

namespace {

// Sign of n - j - (k + alpha): +1, -1, or 0 when the base of the second power vanishes.
int upper_base_sign(std::int64_t n, std::int64_t j, const NxSplit& s) {
  const std::int64_t m = n - j - s.k;
  if (m > 0) return 1;
  if (m < 0) return -1;
  return s.alpha > 0.0 ? -1 : 0;
}

TermPair make_term(DoubleDouble a, std::int64_t expt, DoubleDouble m) {
  const ScaledDD na = normalize(ScaledDD{a, expt});
  return {na.sig, na.sig * m, na.expt};
}

// n(n a^2 + (j + 2kn) a + j^2 + jk - jn + k^2 n) / ((k + a)(j + k + a)(j + k + a - n))
// which is 1/x + (j-1)/(x + j/n) - (n-j)/(1 - x - j/n) written over a common
// denominator, with the integer parts of the numerator formed exactly.
DoubleDouble multiplier_dd(std::int64_t n, std::int64_t j, const NxSplit& s) {
  const __int128 N = n, J = j, K = s.k;
  const DoubleDouble w = dd_from_i128(J * J + J * K - J * N + K * K * N);
  const DoubleDouble z = dd_from_i128(J + 2 * K * N);
  const DoubleDouble a{s.alpha, s.alpha_lo};
  const DoubleDouble nd = dd_from_i64(n);
  const DoubleDouble num = nd * ((nd * a + z) * a + w);
  const DoubleDouble d1 = a + dd_from_i64(s.k);
  const DoubleDouble d2 = a + dd_from_i64(j + s.k);
  const DoubleDouble d3 = a + dd_from_i64(j + s.k - n);
  return num / (d1 * d2 * d3);
}

double multiplier_d(std::int64_t n, std::int64_t j, const NxSplit& s) {
  const auto nd = static_cast<double>(n);
  const auto jd = static_cast<double>(j);
  const auto kd = static_cast<double>(s.k);
  const double a = s.alpha;
  const double w = jd * jd + jd * kd - jd * nd + kd * kd * nd;
  const double z = jd + 2.0 * kd * nd;
  const double num = nd * ((nd * a + z) * a + w);
  // Integer parts first so that alpha just below 1 cannot round a factor to 0.
  return num / ((kd + a) * ((jd + kd) + a) * ((jd + kd - nd) + a));
}

TermPair first_lower_term(std::int64_t n, double x, PrecisionMode mode) {
  // (1-x)^n / x and its derivative factor -n/(1-x).
  const auto q = two_sum(1.0, -x);
  const DoubleDouble base{q.s, q.e};
  if (mode == PrecisionMode::Fast64) {
    const ScaledFloat t = pow_frac_scaled(1, -x, 1, 0.0, n);
    const double a = t.sig / x;
    const double m = -static_cast<double>(n) / q.s;
    const ScaledFloat na = normalize(ScaledFloat{a, t.expt});
    return {DoubleDouble{na.sig}, DoubleDouble{na.sig * m}, na.expt};
  }
  const ScaledDD t =
      mode == PrecisionMode::Full ? pow_scaled_dd(base, n) : pow_scaled_simple(base, n);
  const DoubleDouble m = -div2d(static_cast<double>(n), base);
  return make_term(t.sig / x, t.expt, m);
}

}  // namespace

TermPair term_aj_dj(std::int64_t n, const NxSplit& s, double x, std::int64_t j,
                    const BinomAccum& acc, PrecisionMode mode) {
  if (j < 0 || j > n) {
    throw std::invalid_argument("term index out of range");
  }
  if (j == 0) {
    return first_lower_term(n, x, mode);
  }
  const int sign = upper_base_sign(n, j, s);
  if (sign == 0 && j < n) {
    throw std::domain_error("term evaluated on its own knot");
  }
  const std::int64_t qe = n - j;
  const std::int64_t q_int = sign >= 0 ? n - j - s.k : j + s.k - n;
  // (-1)^(n-j) for the alternating upper sum.
  const double sgn = (sign < 0 && (qe & 1)) ? -1.0 : 1.0;

  if (mode == PrecisionMode::Fast64) {
    const ScaledFloat sp = pow_frac_scaled(j + s.k, s.alpha, n, 0.0, j - 1);
    ScaledFloat tp{0.5, 1};
    if (qe > 0) {
      tp = pow_frac_scaled(q_int, sign >= 0 ? -s.alpha : s.alpha, n, 0.0, qe);
    }
    const double a = sgn * acc.c.hi * tp.sig * sp.sig;
    const ScaledFloat na = normalize(ScaledFloat{a, acc.e_c + sp.expt + tp.expt});
    const double m = multiplier_d(n, j, s);
    return {DoubleDouble{na.sig}, DoubleDouble{na.sig * m}, na.expt};
  }

  const DoubleDouble nd = dd_from_i64(n);
  const DoubleDouble alpha{s.alpha, s.alpha_lo};
  // |1 - x - j/n| from its exact numerator.
  DoubleDouble qn = dd_from_i64(q_int);
  qn = sign >= 0 ? qn - alpha : qn + alpha;
  const DoubleDouble q_abs = qn / nd;

  if (mode == PrecisionMode::Hybrid) {
    const DoubleDouble p = (dd_from_i64(j + s.k) + alpha) / nd;
    const ScaledDD sp = pow_scaled_simple(p, j - 1);
    const ScaledDD tp = qe > 0 ? pow_scaled_simple(q_abs, qe) : ScaledDD{DoubleDouble{0.5}, 1};
    const DoubleDouble a = acc.c * tp.sig * sp.sig * sgn;
    return make_term(a, acc.e_c + sp.expt + tp.expt, multiplier_dd(n, j, s));
  }

  // Full: P = j/n + x, powers and multiplier carried in double-double.
  const DoubleDouble p = div22(static_cast<double>(j), static_cast<double>(n)) + x;
  const ScaledDD sp = pow_scaled_dd(p, j - 1);
  const ScaledDD tp = qe > 0 ? pow_scaled_dd(q_abs, qe) : ScaledDD{DoubleDouble{0.5}, 1};
  const DoubleDouble a = acc.c * tp.sig * sp.sig * sgn;
  DoubleDouble m = div22(1.0, x) + div2d(static_cast<double>(j - 1), p);
  if (qe > 0) {
    const DoubleDouble q_signed = sign >= 0 ? q_abs : -q_abs;
    m = m + div2d(static_cast<double>(j - n), q_signed);
  }
  return make_term(a, acc.e_c + sp.expt + tp.expt, m);
}

namespace {

// Sums scaled terms in a shared binary frame. A term more than 2^kFrameSpan
// above the frame moves the frame; one more than 2^kFrameSpan below it cannot
// affect a binary64 result and is dropped.
template <typename T>
class ScaledAccumulator {
 public:
  void add(const TermPair& t) {
    if (t.a.hi == 0.0 && t.d.hi == 0.0) {
      return;
    }
    if (empty_) {
      frame_ = t.expt;
      empty_ = false;
    } else if (t.expt - frame_ > kFrameSpan) {
      const std::int64_t shift = std::max<std::int64_t>(frame_ - t.expt, -4000);
      a_.rescale(static_cast<int>(shift));
      d_.rescale(static_cast<int>(shift));
      frame_ = t.expt;
    } else if (t.expt - frame_ < -kFrameSpan) {
      return;
    }
    const int sh = static_cast<int>(t.expt - frame_);
    a_.add(cast(dd_ldexp(t.a, sh)));
    d_.add(cast(dd_ldexp(t.d, sh)));
  }

  [[nodiscard]] DoubleDouble sum_a() const { return widen(a_.finalize()); }
  [[nodiscard]] DoubleDouble sum_d() const { return widen(d_.finalize()); }
  [[nodiscard]] std::int64_t frame() const { return frame_; }

 private:
  static constexpr std::int64_t kFrameSpan = 900;

  static T cast(DoubleDouble v) {
    if constexpr (std::is_same_v<T, double>) {
      return v.hi;
    } else {
      return v;
    }
  }
  static DoubleDouble widen(T v) {
    if constexpr (std::is_same_v<T, double>) {
      return DoubleDouble{v};
    } else {
      return v;
    }
  }

  CompensatedSum<T> a_;
  CompensatedSum<T> d_;
  std::int64_t frame_ = 0;
  bool empty_ = true;
};

// Round sig * 2^expt to binary64; values beyond the range saturate.
double to_binary64(DoubleDouble sig, std::int64_t expt) {
  if (sig.hi == 0.0) {
    return 0.0;
  }
  try {
    return combine_scaled(ScaledDD{sig, expt}).value;
  } catch (const std::range_error&) {
    return std::copysign(std::numeric_limits<double>::infinity(), sig.hi);
  }
}

// 1 - sig * 2^expt, evaluated in double-double before the final rounding.
double complement(DoubleDouble sig, std::int64_t expt) {
  if (sig.hi == 0.0 || expt < -1100) {
    return 1.0;
  }
  if (expt > 1100) {
    return -std::copysign(std::numeric_limits<double>::infinity(), sig.hi);
  }
  const ScaledDD v = normalize(ScaledDD{sig, expt});
  if (v.expt > 1024) {
    return -std::copysign(std::numeric_limits<double>::infinity(), sig.hi);
  }
  return (DoubleDouble{1.0} - dd_ldexp(v.sig, static_cast<int>(v.expt))).to_double();
}

double clip_probability(double p) {
  assert(p >= -0x1p-40 && p <= 1.0 + 0x1p-40);
  return std::clamp(p, 0.0, 1.0);
}

double clip_density(double d) {
  assert(d >= -0x1p-40);
  return std::max(d, 0.0);
}

template <typename T>
SmirnovTriple sum_terms(std::int64_t n, double x, const NxSplit& split, bool upper,
                        PrecisionMode mode) {
  ScaledAccumulator<T> acc;
  BinomAccum c;
  std::int64_t terms;
  if (upper) {
    // At a knot (alpha == 0) the lowest upper term is zero; omitting it makes
    // the density the left limit.
    terms = split.alpha == 0.0 ? split.k - 1 : split.k;
    acc.add(term_aj_dj(n, split, x, n, c, mode));
  } else {
    terms = n - split.k - 1;
    acc.add(term_aj_dj(n, split, x, 0, c, mode));
  }
  for (std::int64_t i = 1; i <= terms; ++i) {
    c = binom_step(c, n, i, mode);
    const std::int64_t j = upper ? n - i : i;
    acc.add(term_aj_dj(n, split, x, j, c, mode));
  }

  const DoubleDouble xa = acc.sum_a() * x;
  const DoubleDouble xd = acc.sum_d() * x;
  const std::int64_t f = acc.frame();
  SmirnovTriple r;
  if (upper) {
    r.cdf = clip_probability(to_binary64(xa, f));
    r.sf = clip_probability(complement(xa, f));
    r.pdf = clip_density(to_binary64(xd, f));
  } else {
    r.sf = clip_probability(to_binary64(xa, f));
    r.cdf = clip_probability(complement(xa, f));
    r.pdf = clip_density(to_binary64(-xd, f));
  }
  return r;
}

}  // namespace

SmirnovTriple smirnov(std::int64_t n, double x, PrecisionMode mode) {
  if (n < 1) {
    throw std::invalid_argument("smirnov: n must be >= 1");
  }
  if (std::isnan(x)) {
    throw std::invalid_argument("smirnov: x is NaN");
  }
  if (x < 0.0) return {1.0, 0.0, 0.0};
  if (x > 1.0) return {0.0, 1.0, 0.0};
  if (n == 1) return {1.0 - x, x, 1.0};
  if (x == 0.0) return {1.0, 0.0, 1.0};
  if (x == 1.0) return {0.0, 1.0, 0.0};
  const auto nd = static_cast<double>(n);
  if (2.0 * nd * x * x > 745.0) return {0.0, 1.0, 0.0};

  if (n > kAsymptoteMinN) {
    const double t = 6.0 * nd * x + 1.0;
    const double e = -t * t / (18.0 * nd);
    const double sf = std::exp(e);
    return {sf, -std::expm1(e), t * 2.0 * sf / 3.0};
  }

  const NxSplit split = nx_split(n, x);
  const std::int64_t cutoff = dwass_cutoff(mode);
  const bool within_cutoff = split.k < cutoff || (split.k == cutoff && split.alpha == 0.0);
  const bool at_most_one = split.k == 0 || (split.k == 1 && split.alpha == 0.0);
  // Near x = 1 the upper sum would need nearly all n terms; keep it to small k.
  const bool upper = within_cutoff && (split.k < n - 1 || at_most_one);

  if (mode == PrecisionMode::Fast64) {
    return sum_terms<double>(n, x, split, upper, mode);
  }
  return sum_terms<DoubleDouble>(n, x, split, upper, mode);
}

double smirnov_sf(std::int64_t n, double x, PrecisionMode mode) { return smirnov(n, x, mode).sf; }
double smirnov_cdf(std::int64_t n, double x, PrecisionMode mode) { return smirnov(n, x, mode).cdf; }
double smirnov_pdf(std::int64_t n, double x, PrecisionMode mode) { return smirnov(n, x, mode).pdf; }

}  // namespace ksone
