// One-sided Kolmogorov-Smirnov distribution: S_n(x) = P(D_n^+ >= x), its
// complement and its density, evaluated jointly.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "ksone/extended_arith.hpp"

namespace ksone {

enum class PrecisionMode {
  Fast64,  // binary64 arithmetic throughout
  Hybrid,  // double-double add/mul/div, pow_d_simple for the powers
  Full,    // double-double throughout, pow_scaled_dd for the powers
};

std::string_view to_string(PrecisionMode mode) noexcept;
/// Accepts "fast64", "hybrid", "full" (case-insensitive). Throws std::invalid_argument.
PrecisionMode parse_mode(std::string_view name);

/// n*x = k + alpha + alpha_lo exactly (up to the cases noted in nx_split).
struct NxSplit {
  std::int64_t k = 0;
  double alpha = 0.0;
  /// Residual of alpha; |alpha_lo| <= 2^-53 alpha.
  double alpha_lo = 0.0;
};

/// Decompose n*x into integer and fractional parts without rounding the
/// product first. Requires 1 <= n < 2^52 and 0 <= x <= 1.
NxSplit nx_split(std::int64_t n, double x);

struct SmirnovTriple {
  double sf = 1.0;
  double cdf = 0.0;
  double pdf = 0.0;
};

/// binom(n, i) ~= c * 2^e_c with 1 <= c < 2^512.
struct BinomAccum {
  DoubleDouble c{1.0};
  std::int64_t e_c = 0;
};

/// Advance from binom(n, i-1) to binom(n, i). Fast64 keeps c.lo == 0.
BinomAccum binom_step(BinomAccum acc, std::int64_t n, std::int64_t i, PrecisionMode mode);

/// One summand and its derivative multiplier applied, both scaled by 2^expt:
/// A_j = a * 2^expt, D_j = d * 2^expt. In the upper (alternating) sum a carries
/// the sign (-1)^(n-j).
struct TermPair {
  DoubleDouble a;
  DoubleDouble d;
  std::int64_t expt = 0;
};

/// A_j(n,x) = binom(n,j) (x + j/n)^(j-1) (1 - x - j/n)^(n-j) and
/// D_j = A_j * (1/x + (j-1)/(x + j/n) - (n-j)/(1 - x - j/n)).
/// j == 0 uses the closed form (1-x)^n / x. Throws std::domain_error when
/// 1 - x - j/n vanishes with n > j (the term would be a zero times a pole).
TermPair term_aj_dj(std::int64_t n, const NxSplit& split, double x, std::int64_t j,
                    const BinomAccum& acc, PrecisionMode mode);

/// Throws std::invalid_argument for n < 1 or NaN x.
SmirnovTriple smirnov(std::int64_t n, double x, PrecisionMode mode = PrecisionMode::Hybrid);

double smirnov_sf(std::int64_t n, double x, PrecisionMode mode = PrecisionMode::Hybrid);
double smirnov_cdf(std::int64_t n, double x, PrecisionMode mode = PrecisionMode::Hybrid);
double smirnov_pdf(std::int64_t n, double x, PrecisionMode mode = PrecisionMode::Hybrid);

/// n*x at or below which the alternating upper sum is used.
int dwass_cutoff(PrecisionMode mode) noexcept;

/// Above this n the tightened large-n asymptote replaces the exact sum.
inline constexpr std::int64_t kAsymptoteMinN = 1'000'000'000'000;

}  // namespace ksone
