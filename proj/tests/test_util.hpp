// Exact and high-precision helpers shared by the unit tests.

#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <cstdint>

#include "ksone/extended_arith.hpp"

namespace ksone::testing {

inline mpq_class exact(double x) { return mpq_class(x); }
inline mpq_class exact(DoubleDouble v) { return mpq_class(v.hi) + mpq_class(v.lo); }

/// Holds a^m at 2000 bits; relative errors are read off in that precision.
class Reference {
 public:
  explicit Reference(const mpq_class& a, std::int64_t m = 1) {
    mpfr_init2(v_, 2000);
    mpfr_set_q(v_, a.get_mpq_t(), MPFR_RNDN);
    mpfr_pow_ui(v_, v_, static_cast<unsigned long>(m), MPFR_RNDN);
  }
  Reference(const Reference&) = delete;
  Reference& operator=(const Reference&) = delete;
  ~Reference() { mpfr_clear(v_); }

  /// |sig * 2^expt - ref| / |ref|
  [[nodiscard]] double rel_error(const mpq_class& sig, std::int64_t expt) const {
    mpfr_t t;
    mpfr_init2(t, 2000);
    mpfr_set_q(t, sig.get_mpq_t(), MPFR_RNDN);
    mpfr_mul_2si(t, t, static_cast<long>(expt), MPFR_RNDN);
    mpfr_sub(t, t, v_, MPFR_RNDN);
    mpfr_div(t, t, v_, MPFR_RNDN);
    const double r = std::fabs(mpfr_get_d(t, MPFR_RNDN));
    mpfr_clear(t);
    return r;
  }

 private:
  mpfr_t v_;
};

struct PowExact {
  mpq_class base;
  std::int64_t m;
};

inline PowExact pow_exact(const mpq_class& base, std::int64_t m) { return {base, m}; }

inline double dd_rel_error(DoubleDouble v, const mpq_class& truth) {
  return Reference(truth).rel_error(exact(v), 0);
}

inline double dd_rel_error(DoubleDouble v, const PowExact& p) {
  return Reference(p.base, p.m).rel_error(exact(v), 0);
}

inline double scaled_rel_error(const ScaledDD& v, const PowExact& p) {
  return Reference(p.base, p.m).rel_error(exact(v.sig), v.expt);
}

/// Relative error of y as an approximation of base^m.
inline double rel_error_vs_pow(double base, std::int64_t m, double y) {
  return Reference(exact(base), m).rel_error(exact(y), 0);
}

}  // namespace ksone::testing
