#include <gtest/gtest.h>

#include <cfloat>
#include <cmath>
#include <vector>

#include "ksone/oracle.hpp"
#include "ksone/smirnovi.hpp"

using namespace ksone;

namespace {

constexpr PrecisionMode kModes[] = {PrecisionMode::Fast64, PrecisionMode::Hybrid,
                                    PrecisionMode::Full};

FunctionValue quadratic(double x) { return {x * x - 0.25, 2.0 * x}; }

double residual(std::int64_t n, double x, double p) {
  return std::fabs(smirnov(n, x, PrecisionMode::Full).sf - p) / p;
}

}  // namespace

TEST(ProbabilityPair, Validation) {
  EXPECT_NO_THROW(ProbabilityPair::from_sf(0.3).validate());
  EXPECT_NO_THROW(ProbabilityPair::from_cdf(1e-300).validate());
  EXPECT_THROW((ProbabilityPair{-0.1, 1.1}).validate(), std::invalid_argument);
  EXPECT_THROW((ProbabilityPair{0.5, 0.6}).validate(), std::invalid_argument);
  EXPECT_THROW((ProbabilityPair{NAN, 0.5}).validate(), std::invalid_argument);
  EXPECT_THROW(smirnovi(5, ProbabilityPair{0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(smirnovi(0, ProbabilityPair::from_sf(0.5)), std::invalid_argument);
}

TEST(BracketedNewton, Quadratic) {
  const SolveReport r = bracketed_newton(quadratic, RootBracket{0.0, 1.0, 0.9}, DBL_EPSILON, 100);
  EXPECT_TRUE(r.converged);
  EXPECT_DOUBLE_EQ(r.x, 0.5);
}

// One Newton step lands on the root up to rounding of x0 - step; at most one
// more step and a confirming evaluation follow.
TEST(BracketedNewton, LinearConvergesImmediately) {
  for (const double a : {0.1, 0.37, 0.5, 0.999}) {
    const SolveReport r = bracketed_newton([a](double x) { return FunctionValue{x - a, 1.0}; },
                                           RootBracket{0.0, 1.0, 0.5}, DBL_EPSILON, 100);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.x, a);
    EXPECT_LE(r.iterations, 3);
  }
}

TEST(BracketedNewton, ReportsNonConvergence) {
  const SolveReport r = bracketed_newton(quadratic, RootBracket{0.0, 1.0, 0.9}, DBL_EPSILON, 2);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2);
}

TEST(BracketedNewton, OvershootFallsBackToBisection) {
  // Newton from the flat tail of atan jumps far outside the bracket.
  const SolveReport r = bracketed_newton(
      [](double x) {
        const double u = 20.0 * (x - 0.3);
        return FunctionValue{std::atan(u), 20.0 / (1.0 + u * u)};
      },
      RootBracket{0.0, 1.0, 0.9}, DBL_EPSILON, 100);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x, 0.3, 1e-15);
  EXPECT_GT(r.bisection_steps, 0);
}

TEST(Smirnovi, ClosedForms) {
  for (const auto m : kModes) {
    EXPECT_EQ(smirnovi(1, ProbabilityPair{0.3, 0.7}, m).x, 0.7);
    EXPECT_EQ(smirnovi(7, ProbabilityPair{0.0, 1.0}, m).x, 1.0);
    EXPECT_EQ(smirnovi(7, ProbabilityPair{1.0, 0.0}, m).x, 0.0);
    const SolveReport b = smirnovi(4, ProbabilityPair::from_sf(0.00390625), m);
    EXPECT_EQ(b.x, 0.75);
    EXPECT_EQ(smirnov(4, b.x, m).sf, 0.00390625);
  }
}

TEST(Smirnovi, EndpointUsesTheClosedFormExactly) {
  for (const std::int64_t n : {2, 3, 5, 10, 50, 100}) {
    const double p = std::pow(static_cast<double>(n), -static_cast<double>(n)) * (1.0 - DBL_EPSILON);
    const SolveReport r = smirnovi(n, ProbabilityPair::from_sf(p));
    EXPECT_EQ(r.x, 1.0 - std::pow(p, 1.0 / static_cast<double>(n))) << "n=" << n;
  }
}

TEST(Smirnovi, KnownRoots) {
  // Reference roots from 400-bit bisection.
  for (const auto m : kModes) {
    const SolveReport r = smirnovi(10, ProbabilityPair::from_sf(1.055e-6), m);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x, 0.7536719667080769850034573, 2e-16);
    EXPECT_NEAR(r.x, 0.753671966, 1e-8);

    const SolveReport a = smirnovi(20, ProbabilityPair::from_sf(0.3), m);
    EXPECT_NEAR(a.x, 0.165741541104653799860072, 2 * DBL_EPSILON * 0.166);

    const SolveReport t = smirnovi(400, ProbabilityPair::from_sf(std::ldexp(1.0, -500)), m);
    EXPECT_TRUE(t.converged);
    EXPECT_LE(t.iterations, kMaxNewtonIterations);
    EXPECT_NEAR(t.x, 0.6240162541771084937959459, 2e-16);

    const SolveReport d = smirnovi(500, ProbabilityPair::from_sf(std::ldexp(1.0, -1023)), m);
    EXPECT_TRUE(d.converged);
    EXPECT_NEAR(d.x, 0.7668174797463516004163224, 2e-16);
  }
}

TEST(Smirnovi, BracketContainsTheRoot) {
  for (const std::int64_t n : {2, 3, 7, 20, 60}) {
    for (const double p : {0.999, 0.9, 0.5, 0.1, 1e-3, 1e-8}) {
      const ProbabilityPair pp = ProbabilityPair::from_sf(p);
      if (p <= std::pow(static_cast<double>(n), -static_cast<double>(n))) continue;
      const RootBracket b = bracket_and_seed(n, pp);
      const double root = oracle_isf(n, p, 200).to_double();
      EXPECT_LE(b.a, root) << "n=" << n << " p=" << p;
      EXPECT_GE(b.b, root) << "n=" << n << " p=" << p;
      EXPECT_GE(b.x0, b.a);
      EXPECT_LE(b.x0, b.b);
      EXPECT_GT(b.a, 0.0);
      EXPECT_LE(b.b, 1.0);
    }
  }
}

TEST(Smirnovi, IteratesStayInsideTheBracket) {
  for (const std::int64_t n : {2, 5, 10, 100, 1000}) {
    for (const double p : {0.95, 0.5, 0.01, 1e-12, 1e-100}) {
      const ProbabilityPair pp = ProbabilityPair::from_sf(p);
      if (p <= std::pow(static_cast<double>(n), -static_cast<double>(n))) continue;
      const RootBracket b = bracket_and_seed(n, pp);
      std::vector<double> seen;
      const Evaluator f = [&](double x) {
        seen.push_back(x);
        const SmirnovTriple t = smirnov(n, x, PrecisionMode::Hybrid);
        return FunctionValue{p <= 0.5 ? t.sf - p : pp.p_cdf - t.cdf, -t.pdf};
      };
      const SolveReport r = bracketed_newton(f, b, DBL_EPSILON, kMaxNewtonIterations);
      EXPECT_TRUE(r.converged);
      for (const double x : seen) {
        ASSERT_GE(x, b.a);
        ASSERT_LE(x, b.b);
        ASSERT_GT(x, 0.0);
        ASSERT_LT(x, 1.0);
      }
    }
  }
}

TEST(Smirnovi, MonotoneInProbability) {
  for (const std::int64_t n : {3, 10, 100, 1000}) {
    for (const auto m : kModes) {
      double prev = 0.0;
      for (int i = 999; i >= 1; --i) {
        const double p = i / 1000.0;
        const double x = smirnovi(n, ProbabilityPair::from_sf(p), m).x;
        // Decreasing p_sf must not move x left by more than one ulp.
        ASSERT_GE(std::nextafter(x, 2.0), prev) << "n=" << n << " p=" << p;
        prev = std::max(prev, x);
      }
    }
  }
}

// Where one ulp of x moves S_n by more than 1e-14 relative the bound cannot
// be met by any double; there the solution must be the best double instead.
TEST(Smirnovi, RoundTrip) {
  for (const std::int64_t n : {2, 3, 4, 5, 6, 8, 10, 20, 50, 100, 200, 500, 1000, 2000}) {
    for (const auto m : {PrecisionMode::Hybrid, PrecisionMode::Full}) {
      for (int e = -10; e <= -1; ++e) {
        for (const double c : {1.0, 2.0, 5.0}) {
          for (const bool upper : {false, true}) {
            const double p = c * std::pow(10.0, e);
            const ProbabilityPair pp = upper ? ProbabilityPair::from_cdf(p) : ProbabilityPair::from_sf(p);
            const SolveReport r = smirnovi(n, pp, m);
            ASSERT_TRUE(r.converged);
            const SmirnovTriple t = smirnov(n, r.x, m);
            const double rt = upper ? std::fabs(t.cdf - p) / p : std::fabs(t.sf - p) / p;
            if (rt <= 1e-14) continue;
            ASSERT_FALSE(upper) << "n=" << n << " p_cdf=" << p;
            const double here = residual(n, r.x, pp.p_sf);
            double y = r.x;
            for (int k = 0; k < 2; ++k) y = std::nextafter(y, 0.0);
            for (int k = 0; k < 5; ++k, y = std::nextafter(y, 1.0)) {
              if (y == r.x) continue;
              EXPECT_GE(residual(n, y, pp.p_sf), here)
                  << "n=" << n << " p=" << p << " rt=" << rt << " better x=" << y;
            }
          }
        }
      }
    }
  }
}
