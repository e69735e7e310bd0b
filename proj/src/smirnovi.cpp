#include "ksone/smirnovi.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

namespace ksone {

void ProbabilityPair::validate() const {
  if (!(p_sf >= 0.0 && p_sf <= 1.0) || !(p_cdf >= 0.0 && p_cdf <= 1.0)) {
    throw std::invalid_argument("probabilities must lie in [0, 1]");
  }
  // p_sf + p_cdf - 1 evaluated without rounding.
  const auto s = two_sum(p_sf, p_cdf);
  const double excess = (s.s - 1.0) + s.e;
  if (std::fabs(excess) > 0x1p-52) {
    throw std::invalid_argument("p_sf and p_cdf must sum to 1");
  }
}

double first_knot_cdf(std::int64_t n) {
  const auto nd = static_cast<double>(n);
  return std::exp((nd - 1.0) * std::log1p(1.0 / nd)) / nd;
}

RootBracket bracket_and_seed(std::int64_t n, const ProbabilityPair& p) {
  const auto nd = static_cast<double>(n);
  constexpr double kEps = DBL_EPSILON;
  const double p1 = first_knot_cdf(n);
  RootBracket r;
  if (p.p_cdf <= p1) {
    r.a = p.p_cdf / M_E;
    r.b = std::min(p.p_cdf, 1.0 / nd);
    const double g0 = p.p_cdf / p1;
    const double g1 = g0 * (g0 + std::exp(1.0 - g0)) / (g0 + 1.0);
    r.x0 = std::min(g1 / nd, r.b);
  } else {
    const double log_sf = p.p_sf < 0.5 ? std::log(p.p_sf) : std::log1p(-p.p_cdf);
    r.a = std::max(-std::expm1(log_sf / nd), 1.0 / nd);
    const double b0 = std::sqrt(-log_sf / (2.0 * nd));
    const double b1 = b0 - 1.0 / (6.0 * nd);
    r.b = std::min(b0, 1.0 - 1.0 / nd);
    r.x0 = (r.a <= b1 && b1 <= r.b) ? b1 : (r.a + r.b) / 2.0;
  }
  r.a *= 1.0 - 256.0 * kEps;
  r.b = std::min(r.b * (1.0 + 256.0 * kEps), 1.0);
  return r;
}

SolveReport bracketed_newton(const Evaluator& f_and_df, RootBracket bracket, double tol,
                             int max_iter) {
  double a = bracket.a;
  double b = bracket.b;
  double x = std::clamp(bracket.x0, a, b);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double step_1 = kInf;  // previous step
  double step_2 = kInf;  // step two iterations back
  bool decreasing = true;
  SolveReport rep;
  while (rep.iterations < max_iter) {
    const FunctionValue v = f_and_df(x);
    ++rep.iterations;
    if (v.f == 0.0) {
      rep.x = x;
      rep.converged = true;
      return rep;
    }
    if (v.df > 0.0) {
      decreasing = false;
    } else if (v.df < 0.0) {
      decreasing = true;
    }
    // The root lies on the side where f changes sign.
    if ((v.f > 0.0) == decreasing) {
      a = x;
    } else {
      b = x;
    }
    double step = v.f / v.df;
    double next = x - step;
    if (std::isfinite(step) && std::fabs(step) <= tol * std::fabs(x)) {
      // Below the resolution of x; the endpoint update above may already
      // coincide with x, so test before the bracket check.
      rep.x = std::clamp(next, a, b);
      rep.converged = true;
      return rep;
    }
    const bool bad = !std::isfinite(next) || next <= a || next >= b ||
                     std::fabs(step) >= 0.5 * std::fabs(step_2);
    if (bad) {
      next = a + (b - a) / 2.0;
      step = x - next;
      ++rep.bisection_steps;
    }
    step_2 = step_1;
    step_1 = step;
    if (std::fabs(next - x) <= tol * std::fabs(next) || (b - a) <= tol * std::fabs(next)) {
      rep.x = next;
      rep.converged = true;
      return rep;
    }
    x = next;
  }
  rep.x = x;
  rep.converged = false;
  return rep;
}

SolveReport smirnovi(std::int64_t n, const ProbabilityPair& p, PrecisionMode mode) {
  if (n < 1) {
    throw std::invalid_argument("smirnovi: n must be >= 1");
  }
  p.validate();
  SolveReport done;
  done.converged = true;
  if (p.p_sf == 0.0) {
    done.x = 1.0;
    return done;
  }
  if (p.p_cdf == 0.0) {
    done.x = 0.0;
    return done;
  }
  if (n == 1) {
    done.x = p.p_cdf;
    return done;
  }
  const auto nd = static_cast<double>(n);
  if (p.p_sf <= std::pow(nd, -nd)) {
    done.x = 1.0 - std::pow(p.p_sf, 1.0 / nd);
    return done;
  }

  const RootBracket bracket = bracket_and_seed(n, p);
  const bool use_sf = p.p_sf <= 0.5;
  const Evaluator objective = [&](double x) {
    const SmirnovTriple t = smirnov(n, x, mode);
    const double f = use_sf ? t.sf - p.p_sf : p.p_cdf - t.cdf;
    return FunctionValue{f, -t.pdf};
  };
  return bracketed_newton(objective, bracket, DBL_EPSILON, kMaxNewtonIterations);
}

}  // namespace ksone
