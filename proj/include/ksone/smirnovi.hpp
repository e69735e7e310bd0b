// Inverse survival function of the one-sided KS statistic.

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "ksone/smirnov.hpp"

namespace ksone {

/// Both tails of the target probability. Supplying the two separately lets the
/// smaller one carry full relative precision.
struct ProbabilityPair {
  double p_sf = 0.5;
  double p_cdf = 0.5;

  /// Throws std::invalid_argument unless both lie in [0,1] and sum to 1
  /// within 2^-52.
  void validate() const;

  static ProbabilityPair from_sf(double p_sf) { return {p_sf, 1.0 - p_sf}; }
  static ProbabilityPair from_cdf(double p_cdf) { return {1.0 - p_cdf, p_cdf}; }
};

struct RootBracket {
  double a = 0.0;
  double b = 1.0;
  double x0 = 0.5;
};

struct SolveReport {
  double x = 0.0;
  int iterations = 0;
  int bisection_steps = 0;
  bool converged = false;
};

/// Thrown by callers that treat non-convergence as an error.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(report) {}
  [[nodiscard]] const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

/// (1/n)(1 + 1/n)^(n-1) = P(D_n^+ <= 1/n).
double first_knot_cdf(std::int64_t n);

/// Bracket [a, b] and seed x0 for an interior target; requires n >= 2 and
/// 0 < p_sf, p_cdf. Returned endpoints are already widened by 256 ulp-ish
/// factors so that the computed objective changes sign across them.
RootBracket bracket_and_seed(std::int64_t n, const ProbabilityPair& p);

struct FunctionValue {
  double f = 0.0;
  double df = 0.0;
};

using Evaluator = std::function<FunctionValue(double)>;

/// Newton-Raphson kept inside a shrinking bracket. A step that leaves the
/// bracket, is not finite, or is at least half the step taken two iterations
/// earlier is replaced by bisection. Stops when the step or the bracket width
/// falls to tol relative to x.
SolveReport bracketed_newton(const Evaluator& f_and_df, RootBracket bracket, double tol,
                             int max_iter);

inline constexpr int kMaxNewtonIterations = 100;

/// x with S_n(x) = p.p_sf. Non-convergence is reported via converged = false.
SolveReport smirnovi(std::int64_t n, const ProbabilityPair& p,
                     PrecisionMode mode = PrecisionMode::Hybrid);

}  // namespace ksone
