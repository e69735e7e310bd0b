// Accuracy and inversion statistics over grids, plus plain sweeps.

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ksone/grid.hpp"
#include "ksone/oracle.hpp"
#include "ksone/smirnov.hpp"

namespace ksone {

inline constexpr double kUnitRoundoff52 = 0x1p-52;

/// Tolerances at which disagreement rates are reported.
const std::vector<double>& disagreement_tolerances();

struct ErrorStats {
  std::string label;
  double mean = 0.0;      // signed, units of 2^-52
  double mean_abs = 0.0;  // units of 2^-52
  double std_dev = 0.0;
  double max_abs = 0.0;
  std::size_t count = 0;
  /// Fraction of points whose |relative error| exceeds each tolerance
  /// (same order as disagreement_tolerances()).
  std::vector<double> disagreement;
};

class ErrorAccumulator {
 public:
  /// rel is a plain relative error (not scaled by 2^-52).
  void add(double rel);
  [[nodiscard]] std::size_t count() const noexcept { return count_; }
  /// Throws std::invalid_argument when no point was added.
  [[nodiscard]] ErrorStats finish(const std::string& label) const;

 private:
  std::size_t count_ = 0;
  double sum_ = 0.0;
  double sum_abs_ = 0.0;
  double sum_sq_ = 0.0;
  double max_abs_ = 0.0;
  std::vector<std::size_t> over_;
};

/// (oracle - computed) / oracle with the oracle rounded to nearest binary64.
double relative_error(const BigFloat& oracle, double computed);
double relative_error(double oracle_rounded, double computed);

enum class CompareFunction { Sf, Pdf };
enum class Restriction { None, SqrtN };

CompareFunction parse_function(const std::string& s);
Restriction parse_restriction(const std::string& s);

struct CompareOptions {
  std::vector<std::int64_t> n_list;
  DecimalRange x_range;
  std::vector<PrecisionMode> modes;
  CompareFunction function = CompareFunction::Sf;
  Restriction restriction = Restriction::None;
  int bits = kDefaultOracleBits;
  /// Compute oracle values missing from the cache instead of failing.
  bool compute_missing = false;
  /// Oracle values at or below this are excluded.
  double floor = 1e-275;
};

/// One ErrorStats per mode. A missing cache entry without compute_missing
/// throws IoError.
std::vector<ErrorStats> compare(const CompareOptions& opt, OracleCache& cache);

struct IsfRow {
  std::string label;
  std::size_t solves = 0;
  double mean_iterations = 0.0;
  double std_iterations = 0.0;
  int max_iterations = 0;
  std::size_t failures = 0;
  /// Round-trip |S_n(x) - p| / p disagreement rates, as in ErrorStats.
  std::vector<double> disagreement;
  double max_round_trip = 0.0;
};

struct IsfReport {
  std::vector<IsfRow> per_n;
  std::vector<IsfRow> bands;
};

/// Solves S_n(x) = p for every n (> 1) and every p strictly inside (0, 1) on
/// p_range, then checks the round trip in the same mode.
IsfReport isf_stats(const std::vector<std::int64_t>& n_list, const DecimalRange& p_range,
                    PrecisionMode mode);

/// CSV rows n,x,sf,cdf,pdf with a header; returns the row count.
std::size_t sweep(const GridSpec& grid, std::ostream& out);

/// %.17g
std::string format_double(double v);

}  // namespace ksone
