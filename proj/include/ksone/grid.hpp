// Evaluation grids: decimal x/p ranges and n lists.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ksone/smirnov.hpp"

namespace ksone {

/// start:step:stop in decimal, stored as integers over a common power of ten
/// so that point i is (start + i*step) * 10^-scale exactly before the single
/// rounding to binary64.
struct DecimalRange {
  std::int64_t start = 0;
  std::int64_t step = 1;
  std::int64_t stop = 0;
  int scale = 0;

  /// Throws std::invalid_argument on syntax errors, step <= 0 or start > stop.
  static DecimalRange parse(const std::string& text);

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] double at(std::size_t i) const;
  [[nodiscard]] std::vector<double> values() const;
};

/// "5", "1:20", "100:100:1000", comma separated. Every n must be >= 1.
std::vector<std::int64_t> parse_n_list(const std::string& text);

struct GridSpec {
  std::vector<std::int64_t> n_list;
  DecimalRange x_range;
  PrecisionMode mode = PrecisionMode::Hybrid;

  /// Throws std::invalid_argument if n_list is empty or holds n < 1.
  void validate() const;
};

/// n values used by the default accuracy comparison.
std::vector<std::int64_t> desk_n_ladder();

}  // namespace ksone
