// High-precision reference evaluation of S_n(x) used for validation.
//
// x is always taken as the exact binary64 value it holds. Binomials are exact
// integers; every other quantity is carried at (bits + guard) precision.

#pragma once

#include <mpfr.h>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <gmpxx.h>

namespace ksone {

inline constexpr int kDefaultOracleBits = 300;
inline constexpr int kMinOracleBits = 160;

class BigFloat {
 public:
  explicit BigFloat(int bits = kDefaultOracleBits);
  BigFloat(double v, int bits);
  BigFloat(const BigFloat& other);
  BigFloat(BigFloat&& other) noexcept;
  BigFloat& operator=(const BigFloat& other);
  BigFloat& operator=(BigFloat&& other) noexcept;
  ~BigFloat();

  mpfr_ptr get() noexcept { return value_; }
  mpfr_srcptr get() const noexcept { return value_; }
  [[nodiscard]] int precision() const noexcept { return static_cast<int>(mpfr_get_prec(value_)); }

  /// Round to nearest binary64.
  [[nodiscard]] double to_double() const;
  /// Scientific notation with the given number of significant digits.
  [[nodiscard]] std::string to_string(int digits = 40) const;
  /// Parses a decimal string, rounding once to the given precision.
  static BigFloat from_string(const std::string& s, int bits);

 private:
  mpfr_t value_;
};

struct OracleValues {
  BigFloat sf;
  BigFloat cdf;
  BigFloat pdf;
};

/// Throws std::invalid_argument for n < 1, NaN x, or bits < kMinOracleBits.
OracleValues oracle_eval(std::int64_t n, double x, int bits = kDefaultOracleBits);
OracleValues oracle_eval(std::int64_t n, const BigFloat& x, int bits = kDefaultOracleBits);
BigFloat oracle_sf(std::int64_t n, double x, int bits = kDefaultOracleBits);
BigFloat oracle_pdf(std::int64_t n, double x, int bits = kDefaultOracleBits);

/// Root of S_n(x) = p_sf by bisection, to 2^-170 relative bracket width.
BigFloat oracle_isf(std::int64_t n, double p_sf, int bits = kDefaultOracleBits);

/// Both summation forms evaluated exactly over the common denominator
/// (n 2^s)^n, where x = M / 2^s. lower is the numerator of S_n(x), upper the
/// numerator of 1 - S_n(x) from the alternating upper sum.
struct ExactSums {
  mpz_class lower;
  mpz_class upper;
  mpz_class denom;
};

/// Requires 0 < x < 1 and n >= 2. Cost grows like n^2 (s + log n) bits.
ExactSums exact_sums(std::int64_t n, double x);

struct OracleRecord {
  std::int64_t n = 0;
  double x = 0.0;
  std::string sf;
  std::string cdf;
  std::string pdf;
  int bits = kDefaultOracleBits;
};

OracleRecord make_record(std::int64_t n, double x, int bits = kDefaultOracleBits);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string hex_double(double x);

/// In-memory view of a CSV oracle cache keyed by (n, hex(x), bits).
class OracleCache {
 public:
  /// Missing files load as an empty cache; unreadable or malformed ones throw IoError.
  void load(const std::string& path);
  void save(const std::string& path) const;

  [[nodiscard]] const OracleRecord* find(std::int64_t n, double x, int bits) const;
  void insert(const OracleRecord& rec);
  /// Returns the cached record, computing and inserting it if absent.
  const OracleRecord& ensure(std::int64_t n, double x, int bits);

  [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
  [[nodiscard]] bool dirty() const noexcept { return dirty_; }

 private:
  using Key = std::tuple<std::int64_t, std::string, int>;
  std::map<Key, OracleRecord> records_;
  bool dirty_ = false;
};

void write_oracle_csv(const std::string& path, const std::vector<OracleRecord>& records);
std::vector<OracleRecord> read_oracle_csv(const std::string& path);

/// Evaluates every (n, x) pair and writes the records to path. Returns the count.
std::size_t oracle_dump(const std::vector<std::int64_t>& n_list, const std::vector<double>& xs,
                        const std::string& path, int bits = kDefaultOracleBits);

}  // namespace ksone
