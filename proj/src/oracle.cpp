#include "ksone/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

namespace ksone {

BigFloat::BigFloat(int bits) {
  mpfr_init2(value_, bits);
  mpfr_set_zero(value_, 1);
}

BigFloat::BigFloat(double v, int bits) {
  mpfr_init2(value_, std::max(bits, 53));
  mpfr_set_d(value_, v, MPFR_RNDN);
}

BigFloat::BigFloat(const BigFloat& other) {
  mpfr_init2(value_, mpfr_get_prec(other.value_));
  mpfr_set(value_, other.value_, MPFR_RNDN);
}

BigFloat::BigFloat(BigFloat&& other) noexcept {
  mpfr_init2(value_, MPFR_PREC_MIN);
  mpfr_swap(value_, other.value_);
}

BigFloat& BigFloat::operator=(const BigFloat& other) {
  if (this != &other) {
    mpfr_set_prec(value_, mpfr_get_prec(other.value_));
    mpfr_set(value_, other.value_, MPFR_RNDN);
  }
  return *this;
}

BigFloat& BigFloat::operator=(BigFloat&& other) noexcept {
  if (this != &other) {
    mpfr_swap(value_, other.value_);
  }
  return *this;
}

BigFloat::~BigFloat() { mpfr_clear(value_); }

double BigFloat::to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }

std::string BigFloat::to_string(int digits) const {
  char* buf = nullptr;
  const std::string fmt = "%." + std::to_string(digits - 1) + "Re";
  if (mpfr_asprintf(&buf, fmt.c_str(), value_) < 0) {
    throw std::runtime_error("mpfr_asprintf failed");
  }
  std::string out(buf);
  mpfr_free_str(buf);
  return out;
}

BigFloat BigFloat::from_string(const std::string& s, int bits) {
  BigFloat r(bits);
  if (mpfr_set_str(r.get(), s.c_str(), 10, MPFR_RNDN) != 0) {
    throw std::invalid_argument("not a decimal number: " + s);
  }
  return r;
}

namespace {

constexpr int kGuardBits = 64;

void check_args(std::int64_t n, int bits) {
  if (n < 1) {
    throw std::invalid_argument("oracle: n must be >= 1");
  }
  if (bits < kMinOracleBits) {
    throw std::invalid_argument("oracle: precision below 160 bits");
  }
}

OracleValues constant_values(double sf, double cdf, double pdf, int bits) {
  return {BigFloat(sf, bits), BigFloat(cdf, bits), BigFloat(pdf, bits)};
}

// Direct term-by-term sum for 0 < x < 1, n >= 2. x must have at most `bits`
// significant bits so that n*x is exact at the working precision.
OracleValues sum_direct(std::int64_t n, mpfr_srcptr x, int bits) {
  const mpfr_prec_t wp = bits + kGuardBits;
  const auto un = static_cast<unsigned long>(n);
  mpfr_t nx, rest, p, q, pm, qm, pw, qw, g, dg, t, sum, dsum;
  for (mpfr_ptr v : {nx, rest, p, q, pm, qm, pw, qw, g, dg, t, sum, dsum}) {
    mpfr_init2(v, wp);
  }
  mpfr_mul_ui(nx, x, un, MPFR_RNDN);
  mpfr_ui_sub(rest, un, nx, MPFR_RNDN);
  const long jmax = mpfr_get_si(rest, MPFR_RNDD);
  mpfr_set_zero(sum, 1);
  mpfr_set_zero(dsum, 1);
  mpz_class binom = 1;

  for (long j = 0; j <= jmax; ++j) {
    if (j > 0) {
      binom *= static_cast<unsigned long>(n - j + 1);
      binom /= static_cast<unsigned long>(j);
    }
    // p = (j + n x)/n and q = (n - j - n x)/n, each rounded once.
    mpfr_add_ui(p, nx, static_cast<unsigned long>(j), MPFR_RNDN);
    mpfr_div_ui(p, p, un, MPFR_RNDN);
    mpfr_sub_ui(q, rest, static_cast<unsigned long>(j), MPFR_RNDN);
    mpfr_div_ui(q, q, un, MPFR_RNDN);
    const auto qexp = static_cast<unsigned long>(n - j);
    if (j == 0) {
      // x p^-1 = 1: G = q^n, G' = -n q^(n-1).
      mpfr_pow_ui(qm, q, qexp - 1, MPFR_RNDN);
      mpfr_mul(g, qm, q, MPFR_RNDN);
      mpfr_mul_ui(dg, qm, un, MPFR_RNDN);
      mpfr_neg(dg, dg, MPFR_RNDN);
    } else {
      // G = C x p^(j-1) q^(n-j)
      // G' = C [p^(j-1) q^(n-j) + x (j-1) p^(j-2) q^(n-j) - x (n-j) p^(j-1) q^(n-j-1)]
      if (j >= 2) {
        mpfr_pow_ui(pm, p, static_cast<unsigned long>(j - 2), MPFR_RNDN);
        mpfr_mul(pw, pm, p, MPFR_RNDN);
      } else {
        mpfr_set_ui(pm, 0, MPFR_RNDN);
        mpfr_set_ui(pw, 1, MPFR_RNDN);
      }
      mpfr_pow_ui(qm, q, qexp - 1, MPFR_RNDN);  // 0^0 = 1 covers the knot term
      mpfr_mul(qw, qm, q, MPFR_RNDN);

      mpfr_mul(g, pw, qw, MPFR_RNDN);
      mpfr_set(dg, g, MPFR_RNDN);
      mpfr_mul(g, g, x, MPFR_RNDN);
      mpfr_mul_z(g, g, binom.get_mpz_t(), MPFR_RNDN);

      mpfr_mul(t, pm, qw, MPFR_RNDN);
      mpfr_mul(t, t, x, MPFR_RNDN);
      mpfr_mul_ui(t, t, static_cast<unsigned long>(j - 1), MPFR_RNDN);
      mpfr_add(dg, dg, t, MPFR_RNDN);
      mpfr_mul(t, pw, qm, MPFR_RNDN);
      mpfr_mul(t, t, x, MPFR_RNDN);
      mpfr_mul_ui(t, t, qexp, MPFR_RNDN);
      mpfr_sub(dg, dg, t, MPFR_RNDN);
      mpfr_mul_z(dg, dg, binom.get_mpz_t(), MPFR_RNDN);
    }
    mpfr_add(sum, sum, g, MPFR_RNDN);
    mpfr_add(dsum, dsum, dg, MPFR_RNDN);
  }

  OracleValues out{BigFloat(bits), BigFloat(bits), BigFloat(bits)};
  mpfr_set(out.sf.get(), sum, MPFR_RNDN);
  mpfr_ui_sub(t, 1, sum, MPFR_RNDN);
  mpfr_set(out.cdf.get(), t, MPFR_RNDN);
  mpfr_neg(out.pdf.get(), dsum, MPFR_RNDN);
  for (mpfr_ptr v : {nx, rest, p, q, pm, qm, pw, qw, g, dg, t, sum, dsum}) {
    mpfr_clear(v);
  }
  return out;
}

}  // namespace

OracleValues oracle_eval(std::int64_t n, double x, int bits) {
  check_args(n, bits);
  if (std::isnan(x)) {
    throw std::invalid_argument("oracle: x is NaN");
  }
  if (x < 0.0) return constant_values(1.0, 0.0, 0.0, bits);
  if (x > 1.0) return constant_values(0.0, 1.0, 0.0, bits);
  if (n == 1) {
    OracleValues v = constant_values(0.0, x, 1.0, bits);
    mpfr_ui_sub(v.sf.get(), 1, v.cdf.get(), MPFR_RNDN);
    return v;
  }
  if (x == 0.0) return constant_values(1.0, 0.0, 1.0, bits);
  if (x == 1.0) return constant_values(0.0, 1.0, 0.0, bits);
  if (2.0 * static_cast<double>(n) * x * x > 745.0) return constant_values(0.0, 1.0, 0.0, bits);
  const BigFloat xb(x, 53);
  return sum_direct(n, xb.get(), bits);
}

OracleValues oracle_eval(std::int64_t n, const BigFloat& x, int bits) {
  check_args(n, bits);
  if (x.precision() > bits) {
    throw std::invalid_argument("oracle: x carries more bits than the working precision");
  }
  if (mpfr_nan_p(x.get())) {
    throw std::invalid_argument("oracle: x is NaN");
  }
  if (mpfr_sgn(x.get()) <= 0 || mpfr_cmp_ui(x.get(), 1) >= 0 || n == 1) {
    const double xd = x.to_double();
    if (n == 1 && xd > 0.0 && xd < 1.0) {
      OracleValues v{BigFloat(bits), BigFloat(bits), BigFloat(bits)};
      mpfr_set(v.cdf.get(), x.get(), MPFR_RNDN);
      mpfr_ui_sub(v.sf.get(), 1, x.get(), MPFR_RNDN);
      mpfr_set_ui(v.pdf.get(), 1, MPFR_RNDN);
      return v;
    }
    return oracle_eval(n, xd, bits);
  }
  return sum_direct(n, x.get(), bits);
}

BigFloat oracle_sf(std::int64_t n, double x, int bits) { return oracle_eval(n, x, bits).sf; }

BigFloat oracle_pdf(std::int64_t n, double x, int bits) { return oracle_eval(n, x, bits).pdf; }

BigFloat oracle_isf(std::int64_t n, double p_sf, int bits) {
  check_args(n, bits);
  if (!(p_sf > 0.0 && p_sf < 1.0)) {
    throw std::invalid_argument("oracle_isf: p_sf must lie in (0, 1)");
  }
  const int xp = std::min(bits, 200);
  BigFloat lo(0.0, xp);
  BigFloat hi(1.0, xp);
  BigFloat mid(xp);
  BigFloat width(xp);
  BigFloat target(p_sf, bits);
  for (int it = 0; it < 400; ++it) {
    mpfr_sub(width.get(), hi.get(), lo.get(), MPFR_RNDN);
    mpfr_mul_2si(width.get(), width.get(), 170, MPFR_RNDN);
    if (mpfr_cmp(width.get(), hi.get()) <= 0) {
      break;
    }
    mpfr_add(mid.get(), lo.get(), hi.get(), MPFR_RNDN);
    mpfr_div_2ui(mid.get(), mid.get(), 1, MPFR_RNDN);
    const BigFloat sf = oracle_eval(n, mid, bits).sf;
    // S_n is decreasing: sf above target means the root is to the right.
    if (mpfr_cmp(sf.get(), target.get()) > 0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  BigFloat out(bits);
  mpfr_add(out.get(), lo.get(), hi.get(), MPFR_RNDN);
  mpfr_div_2ui(out.get(), out.get(), 1, MPFR_RNDN);
  return out;
}

ExactSums exact_sums(std::int64_t n, double x) {
  if (n < 2 || !(x > 0.0 && x < 1.0)) {
    throw std::invalid_argument("exact_sums: need n >= 2 and 0 < x < 1");
  }
  int e = 0;
  const double f = std::frexp(x, &e);
  // x = m / 2^s with m odd.
  mpz_class m;
  mpz_set_d(m.get_mpz_t(), std::ldexp(f, 53));
  long s = 53 - e;
  const auto tz = static_cast<long>(mpz_scan1(m.get_mpz_t(), 0));
  m >>= tz;
  s -= tz;
  const auto un = static_cast<unsigned long>(n);
  mpz_class two_s;
  mpz_ui_pow_ui(two_s.get_mpz_t(), 2, static_cast<unsigned long>(s));

  ExactSums r;
  const mpz_class d = two_s * un;
  mpz_pow_ui(r.denom.get_mpz_t(), d.get_mpz_t(), un);
  r.lower = 0;
  r.upper = 0;
  mpz_class binom = 1;
  mpz_class pa, pb, term;
  const mpz_class nm = m * un;
  for (std::int64_t j = 0; j <= n; ++j) {
    if (j > 0) {
      binom *= static_cast<unsigned long>(n - j + 1);
      binom /= static_cast<unsigned long>(j);
    }
    const mpz_class a = nm + two_s * static_cast<unsigned long>(j);
    const mpz_class b = d - a;
    const auto qexp = static_cast<unsigned long>(n - j);
    if (j == 0) {
      mpz_pow_ui(term.get_mpz_t(), b.get_mpz_t(), un);
    } else {
      mpz_pow_ui(pa.get_mpz_t(), a.get_mpz_t(), static_cast<unsigned long>(j - 1));
      mpz_pow_ui(pb.get_mpz_t(), b.get_mpz_t(), qexp);
      term = nm * binom * pa * pb;
    }
    if (sgn(b) > 0) {
      r.lower += term;
    } else {
      r.upper += term;
    }
  }
  return r;
}

OracleRecord make_record(std::int64_t n, double x, int bits) {
  const OracleValues v = oracle_eval(n, x, bits);
  return {n, x, v.sf.to_string(40), v.cdf.to_string(40), v.pdf.to_string(40), bits};
}

std::string hex_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

namespace {

constexpr const char* kCsvHeader = "n,x_hex,sf_dec40,cdf_dec40,pdf_dec40,bits";

OracleRecord parse_row(const std::string& line, std::size_t lineno) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    f.push_back(cell);
  }
  if (f.size() != 6) {
    throw IoError("oracle cache line " + std::to_string(lineno) + ": expected 6 fields");
  }
  try {
    OracleRecord r;
    r.n = std::stoll(f[0]);
    char* end = nullptr;
    r.x = std::strtod(f[1].c_str(), &end);
    if (f[1].empty() || *end != '\0') throw std::invalid_argument(f[1]);
    r.sf = f[2];
    r.cdf = f[3];
    r.pdf = f[4];
    r.bits = std::stoi(f[5]);
    return r;
  } catch (const std::logic_error&) {
    throw IoError("oracle cache line " + std::to_string(lineno) + ": malformed number");
  }
}

}  // namespace

void write_oracle_csv(const std::string& path, const std::vector<OracleRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open for writing: " + path);
  }
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.n << ',' << hex_double(r.x) << ',' << r.sf << ',' << r.cdf << ',' << r.pdf << ','
        << r.bits << '\n';
  }
  out.flush();
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

std::vector<OracleRecord> read_oracle_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open: " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw IoError("oracle cache has no valid header: " + path);
  }
  std::vector<OracleRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    out.push_back(parse_row(line, lineno));
  }
  return out;
}

void OracleCache::load(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) {
    return;
  }
  probe.close();
  for (const auto& r : read_oracle_csv(path)) {
    records_[{r.n, hex_double(r.x), r.bits}] = r;
  }
}

void OracleCache::save(const std::string& path) const {
  std::vector<OracleRecord> rows;
  rows.reserve(records_.size());
  for (const auto& kv : records_) {
    rows.push_back(kv.second);
  }
  write_oracle_csv(path, rows);
}

const OracleRecord* OracleCache::find(std::int64_t n, double x, int bits) const {
  const auto it = records_.find({n, hex_double(x), bits});
  return it == records_.end() ? nullptr : &it->second;
}

void OracleCache::insert(const OracleRecord& rec) {
  records_[{rec.n, hex_double(rec.x), rec.bits}] = rec;
  dirty_ = true;
}

const OracleRecord& OracleCache::ensure(std::int64_t n, double x, int bits) {
  const Key key{n, hex_double(x), bits};
  auto it = records_.find(key);
  if (it == records_.end()) {
    it = records_.emplace(key, make_record(n, x, bits)).first;
    dirty_ = true;
  }
  return it->second;
}

std::size_t oracle_dump(const std::vector<std::int64_t>& n_list, const std::vector<double>& xs,
                        const std::string& path, int bits) {
  std::vector<OracleRecord> rows;
  rows.reserve(n_list.size() * xs.size());
  for (const auto n : n_list) {
    for (const double x : xs) {
      rows.push_back(make_record(n, x, bits));
    }
  }
  write_oracle_csv(path, rows);
  return rows.size();
}

}  // namespace ksone
