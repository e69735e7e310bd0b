#include <gtest/gtest.h>
#include <mpfr.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "ksone/oracle.hpp"

using namespace ksone;

namespace {

// |a - b| / |b| with b parsed at high precision.
double rel_diff(const BigFloat& a, const std::string& b) {
  const BigFloat ref = BigFloat::from_string(b, 400);
  BigFloat d(400);
  mpfr_sub(d.get(), a.get(), ref.get(), MPFR_RNDN);
  mpfr_div(d.get(), d.get(), ref.get(), MPFR_RNDN);
  return std::fabs(d.to_double());
}

struct Frozen {
  std::int64_t n;
  double x;
  const char* sf;
  const char* pdf;
};

// 400-bit mpmath sums over the direct series, 25 significant digits.
const Frozen kFrozen[] = {
    {7, 0.2, "5.08426172523353330298277e-1", "3.095883004938418509950477"},
    {20, 0.05, "8.736524902312180782758785e-1", "3.813238467382168195108889"},
    {100, 0.1, "1.265906584562817030031399e-1", "5.160033726170716424543365"},
    {100, 0.3, "8.859934946331459254806977e-9", "1.112841189789901009840741e-6"},
    {1000, 0.05, "6.506037390545165805154368e-3", "1.306713439850271698560409"},
    {2000, 0.3, "1.975889880272874156850035e-160", "4.947585825447444430385903e-157"},
    {3, 0.9, "9.999999999999993338661852e-4", "2.99999999999999866773237e-2"},
    {50, 0.62, "2.323640010371207812250254e-19", "3.614124689034565055923927e-17"},
    {5, 0.6, "1.504000000000000479616347e-2", "2.160000000000000532907052e-1"},
    {1013, 0.45, "4.996413054369097743364595e-188", "1.009628277196271399177837e-184"},
};

class TempFile {
 public:
  explicit TempFile(const std::string& name)
      : path_((std::filesystem::temp_directory_path() / name).string()) {
    std::filesystem::remove(path_);
  }
  ~TempFile() { std::filesystem::remove(path_); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace

TEST(BigFloat, Basics) {
  const BigFloat a(0.1, 200);
  EXPECT_EQ(a.precision(), 200);
  EXPECT_EQ(a.to_double(), 0.1);
  BigFloat b = a;
  EXPECT_EQ(b.to_double(), 0.1);
  BigFloat c(160);
  c = std::move(b);
  EXPECT_EQ(c.to_double(), 0.1);
  const BigFloat t = BigFloat::from_string("0.1", 300);
  EXPECT_NE(mpfr_cmp(t.get(), a.get()), 0);
  EXPECT_EQ(t.to_double(), 0.1);
  EXPECT_EQ(BigFloat(0.75, 200).to_string(5).substr(0, 4), "7.50");
}

TEST(ExactSums, SmallCase) {
  // n = 2, x = 1/4: S = 9/16 + 1/8 = 44/64.
  const ExactSums e = exact_sums(2, 0.25);
  EXPECT_EQ(e.denom, 64);
  EXPECT_EQ(e.lower, 44);
  EXPECT_EQ(e.upper, 20);
  EXPECT_THROW(exact_sums(1, 0.5), std::invalid_argument);
  EXPECT_THROW(exact_sums(3, 0.0), std::invalid_argument);
  EXPECT_THROW(exact_sums(3, 1.0), std::invalid_argument);
}

TEST(Oracle, MatchesFrozenValues) {
  for (const auto& f : kFrozen) {
    const OracleValues v = oracle_eval(f.n, f.x);
    EXPECT_LE(rel_diff(v.sf, f.sf), 1e-23) << "n=" << f.n << " x=" << f.x;
    EXPECT_LE(rel_diff(v.pdf, f.pdf), 1e-23) << "n=" << f.n << " x=" << f.x;
    BigFloat sum(400);
    mpfr_add(sum.get(), v.sf.get(), v.cdf.get(), MPFR_RNDN);
    mpfr_sub_ui(sum.get(), sum.get(), 1, MPFR_RNDN);
    EXPECT_LE(std::fabs(sum.to_double()), 0x1p-290);
    EXPECT_EQ(oracle_sf(f.n, f.x).to_double(), v.sf.to_double());
    EXPECT_EQ(oracle_pdf(f.n, f.x).to_double(), v.pdf.to_double());
  }
}

TEST(Oracle, EdgesAndErrors) {
  EXPECT_EQ(oracle_sf(5, 0.0).to_double(), 1.0);
  EXPECT_EQ(oracle_sf(5, 1.0).to_double(), 0.0);
  EXPECT_EQ(oracle_sf(5, -0.5).to_double(), 1.0);
  EXPECT_EQ(oracle_sf(5, 2.0).to_double(), 0.0);
  EXPECT_EQ(oracle_sf(1, 0.3).to_double(), 0.7);
  EXPECT_THROW(oracle_eval(0, 0.5), std::invalid_argument);
  EXPECT_THROW(oracle_eval(5, NAN), std::invalid_argument);
  EXPECT_THROW(oracle_eval(5, 0.5, kMinOracleBits - 1), std::invalid_argument);
}

TEST(Oracle, DensityIsTheDerivative) {
  const int bits = 300;
  for (const std::int64_t n : {2, 5, 17, 100}) {
    for (const double x0 : {0.013, 0.21, 0.333, 0.58, 0.91}) {
      // Stay away from the knots j/n where the density jumps.
      if (std::fabs(n * x0 - std::round(n * x0)) < 1e-3) continue;
      BigFloat h(bits), lo(bits), hi(bits);
      mpfr_set_d(h.get(), 1e-30, MPFR_RNDN);
      mpfr_set_d(lo.get(), x0, MPFR_RNDN);
      mpfr_sub(lo.get(), lo.get(), h.get(), MPFR_RNDN);
      mpfr_set_d(hi.get(), x0, MPFR_RNDN);
      mpfr_add(hi.get(), hi.get(), h.get(), MPFR_RNDN);
      const OracleValues a = oracle_eval(n, lo, bits);
      const OracleValues b = oracle_eval(n, hi, bits);
      BigFloat d(bits);
      mpfr_sub(d.get(), b.cdf.get(), a.cdf.get(), MPFR_RNDN);
      mpfr_sub(h.get(), hi.get(), lo.get(), MPFR_RNDN);
      mpfr_div(d.get(), d.get(), h.get(), MPFR_RNDN);
      const double pdf = oracle_pdf(n, x0, bits).to_double();
      EXPECT_NEAR(d.to_double(), pdf, 1e-20 * pdf) << "n=" << n << " x=" << x0;
    }
  }
}

TEST(Oracle, AgreesWithExactSums) {
  for (const std::int64_t n : {3, 12, 40}) {
    for (const double x : {0.125, 0.3, 0.7109375}) {
      const ExactSums e = exact_sums(n, x);
      BigFloat q(400), d(400);
      mpfr_set_z(q.get(), e.lower.get_mpz_t(), MPFR_RNDN);
      mpfr_set_z(d.get(), e.denom.get_mpz_t(), MPFR_RNDN);
      mpfr_div(q.get(), q.get(), d.get(), MPFR_RNDN);
      EXPECT_LE(rel_diff(oracle_sf(n, x), q.to_string(110)), 1e-80) << "n=" << n << " x=" << x;
    }
  }
}

TEST(Oracle, InverseMatchesFrozenRoots) {
  EXPECT_LE(rel_diff(oracle_isf(20, 0.3, 200), "0.165741541104653799860072"), 1e-23);
  EXPECT_LE(rel_diff(oracle_isf(10, 1.055e-6, 200), "0.7536719667080769850034573"), 1e-23);
}

TEST(OracleCache, SaveLoadRoundTrip) {
  TempFile f("ksone_cache_roundtrip.csv");
  OracleCache c;
  c.load(f.path());
  EXPECT_EQ(c.size(), 0u);
  const OracleRecord& r = c.ensure(10, 0.1, 200);
  EXPECT_TRUE(c.dirty());
  EXPECT_EQ(r.n, 10);
  c.insert(make_record(3, 0.5, 160));
  c.save(f.path());

  OracleCache d;
  d.load(f.path());
  EXPECT_EQ(d.size(), 2u);
  EXPECT_FALSE(d.dirty());
  const OracleRecord* p = d.find(10, 0.1, 200);
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(p->x, 0.1);
  EXPECT_EQ(p->sf, r.sf);
  EXPECT_EQ(p->pdf, r.pdf);
  EXPECT_EQ(d.find(10, 0.1, 300), nullptr);
  EXPECT_EQ(d.find(10, std::nextafter(0.1, 1.0), 200), nullptr);
}

TEST(OracleCache, RejectsMalformedFiles) {
  TempFile f("ksone_cache_bad.csv");
  {
    std::ofstream out(f.path());
    out << "3,0x1p-1,0.125,0.875,0.75,300\n";
  }
  OracleCache c;
  EXPECT_THROW(c.load(f.path()), IoError);
  {
    std::ofstream out(f.path());
    out << "n,x_hex,sf_dec40,cdf_dec40,pdf_dec40,bits\n3,0x1p-1junk,0.1,0.9,0.7,300\n";
  }
  EXPECT_THROW(c.load(f.path()), IoError);
  {
    std::ofstream out(f.path());
    out << "n,x_hex,sf_dec40,cdf_dec40,pdf_dec40,bits\n3,0x1p-1,0.1\n";
  }
  EXPECT_THROW(read_oracle_csv(f.path()), IoError);
  EXPECT_THROW(read_oracle_csv(f.path() + ".missing"), IoError);
  EXPECT_THROW(write_oracle_csv("/nonexistent-dir/x.csv", {}), IoError);
}

TEST(OracleDump, WritesEveryPair) {
  TempFile f("ksone_dump.csv");
  EXPECT_EQ(oracle_dump({1, 4}, {0.0, 0.5, 1.0}, f.path(), 160), 6u);
  const auto rows = read_oracle_csv(f.path());
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].n, 1);
  EXPECT_EQ(rows[4].x, 0.5);
  EXPECT_EQ(BigFloat::from_string(rows[4].sf, 160).to_double(), 0.09375);
}
