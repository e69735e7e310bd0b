#include "ksone/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ksone/smirnovi.hpp"

namespace ksone {

const std::vector<double>& disagreement_tolerances() {
  static const std::vector<double> tols{1e-9, 1e-10, 1e-11, 1e-12, 1e-13, 1e-14, 1e-15};
  return tols;
}

void ErrorAccumulator::add(double rel) {
  if (over_.empty()) {
    over_.assign(disagreement_tolerances().size(), 0);
  }
  const double e = rel / kUnitRoundoff52;
  ++count_;
  sum_ += e;
  sum_abs_ += std::fabs(e);
  sum_sq_ += e * e;
  max_abs_ = std::max(max_abs_, std::fabs(e));
  const auto& tols = disagreement_tolerances();
  for (std::size_t i = 0; i < tols.size(); ++i) {
    if (std::fabs(rel) > tols[i]) ++over_[i];
  }
}

ErrorStats ErrorAccumulator::finish(const std::string& label) const {
  if (count_ == 0) {
    throw std::invalid_argument(label + ": no points left to compare");
  }
  ErrorStats s;
  s.label = label;
  s.count = count_;
  const auto c = static_cast<double>(count_);
  s.mean = sum_ / c;
  s.mean_abs = sum_abs_ / c;
  s.std_dev = std::sqrt(std::max(0.0, sum_sq_ / c - s.mean * s.mean));
  s.max_abs = max_abs_;
  for (const auto k : over_) {
    s.disagreement.push_back(static_cast<double>(k) / c);
  }
  return s;
}

double relative_error(double oracle_rounded, double computed) {
  if (oracle_rounded == 0.0) {
    return computed == 0.0 ? 0.0 : std::copysign(INFINITY, -computed);
  }
  return (oracle_rounded - computed) / oracle_rounded;
}

double relative_error(const BigFloat& oracle, double computed) {
  return relative_error(oracle.to_double(), computed);
}

CompareFunction parse_function(const std::string& s) {
  if (s == "sf") return CompareFunction::Sf;
  if (s == "pdf") return CompareFunction::Pdf;
  throw std::invalid_argument("function must be sf or pdf");
}

Restriction parse_restriction(const std::string& s) {
  if (s == "none") return Restriction::None;
  if (s == "sqrtn") return Restriction::SqrtN;
  throw std::invalid_argument("restrict must be none or sqrtn");
}

namespace {

double parse_oracle_decimal(const std::string& s) {
  // strtod rounds correctly; 40 digits determine the binary64 neighbour.
  return std::strtod(s.c_str(), nullptr);
}

}  // namespace

std::vector<ErrorStats> compare(const CompareOptions& opt, OracleCache& cache) {
  if (opt.n_list.empty()) {
    throw std::invalid_argument("n list is empty");
  }
  if (opt.modes.empty()) {
    throw std::invalid_argument("no precision modes selected");
  }
  const std::vector<double> xs = opt.x_range.values();
  std::vector<ErrorAccumulator> acc(opt.modes.size());
  for (const auto n : opt.n_list) {
    const double xmax = opt.restriction == Restriction::SqrtN
                            ? 3.0 / std::sqrt(static_cast<double>(n))
                            : INFINITY;
    for (const double x : xs) {
      if (x > xmax) continue;
      const OracleRecord* rec = cache.find(n, x, opt.bits);
      if (rec == nullptr) {
        if (!opt.compute_missing) {
          throw IoError("oracle cache has no entry for n=" + std::to_string(n) +
                        " x=" + hex_double(x));
        }
        rec = &cache.ensure(n, x, opt.bits);
      }
      const double truth =
          parse_oracle_decimal(opt.function == CompareFunction::Sf ? rec->sf : rec->pdf);
      if (!(truth > opt.floor)) continue;
      for (std::size_t m = 0; m < opt.modes.size(); ++m) {
        const SmirnovTriple t = smirnov(n, x, opt.modes[m]);
        const double got = opt.function == CompareFunction::Sf ? t.sf : t.pdf;
        acc[m].add(relative_error(truth, got));
      }
    }
  }
  std::vector<ErrorStats> out;
  for (std::size_t m = 0; m < opt.modes.size(); ++m) {
    out.push_back(acc[m].finish(std::string(to_string(opt.modes[m]))));
  }
  return out;
}

namespace {

struct IsfAccumulator {
  std::size_t solves = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
  int max_it = 0;
  std::size_t failures = 0;
  std::vector<std::size_t> over = std::vector<std::size_t>(disagreement_tolerances().size(), 0);
  double max_rt = 0.0;

  void add(const SolveReport& r, double rt) {
    ++solves;
    sum += r.iterations;
    sum_sq += static_cast<double>(r.iterations) * r.iterations;
    max_it = std::max(max_it, r.iterations);
    if (!r.converged) ++failures;
    max_rt = std::max(max_rt, rt);
    const auto& tols = disagreement_tolerances();
    for (std::size_t i = 0; i < tols.size(); ++i) {
      if (rt > tols[i]) ++over[i];
    }
  }

  void merge(const IsfAccumulator& o) {
    solves += o.solves;
    sum += o.sum;
    sum_sq += o.sum_sq;
    max_it = std::max(max_it, o.max_it);
    failures += o.failures;
    max_rt = std::max(max_rt, o.max_rt);
    for (std::size_t i = 0; i < over.size(); ++i) over[i] += o.over[i];
  }

  [[nodiscard]] IsfRow row(const std::string& label) const {
    IsfRow r;
    r.label = label;
    r.solves = solves;
    if (solves > 0) {
      const auto c = static_cast<double>(solves);
      r.mean_iterations = sum / c;
      r.std_iterations = std::sqrt(std::max(0.0, sum_sq / c - r.mean_iterations * r.mean_iterations));
      for (const auto k : over) r.disagreement.push_back(static_cast<double>(k) / c);
    } else {
      r.disagreement.assign(over.size(), 0.0);
    }
    r.max_iterations = max_it;
    r.failures = failures;
    r.max_round_trip = max_rt;
    return r;
  }
};

struct Band {
  std::int64_t lo;
  std::int64_t hi;
};

constexpr Band kBands[] = {{2, 10}, {20, 100}, {200, 10000}};

}  // namespace

IsfReport isf_stats(const std::vector<std::int64_t>& n_list, const DecimalRange& p_range,
                    PrecisionMode mode) {
  if (n_list.empty()) {
    throw std::invalid_argument("n list is empty");
  }
  std::vector<double> ps;
  for (const double p : p_range.values()) {
    if (p > 0.0 && p < 1.0) ps.push_back(p);
  }
  IsfReport rep;
  std::vector<IsfAccumulator> band_acc(std::size(kBands));
  for (const auto n : n_list) {
    if (n < 2) continue;
    IsfAccumulator acc;
    for (const double p : ps) {
      const ProbabilityPair pp = ProbabilityPair::from_sf(p);
      const SolveReport r = smirnovi(n, pp, mode);
      const double sf = smirnov(n, r.x, mode).sf;
      acc.add(r, std::fabs(sf - p) / p);
    }
    rep.per_n.push_back(acc.row("n=" + std::to_string(n)));
    for (std::size_t b = 0; b < std::size(kBands); ++b) {
      if (n >= kBands[b].lo && n <= kBands[b].hi) band_acc[b].merge(acc);
    }
  }
  for (std::size_t b = 0; b < std::size(kBands); ++b) {
    if (band_acc[b].solves == 0) continue;
    rep.bands.push_back(band_acc[b].row(std::to_string(kBands[b].lo) + ".." +
                                        std::to_string(kBands[b].hi)));
  }
  return rep;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t sweep(const GridSpec& grid, std::ostream& out) {
  grid.validate();
  const std::vector<double> xs = grid.x_range.values();
  out << "n,x,sf,cdf,pdf\n";
  std::size_t rows = 0;
  for (const auto n : grid.n_list) {
    for (const double x : xs) {
      const SmirnovTriple t = smirnov(n, x, grid.mode);
      out << n << ',' << format_double(x) << ',' << format_double(t.sf) << ','
          << format_double(t.cdf) << ',' << format_double(t.pdf) << '\n';
      ++rows;
    }
  }
  return rows;
}

}  // namespace ksone
