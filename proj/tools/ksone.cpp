// ksone: command-line front end for the one-sided KS distribution library.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ksone/grid.hpp"
#include "ksone/oracle.hpp"
#include "ksone/smirnov.hpp"
#include "ksone/smirnovi.hpp"
#include "ksone/stats.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace ksone;

constexpr int kExitArgs = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitIo = 4;

double parse_real(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::invalid_argument(std::string(what) + " is not a number: '" + s + "'");
  }
  return v;
}

std::vector<PrecisionMode> parse_modes(const std::string& s) {
  if (s == "all") {
    return {PrecisionMode::Fast64, PrecisionMode::Hybrid, PrecisionMode::Full};
  }
  std::vector<PrecisionMode> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_mode(item));
  }
  return out;
}

// Writes to --out when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) {
        throw IoError("cannot open for writing: " + path);
      }
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void close() {
    if (file_) {
      file_->flush();
      if (!*file_) throw IoError("write failed");
    }
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

json stats_json(const ErrorStats& s) {
  json j;
  j["mode"] = s.label;
  j["count"] = s.count;
  j["mean_eps"] = s.mean;
  j["mean_abs_eps"] = s.mean_abs;
  j["std_eps"] = s.std_dev;
  j["max_abs_eps"] = s.max_abs;
  json d = json::object();
  const auto& tols = disagreement_tolerances();
  for (std::size_t i = 0; i < tols.size(); ++i) {
    char key[16];
    std::snprintf(key, sizeof key, "%.0e", tols[i]);
    d[key] = s.disagreement[i];
  }
  j["disagreement"] = d;
  return j;
}

json isf_row_json(const IsfRow& r) {
  json j;
  j["label"] = r.label;
  j["solves"] = r.solves;
  j["mean_iterations"] = r.mean_iterations;
  j["std_iterations"] = r.std_iterations;
  j["max_iterations"] = r.max_iterations;
  j["failures"] = r.failures;
  j["max_round_trip"] = r.max_round_trip;
  json d = json::object();
  const auto& tols = disagreement_tolerances();
  for (std::size_t i = 0; i < tols.size(); ++i) {
    char key[16];
    std::snprintf(key, sizeof key, "%.0e", tols[i]);
    d[key] = r.disagreement[i];
  }
  j["disagreement"] = d;
  return j;
}

std::string tol_header() {
  std::string h;
  for (const double t : disagreement_tolerances()) {
    char key[24];
    std::snprintf(key, sizeof key, ",gt_%.0e", t);
    h += key;
  }
  return h;
}

std::string rates_csv(const std::vector<double>& rates) {
  std::string s;
  for (const double r : rates) s += "," + format_double(r);
  return s;
}

struct Options {
  std::string n_text;
  std::int64_t n = 0;
  std::string x_text;
  std::string psf_text;
  std::string pcdf_text;
  std::string mode_text = "hybrid";
  std::string grid_text;
  std::string out_path;
  std::string cache_path;
  std::string function_text = "sf";
  std::string restrict_text = "none";
  std::string format = "text";
  int bits = kDefaultOracleBits;
  bool compute = false;
};

int cmd_eval(const Options& o) {
  const double x = parse_real(o.x_text, "--x");
  const PrecisionMode mode = parse_mode(o.mode_text);
  const SmirnovTriple t = smirnov(o.n, x, mode);
  if (o.format == "json") {
    json j;
    j["n"] = o.n;
    j["x"] = x;
    j["mode"] = std::string(to_string(mode));
    j["sf"] = t.sf;
    j["cdf"] = t.cdf;
    j["pdf"] = t.pdf;
    std::cout << j.dump() << '\n';
  } else if (o.format == "csv") {
    std::cout << "n,x,sf,cdf,pdf\n"
              << o.n << ',' << format_double(x) << ',' << format_double(t.sf) << ','
              << format_double(t.cdf) << ',' << format_double(t.pdf) << '\n';
  } else {
    std::cout << "sf=" << format_double(t.sf) << " cdf=" << format_double(t.cdf)
              << " pdf=" << format_double(t.pdf) << '\n';
  }
  return 0;
}

int cmd_invert(const Options& o) {
  if (o.psf_text.empty() == o.pcdf_text.empty()) {
    throw std::invalid_argument("give exactly one of --psf and --pcdf");
  }
  const ProbabilityPair p = o.psf_text.empty()
                                ? ProbabilityPair::from_cdf(parse_real(o.pcdf_text, "--pcdf"))
                                : ProbabilityPair::from_sf(parse_real(o.psf_text, "--psf"));
  const PrecisionMode mode = parse_mode(o.mode_text);
  const SolveReport r = smirnovi(o.n, p, mode);
  if (o.format == "json") {
    json j;
    j["n"] = o.n;
    j["p_sf"] = p.p_sf;
    j["p_cdf"] = p.p_cdf;
    j["mode"] = std::string(to_string(mode));
    j["x"] = r.x;
    j["iterations"] = r.iterations;
    j["bisection_steps"] = r.bisection_steps;
    j["converged"] = r.converged;
    std::cout << j.dump() << '\n';
  } else if (o.format == "csv") {
    std::cout << "n,p_sf,x,iterations,bisection_steps,converged\n"
              << o.n << ',' << format_double(p.p_sf) << ',' << format_double(r.x) << ','
              << r.iterations << ',' << r.bisection_steps << ',' << (r.converged ? 1 : 0)
              << '\n';
  } else {
    std::cout << "x=" << format_double(r.x) << " iterations=" << r.iterations
              << " bisections=" << r.bisection_steps
              << " converged=" << (r.converged ? "true" : "false") << '\n';
  }
  if (!r.converged) {
    std::cerr << "error: no convergence within " << kMaxNewtonIterations << " iterations\n";
    return kExitNoConvergence;
  }
  return 0;
}

int cmd_sweep(const Options& o) {
  GridSpec g;
  g.n_list = parse_n_list(o.n_text);
  g.x_range = DecimalRange::parse(o.grid_text);
  g.mode = parse_mode(o.mode_text);
  g.validate();
  Sink sink(o.out_path);
  const std::size_t rows = sweep(g, sink.stream());
  sink.close();
  if (!o.out_path.empty()) {
    std::cerr << rows << " rows written to " << o.out_path << '\n';
  }
  return 0;
}

int cmd_compare(const Options& o) {
  CompareOptions c;
  c.n_list = parse_n_list(o.n_text);
  c.x_range = DecimalRange::parse(o.grid_text);
  c.modes = parse_modes(o.mode_text);
  c.function = parse_function(o.function_text);
  c.restriction = parse_restriction(o.restrict_text);
  c.bits = o.bits;
  c.compute_missing = o.compute;
  if (o.cache_path.empty() && !o.compute) {
    throw std::invalid_argument("--oracle-cache is required unless --compute is given");
  }
  OracleCache cache;
  if (!o.cache_path.empty()) {
    cache.load(o.cache_path);
  }
  const std::vector<ErrorStats> rows = compare(c, cache);
  if (!o.cache_path.empty() && cache.dirty()) {
    cache.save(o.cache_path);
  }
  if (o.format == "json") {
    json j = json::array();
    for (const auto& s : rows) j.push_back(stats_json(s));
    std::cout << j.dump(2) << '\n';
  } else if (o.format == "csv") {
    std::cout << "mode,count,mean_eps,mean_abs_eps,std_eps,max_abs_eps" << tol_header() << '\n';
    for (const auto& s : rows) {
      std::cout << s.label << ',' << s.count << ',' << format_double(s.mean) << ','
                << format_double(s.mean_abs) << ',' << format_double(s.std_dev) << ','
                << format_double(s.max_abs) << rates_csv(s.disagreement) << '\n';
    }
  } else {
    std::printf("%-8s %8s %12s %12s %12s\n", "mode", "count", "mean(eps)", "std(eps)",
                "max|e|(eps)");
    for (const auto& s : rows) {
      std::printf("%-8s %8zu %12.3e %12.3e %12.3e\n", s.label.c_str(), s.count, s.mean,
                  s.std_dev, s.max_abs);
    }
  }
  return 0;
}

int cmd_isf_stats(const Options& o) {
  const auto n_list = parse_n_list(o.n_text);
  const DecimalRange p = DecimalRange::parse(o.grid_text.empty() ? "0:0.01:1" : o.grid_text);
  const PrecisionMode mode = parse_mode(o.mode_text);
  const IsfReport rep = isf_stats(n_list, p, mode);
  if (o.format == "json") {
    json j;
    j["mode"] = std::string(to_string(mode));
    j["per_n"] = json::array();
    for (const auto& r : rep.per_n) j["per_n"].push_back(isf_row_json(r));
    j["bands"] = json::array();
    for (const auto& r : rep.bands) j["bands"].push_back(isf_row_json(r));
    std::cout << j.dump(2) << '\n';
  } else if (o.format == "csv") {
    std::cout << "label,solves,mean_iterations,std_iterations,max_iterations,failures,"
                 "max_round_trip"
              << tol_header() << '\n';
    auto emit = [](const IsfRow& r) {
      std::cout << r.label << ',' << r.solves << ',' << format_double(r.mean_iterations) << ','
                << format_double(r.std_iterations) << ',' << r.max_iterations << ','
                << r.failures << ',' << format_double(r.max_round_trip)
                << rates_csv(r.disagreement) << '\n';
    };
    for (const auto& r : rep.per_n) emit(r);
    for (const auto& r : rep.bands) emit(r);
  } else {
    std::printf("%-14s %6s %9s %8s %5s %8s %11s\n", "n", "solves", "mean_it", "std_it", "max",
                "failures", "rt>1e-14");
    auto emit = [](const IsfRow& r) {
      std::printf("%-14s %6zu %9.3f %8.3f %5d %8zu %10.2f%%\n", r.label.c_str(), r.solves,
                  r.mean_iterations, r.std_iterations, r.max_iterations, r.failures,
                  100.0 * r.disagreement[5]);
    };
    for (const auto& r : rep.per_n) emit(r);
    for (const auto& r : rep.bands) emit(r);
  }
  return 0;
}

int cmd_oracle_dump(const Options& o) {
  if (o.out_path.empty()) {
    throw std::invalid_argument("--out is required");
  }
  const auto n_list = parse_n_list(o.n_text);
  const auto xs = DecimalRange::parse(o.grid_text).values();
  const std::size_t count = oracle_dump(n_list, xs, o.out_path, o.bits);
  std::cout << count << " records written to " << o.out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-sided Kolmogorov-Smirnov distribution: evaluation, inversion, validation"};
  app.require_subcommand(1);
  Options o;
  const auto modes_check = CLI::IsMember({"fast64", "hybrid", "full"}, CLI::ignore_case);
  const auto formats = CLI::IsMember({"json", "csv", "text"});

  auto* eval = app.add_subcommand("eval", "Evaluate sf, cdf and pdf at one point");
  eval->add_option("--n", o.n, "Sample size")->required()->check(CLI::PositiveNumber);
  eval->add_option("--x", o.x_text, "Statistic value")->required();
  eval->add_option("--mode", o.mode_text, "fast64 | hybrid | full")->check(modes_check);
  eval->add_option("--format", o.format, "json | csv | text")->check(formats);

  auto* invert = app.add_subcommand("invert", "Solve S_n(x) = p");
  invert->add_option("--n", o.n, "Sample size")->required()->check(CLI::PositiveNumber);
  invert->add_option("--psf", o.psf_text, "Upper-tail probability");
  invert->add_option("--pcdf", o.pcdf_text, "Lower-tail probability");
  invert->add_option("--mode", o.mode_text, "fast64 | hybrid | full")->check(modes_check);
  invert->add_option("--format", o.format, "json | csv | text")->check(formats);

  auto* sweep_cmd = app.add_subcommand("sweep", "Tabulate sf, cdf, pdf over a grid as CSV");
  sweep_cmd->add_option("--n", o.n_text, "n list, e.g. 1:20,50,100")->required();
  sweep_cmd->add_option("--grid", o.grid_text, "x range start:step:stop")->required();
  sweep_cmd->add_option("--mode", o.mode_text, "fast64 | hybrid | full")->check(modes_check);
  sweep_cmd->add_option("--out", o.out_path, "Output CSV (default stdout)");

  auto* cmp = app.add_subcommand("compare", "Relative error statistics against the oracle");
  cmp->add_option("--n", o.n_text, "n list")->required();
  cmp->add_option("--grid", o.grid_text, "x range start:step:stop")->required();
  cmp->add_option("--mode", o.mode_text, "Comma-separated modes or 'all'");
  cmp->add_option("--function", o.function_text, "sf | pdf")
      ->check(CLI::IsMember({"sf", "pdf"}));
  cmp->add_option("--restrict", o.restrict_text, "none | sqrtn (x <= 3/sqrt(n))")
      ->check(CLI::IsMember({"none", "sqrtn"}));
  cmp->add_option("--oracle-cache", o.cache_path, "Oracle CSV cache");
  cmp->add_option("--bits", o.bits, "Oracle precision")->check(CLI::Range(160, 100000));
  cmp->add_flag("--compute", o.compute, "Compute and cache missing oracle values");
  cmp->add_option("--format", o.format, "json | csv | text")->check(formats);

  auto* isf = app.add_subcommand("isf-stats", "Iteration counts and round-trip disagreement");
  isf->add_option("--n", o.n_text, "n list")->required();
  isf->add_option("--grid", o.grid_text, "p range start:step:stop (default 0:0.01:1)");
  isf->add_option("--mode", o.mode_text, "fast64 | hybrid | full")->check(modes_check);
  isf->add_option("--format", o.format, "json | csv | text")->check(formats);

  auto* dump = app.add_subcommand("oracle-dump", "Write high-precision reference values as CSV");
  dump->add_option("--n", o.n_text, "n list")->required();
  dump->add_option("--grid", o.grid_text, "x range start:step:stop")->required();
  dump->add_option("--out", o.out_path, "Output CSV")->required();
  dump->add_option("--bits", o.bits, "Oracle precision")->check(CLI::Range(160, 100000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitArgs;
  }

  try {
    if (*eval) return cmd_eval(o);
    if (*invert) return cmd_invert(o);
    if (*sweep_cmd) return cmd_sweep(o);
    if (*cmp) return cmd_compare(o);
    if (*isf) return cmd_isf_stats(o);
    if (*dump) return cmd_oracle_dump(o);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitArgs;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitArgs;
}
