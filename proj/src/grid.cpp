#include "ksone/grid.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ksone {

namespace {

struct Decimal {
  std::int64_t mantissa = 0;
  int frac_digits = 0;
};

Decimal parse_decimal(const std::string& s) {
  Decimal d;
  std::size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
    neg = s[i] == '-';
    ++i;
  }
  bool seen_digit = false;
  bool in_frac = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.' && !in_frac) {
      in_frac = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw std::invalid_argument("not a decimal number: '" + s + "'");
    }
    if (d.mantissa > (std::numeric_limits<std::int64_t>::max() - 9) / 10) {
      throw std::invalid_argument("too many digits: '" + s + "'");
    }
    d.mantissa = d.mantissa * 10 + (c - '0');
    seen_digit = true;
    if (in_frac) ++d.frac_digits;
  }
  if (!seen_digit) {
    throw std::invalid_argument("not a decimal number: '" + s + "'");
  }
  if (neg) d.mantissa = -d.mantissa;
  return d;
}

std::int64_t rescale(const Decimal& d, int scale) {
  std::int64_t v = d.mantissa;
  for (int k = d.frac_digits; k < scale; ++k) {
    if (v > std::numeric_limits<std::int64_t>::max() / 10 ||
        v < std::numeric_limits<std::int64_t>::min() / 10) {
      throw std::invalid_argument("range values have too many digits");
    }
    v *= 10;
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    parts.push_back(item);
  }
  if (!s.empty() && s.back() == sep) {
    parts.emplace_back();
  }
  return parts;
}

std::int64_t parse_int(const std::string& s) {
  if (s.empty()) {
    throw std::invalid_argument("empty integer");
  }
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("not an integer: '" + s + "'");
  }
  if (pos != s.size()) {
    throw std::invalid_argument("not an integer: '" + s + "'");
  }
  return v;
}

}  // namespace

DecimalRange DecimalRange::parse(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) {
    throw std::invalid_argument("range must be start:step:stop, got '" + text + "'");
  }
  const Decimal a = parse_decimal(parts[0]);
  const Decimal s = parse_decimal(parts[1]);
  const Decimal b = parse_decimal(parts[2]);
  DecimalRange r;
  r.scale = std::max({a.frac_digits, s.frac_digits, b.frac_digits});
  r.start = rescale(a, r.scale);
  r.step = rescale(s, r.scale);
  r.stop = rescale(b, r.scale);
  if (r.step <= 0) {
    throw std::invalid_argument("range step must be positive");
  }
  if (r.start > r.stop) {
    throw std::invalid_argument("range start exceeds stop");
  }
  return r;
}

std::size_t DecimalRange::size() const {
  return static_cast<std::size_t>((stop - start) / step) + 1;
}

double DecimalRange::at(std::size_t i) const {
  const std::int64_t m = start + static_cast<std::int64_t>(i) * step;
  const std::string s = std::to_string(m) + "e-" + std::to_string(scale);
  return std::strtod(s.c_str(), nullptr);
}

std::vector<double> DecimalRange::values() const {
  std::vector<double> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    out.push_back(at(i));
  }
  return out;
}

std::vector<std::int64_t> parse_n_list(const std::string& text) {
  std::vector<std::int64_t> out;
  if (text.empty()) {
    return out;
  }
  for (const auto& item : split(text, ',')) {
    const auto parts = split(item, ':');
    std::int64_t lo = 0, step = 1, hi = 0;
    if (parts.size() == 1) {
      lo = hi = parse_int(parts[0]);
    } else if (parts.size() == 2) {
      lo = parse_int(parts[0]);
      hi = parse_int(parts[1]);
    } else if (parts.size() == 3) {
      lo = parse_int(parts[0]);
      step = parse_int(parts[1]);
      hi = parse_int(parts[2]);
    } else {
      throw std::invalid_argument("bad n-list item '" + item + "'");
    }
    if (step <= 0 || lo > hi) {
      throw std::invalid_argument("bad n-list item '" + item + "'");
    }
    for (std::int64_t n = lo; n <= hi; n += step) {
      if (n < 1) {
        throw std::invalid_argument("n must be >= 1");
      }
      out.push_back(n);
    }
  }
  return out;
}

void GridSpec::validate() const {
  if (n_list.empty()) {
    throw std::invalid_argument("n list is empty");
  }
  for (const auto n : n_list) {
    if (n < 1) {
      throw std::invalid_argument("n must be >= 1");
    }
  }
}

std::vector<std::int64_t> desk_n_ladder() {
  std::vector<std::int64_t> out;
  for (std::int64_t n = 1; n <= 20; ++n) out.push_back(n);
  for (std::int64_t n : {25, 50, 75, 100, 200, 500, 1000, 2000}) out.push_back(n);
  return out;
}

}  // namespace ksone
