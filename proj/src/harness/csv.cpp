#include "christoffel/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>

#include "christoffel/errors.hpp"

namespace christoffel {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double parse_double(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorCode::ConfigError, "not a number: '" + s + "'");
  }
  return v;
}

namespace {

std::uint64_t parse_count(const std::string& s) {
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) {
    throw Error(ErrorCode::ConfigError, "not a count: '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_quantile_csv(std::ostream& out, const QuantileTrace& trace) {
  out << "step,kn,level,gamma\n";
  for (std::size_t s = 0; s < trace.steps.size(); ++s) {
    for (std::size_t l = 0; l < trace.levels.size(); ++l) {
      out << trace.steps[s] << ',' << trace.kn[s] << ',' << format_double(trace.levels[l]) << ','
          << format_double(trace.quantiles[s][l]) << '\n';
    }
  }
}

QuantileTrace read_quantile_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "step,kn,level,gamma") {
    throw Error(ErrorCode::ConfigError, "quantile CSV: missing header step,kn,level,gamma");
  }
  QuantileTrace t;
  bool levels_done = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw Error(ErrorCode::ConfigError, "quantile CSV: expected 4 fields");
    const auto step = parse_count(f[0]);
    const auto kn = parse_count(f[1]);
    const double level = parse_double(f[2]);
    const double gamma = parse_double(f[3]);
    if (t.steps.empty() || t.steps.back() != step) {
      if (!t.steps.empty()) levels_done = true;
      t.steps.push_back(step);
      t.kn.push_back(kn);
      t.quantiles.emplace_back();
    }
    auto& row = t.quantiles.back();
    if (!levels_done) {
      t.levels.push_back(level);
    } else if (row.size() >= t.levels.size() || t.levels[row.size()] != level) {
      throw Error(ErrorCode::ConfigError, "quantile CSV: inconsistent levels");
    }
    row.push_back(gamma);
  }
  for (const auto& row : t.quantiles) {
    if (row.size() != t.levels.size()) {
      throw Error(ErrorCode::ConfigError, "quantile CSV: ragged rows");
    }
  }
  return t;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

}  // namespace christoffel
