#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "christoffel/linalg.hpp"
#include "christoffel/metrics.hpp"

namespace christoffel {

/// %.17g, with "inf", "-inf" and "nan" for the non-finite values.
std::string format_double(double value);

/// Inverse of format_double (strtod). Throws ConfigError on trailing junk.
double parse_double(std::string_view text);

/// Header step,kn,level,gamma and one row per (step, level).
void write_quantile_csv(std::ostream& out, const QuantileTrace& trace);

/// Reads what write_quantile_csv wrote. Throws ConfigError on malformed
/// input.
QuantileTrace read_quantile_csv(std::istream& in);

/// Comma-separated rows without a header.
void write_matrix_csv(std::ostream& out, const Matrix& m);

/// Splits one CSV line at commas (no quoting).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace christoffel
