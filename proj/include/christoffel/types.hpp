#pragma once

#include <string_view>

namespace christoffel {

/// A point of the sample space. One-dimensional problems use `x` only; the
/// graph-supported measure of the Christoffel-Darboux example lifts x to
/// (x, f(x)).
struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class MeasureKind { GaussianTruncated, Uniform01, UniformSym, GraphOfF };

enum class Family { Hermite, Monomial, RandomMixed, Step, BivariateMonomial, Legendre };

std::string_view to_string(MeasureKind kind) noexcept;
std::string_view to_string(Family family) noexcept;

}  // namespace christoffel
