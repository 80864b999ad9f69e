#pragma once

#include <vector>

#include "christoffel/dictionaries.hpp"
#include "christoffel/linalg.hpp"

namespace christoffel {

/// Christoffel-Darboux recovery of f_eps from the moment matrix of the
/// measure delta_{f(x)}(y) dx on [0,1]^2.
struct CDProblem {
  double epsilon = 1e-3;
  /// Per-axis degree d of the bivariate monomials x^j y^k, j, k < d.
  int degree = 8;
  std::vector<double> x_grid;
  std::vector<double> y_grid;

  /// Uniform grids with nx and ny points covering [0, 1] including both ends.
  static CDProblem standard(double epsilon = 1e-3, int degree = 8, std::size_t nx = 1001,
                            std::size_t ny = 1000);

  /// Throws InvalidSpec for epsilon outside (0, 1/2), degree < 1, or grids
  /// that are empty, not strictly increasing or leave [0, 1].
  void validate() const;
};

std::vector<double> uniform_grid(std::size_t count, double lo = 0.0, double hi = 1.0);

double target_f(const CDProblem& problem, double x);

/// f_d(x) = argmin over y_grid of K_h(x, y) for every x in x_grid; ties go to
/// the smallest y. `dict` must be the BivariateMonomial dictionary of h.
std::vector<double> cd_approximation(const SpectralGramian& h, const FeatureDictionary& dict,
                                     const CDProblem& problem);

/// K_h(x_i, y_j) as a dense matrix with rows indexed by xs and columns by ys.
Matrix christoffel_levels(const SpectralGramian& h, const FeatureDictionary& dict,
                          const std::vector<double>& xs, const std::vector<double>& ys);

/// max |f_d(x) - f(x)| over the grid points with lo <= x <= hi.
double max_cd_error(const CDProblem& problem, const std::vector<double>& f_d, double lo = 0.1,
                    double hi = 0.9);

}  // namespace christoffel
