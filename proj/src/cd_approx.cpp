#include "christoffel/cd_approx.hpp"

#include <algorithm>
#include <cmath>

#include "christoffel/errors.hpp"
#include "christoffel/special.hpp"

namespace christoffel {

std::vector<double> uniform_grid(std::size_t count, double lo, double hi) {
  if (count == 0) return {};
  if (count == 1) return {0.5 * (lo + hi)};
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  out.back() = hi;
  return out;
}

CDProblem CDProblem::standard(double epsilon, int degree, std::size_t nx, std::size_t ny) {
  CDProblem p;
  p.epsilon = epsilon;
  p.degree = degree;
  p.x_grid = uniform_grid(nx);
  p.y_grid = uniform_grid(ny);
  return p;
}

namespace {

void check_grid(const std::vector<double>& grid, const char* name) {
  if (grid.empty()) throw Error(ErrorCode::InvalidSpec, std::string(name) + " is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) {
      throw Error(ErrorCode::InvalidSpec, std::string(name) + " leaves [0, 1]");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw Error(ErrorCode::InvalidSpec, std::string(name) + " is not strictly increasing");
    }
  }
}

Vector powers(double v, int degree) {
  Vector out(degree);
  double p = 1.0;
  for (int j = 0; j < degree; ++j) {
    out(j) = p;
    p *= v;
  }
  return out;
}

// Q(x) with K(x, y) = p(y)^T Q(x) p(y), from P in the ordering j * d + k.
Matrix section_form(const Matrix& p, const Vector& px, int d) {
  Matrix q = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    for (int jj = 0; jj < d; ++jj) {
      const double w = px(j) * px(jj);
      q += w * p.block(j * d, jj * d, d, d);
    }
  }
  return 0.5 * (q + q.transpose());
}

Matrix base_pinv(const SpectralGramian& h, const FeatureDictionary& dict) {
  if (dict.family() != Family::BivariateMonomial || dict.transform()) {
    throw Error(ErrorCode::InvalidSpec, "Christoffel-Darboux needs a plain bivariate dictionary");
  }
  if (h.dimension() != dict.dimension()) {
    throw Error(ErrorCode::InvalidShape, "Gramian size differs from dictionary dimension");
  }
  return pinv_floored(h);
}

}  // namespace

void CDProblem::validate() const {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw Error(ErrorCode::InvalidSpec, "CD epsilon must lie in (0, 1/2)");
  }
  if (degree < 1) throw Error(ErrorCode::InvalidSpec, "CD degree must be >= 1");
  check_grid(x_grid, "x_grid");
  check_grid(y_grid, "y_grid");
}

double target_f(const CDProblem& problem, double x) { return graph_function(problem.epsilon, x); }

std::vector<double> cd_approximation(const SpectralGramian& h, const FeatureDictionary& dict,
                                     const CDProblem& problem) {
  problem.validate();
  const Matrix p = base_pinv(h, dict);
  const int d = dict.per_axis_degree();
  std::vector<Vector> py;
  py.reserve(problem.y_grid.size());
  for (double y : problem.y_grid) py.push_back(powers(y, d));

  std::vector<double> out;
  out.reserve(problem.x_grid.size());
  for (double x : problem.x_grid) {
    const Matrix q = section_form(p, powers(x, d), d);
    double best = std::numeric_limits<double>::infinity();
    double arg = problem.y_grid.front();
    for (std::size_t j = 0; j < py.size(); ++j) {
      const double value = py[j].dot(q * py[j]);
      if (value < best) {
        best = value;
        arg = problem.y_grid[j];
      }
    }
    out.push_back(arg);
  }
  return out;
}

Matrix christoffel_levels(const SpectralGramian& h, const FeatureDictionary& dict,
                          const std::vector<double>& xs, const std::vector<double>& ys) {
  const Matrix p = base_pinv(h, dict);
  const int d = dict.per_axis_degree();
  Matrix out(static_cast<Index>(xs.size()), static_cast<Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Matrix q = section_form(p, powers(xs[i], d), d);
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const Vector v = powers(ys[j], d);
      out(static_cast<Index>(i), static_cast<Index>(j)) = std::max(v.dot(q * v), 0.0);
    }
  }
  return out;
}

double max_cd_error(const CDProblem& problem, const std::vector<double>& f_d, double lo,
                    double hi) {
  if (f_d.size() != problem.x_grid.size()) {
    throw Error(ErrorCode::InvalidShape, "max_cd_error: f_d length differs from x_grid");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < f_d.size(); ++i) {
    const double x = problem.x_grid[i];
    if (x < lo || x > hi) continue;
    worst = std::max(worst, std::abs(f_d[i] - target_f(problem, x)));
  }
  return worst;
}

}  // namespace christoffel
