#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

#include "christoffel/errors.hpp"
#include "christoffel/random.hpp"
#include "christoffel/types.hpp"

namespace christoffel {

struct MeasureSpec {
  MeasureKind kind = MeasureKind::GaussianTruncated;
  /// Number of cells; 0 selects the per-kind default (1e5 for the Gaussian
  /// and uniform[-1,1], 2^17 for uniform[0,1], 1e4 for the graph measure).
  std::size_t grid_size = 0;
  /// Truncation radius of the Gaussian.
  double radius = 10.0;
  /// Parameter of the graph function f_eps for GraphOfF.
  double graph_epsilon = 1e-3;

  static MeasureSpec gaussian(std::size_t grid_size = 100000, double radius = 10.0);
  static MeasureSpec uniform01(std::size_t grid_size = std::size_t{1} << 17);
  static MeasureSpec uniform_sym(std::size_t grid_size = 100000);
  static MeasureSpec graph(double epsilon = 1e-3, std::size_t grid_size = 10000);
};

std::size_t default_grid_size(MeasureKind kind) noexcept;

/// Cell-wise discretization of a reference measure: N cells between N+1
/// edges, each carrying the exact mass of the measure on that cell.
/// Quadrature evaluates integrands at cell midpoints; sampling picks a cell
/// and then a uniform point inside it.
class DiscretizedMeasure {
 public:
  MeasureKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return masses_.size(); }
  const std::vector<double>& edges() const noexcept { return edges_; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& cell_masses() const noexcept { return masses_; }
  double graph_epsilon() const noexcept { return graph_epsilon_; }

  /// Identity for 1-D measures, x -> (x, f_eps(x)) for the graph measure.
  Point lift(double x) const;
  Point node_point(std::size_t i) const { return lift(nodes_[i]); }

  /// Point at relative position v in [0, 1) of cell i.
  Point point_in_cell(std::size_t i, double v) const;

  /// Cell whose cumulative-mass interval contains u in [0, 1).
  std::size_t locate(double u) const;

  /// One draw from the measure itself.
  Point sample_reference(Rng& rng) const;

  friend DiscretizedMeasure build_measure(const MeasureSpec& spec);

 private:
  MeasureKind kind_ = MeasureKind::GaussianTruncated;
  std::vector<double> edges_;
  std::vector<double> nodes_;
  std::vector<double> masses_;
  std::vector<double> cumulative_;
  double graph_epsilon_ = 0.0;
};

/// Throws InvalidSpec for N < 2, a Gaussian radius whose tail mass exceeds
/// 1e-10, or a graph epsilon outside (0, 1/2).
DiscretizedMeasure build_measure(const MeasureSpec& spec);

/// Midpoint rule sum_i f(node_i) * mass_i. Throws NumericalError when f is
/// not finite at a node.
template <std::invocable<Point> F>
double quadrature(const DiscretizedMeasure& measure, F&& f) {
  double sum = 0.0;
  const auto& masses = measure.cell_masses();
  for (std::size_t i = 0; i < masses.size(); ++i) {
    const double value = f(measure.node_point(i));
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::NumericalError, "quadrature: non-finite integrand value");
    }
    sum += value * masses[i];
  }
  return sum;
}

/// Same as above for integrand values already tabulated at the nodes.
double quadrature(const DiscretizedMeasure& measure, std::span<const double> values);

/// Draws `count` points from the density proportional to
/// density_values[i] * mass_i over cells, uniform within the chosen cell.
/// Per draw the rng yields the cell uniform first, then the in-cell uniform.
/// Throws DegenerateDensity when all weights vanish.
std::vector<Point> sample(const DiscretizedMeasure& measure,
                          std::span<const double> density_values, std::size_t count,
                          Rng& rng);

}  // namespace christoffel
