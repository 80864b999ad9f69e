#include "christoffel/measures.hpp"

#include <algorithm>
#include <numeric>

#include "christoffel/special.hpp"

namespace christoffel {

MeasureSpec MeasureSpec::gaussian(std::size_t grid_size, double radius) {
  MeasureSpec s;
  s.kind = MeasureKind::GaussianTruncated;
  s.grid_size = grid_size;
  s.radius = radius;
  return s;
}

MeasureSpec MeasureSpec::uniform01(std::size_t grid_size) {
  MeasureSpec s;
  s.kind = MeasureKind::Uniform01;
  s.grid_size = grid_size;
  return s;
}

MeasureSpec MeasureSpec::uniform_sym(std::size_t grid_size) {
  MeasureSpec s;
  s.kind = MeasureKind::UniformSym;
  s.grid_size = grid_size;
  return s;
}

MeasureSpec MeasureSpec::graph(double epsilon, std::size_t grid_size) {
  MeasureSpec s;
  s.kind = MeasureKind::GraphOfF;
  s.grid_size = grid_size;
  s.graph_epsilon = epsilon;
  return s;
}

std::size_t default_grid_size(MeasureKind kind) noexcept {
  switch (kind) {
    case MeasureKind::GaussianTruncated: return 100000;
    case MeasureKind::Uniform01: return std::size_t{1} << 17;
    case MeasureKind::UniformSym: return 100000;
    case MeasureKind::GraphOfF: return 10000;
  }
  return 100000;
}

DiscretizedMeasure build_measure(const MeasureSpec& spec) {
  const std::size_t n = spec.grid_size == 0 ? default_grid_size(spec.kind) : spec.grid_size;
  if (n < 2) throw Error(ErrorCode::InvalidSpec, "build_measure: grid_size must be >= 2");

  DiscretizedMeasure m;
  m.kind_ = spec.kind;
  double lo = 0.0;
  double hi = 1.0;
  switch (spec.kind) {
    case MeasureKind::GaussianTruncated:
      if (!(spec.radius > 0.0) || 2.0 * normal_cdf(-spec.radius) >= 1e-10) {
        throw Error(ErrorCode::InvalidSpec,
                    "build_measure: Gaussian truncation radius leaves tail mass >= 1e-10");
      }
      lo = -spec.radius;
      hi = spec.radius;
      break;
    case MeasureKind::UniformSym:
      lo = -1.0;
      break;
    case MeasureKind::GraphOfF:
      if (!(spec.graph_epsilon > 0.0 && spec.graph_epsilon < 0.5)) {
        throw Error(ErrorCode::InvalidSpec, "build_measure: graph epsilon must lie in (0, 1/2)");
      }
      m.graph_epsilon_ = spec.graph_epsilon;
      break;
    case MeasureKind::Uniform01:
      break;
  }

  m.edges_.resize(n + 1);
  const double width = (hi - lo) / static_cast<double>(n);
  for (std::size_t i = 0; i <= n; ++i) m.edges_[i] = lo + width * static_cast<double>(i);
  m.edges_[n] = hi;

  m.nodes_.resize(n);
  m.masses_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.nodes_[i] = 0.5 * (m.edges_[i] + m.edges_[i + 1]);
    if (spec.kind == MeasureKind::GaussianTruncated) {
      // Difference of CDFs taken in the tail that avoids cancellation.
      const double a = m.edges_[i];
      const double b = m.edges_[i + 1];
      m.masses_[i] = b <= 0.0 ? normal_cdf(b) - normal_cdf(a) : normal_cdf(-a) - normal_cdf(-b);
    } else {
      m.masses_[i] = m.edges_[i + 1] - m.edges_[i];
    }
  }
  const double total = std::accumulate(m.masses_.begin(), m.masses_.end(), 0.0);
  for (auto& mass : m.masses_) mass /= total;

  m.cumulative_.resize(n);
  std::partial_sum(m.masses_.begin(), m.masses_.end(), m.cumulative_.begin());
  return m;
}

Point DiscretizedMeasure::lift(double x) const {
  if (kind_ == MeasureKind::GraphOfF) return Point{x, graph_function(graph_epsilon_, x)};
  return Point{x, 0.0};
}

Point DiscretizedMeasure::point_in_cell(std::size_t i, double v) const {
  const double x = edges_[i] + v * (edges_[i + 1] - edges_[i]);
  return lift(std::min(x, edges_[i + 1]));
}

std::size_t DiscretizedMeasure::locate(double u) const {
  const double target = u * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  const auto i = static_cast<std::size_t>(it - cumulative_.begin());
  return std::min(i, size() - 1);
}

Point DiscretizedMeasure::sample_reference(Rng& rng) const {
  const std::size_t cell = locate(uniform01(rng));
  return point_in_cell(cell, uniform01(rng));
}

double quadrature(const DiscretizedMeasure& measure, std::span<const double> values) {
  if (values.size() != measure.size()) {
    throw Error(ErrorCode::InvalidShape, "quadrature: value count differs from grid size");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::NumericalError, "quadrature: non-finite integrand value");
    }
    sum += values[i] * measure.cell_masses()[i];
  }
  return sum;
}

std::vector<Point> sample(const DiscretizedMeasure& measure,
                          std::span<const double> density_values, std::size_t count,
                          Rng& rng) {
  if (density_values.size() != measure.size()) {
    throw Error(ErrorCode::InvalidShape, "sample: density length differs from grid size");
  }
  std::vector<double> cumulative(measure.size());
  double running = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    const double d = density_values[i];
    if (!(d >= 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::DegenerateDensity, "sample: density must be finite and nonnegative");
    }
    running += d * measure.cell_masses()[i];
    cumulative[i] = running;
  }
  if (!(running > 0.0)) {
    throw Error(ErrorCode::DegenerateDensity, "sample: density vanishes on the grid");
  }
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const double target = uniform01(rng) * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    const std::size_t cell =
        std::min(static_cast<std::size_t>(it - cumulative.begin()), measure.size() - 1);
    out.push_back(measure.point_in_cell(cell, uniform01(rng)));
  }
  return out;
}

}  // namespace christoffel
