#include "christoffel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace christoffel {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double suboptimality(const SpectralGramian& h, const SpectralGramian& g_true) {
  return framing_constants(h, g_true).gamma;
}

double tv_distance(std::span<const double> k_h, std::span<const double> k_g,
                   const DiscretizedMeasure& measure) {
  const double z_h = quadrature(measure, k_h);
  const double z_g = quadrature(measure, k_g);
  if (!(z_h > 0.0) || !(z_g > 0.0)) {
    throw Error(ErrorCode::DegenerateDensity, "tv_distance: vanishing normalization");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    sum += std::abs(k_h[i] / z_h - k_g[i] / z_g) * measure.cell_masses()[i];
  }
  return std::min(0.5 * sum, 1.0);
}

double tv_distance(const SpectralGramian& h, const SpectralGramian& g_true,
                   const FeatureDictionary& dict, const DiscretizedMeasure& measure) {
  const Matrix features = grid_base_features(dict, measure);
  const auto k_h = christoffel_on_grid(ChristoffelFunction(h, dict), features);
  const auto k_g = christoffel_on_grid(ChristoffelFunction(g_true, dict), features);
  return tv_distance(k_h, k_g, measure);
}

double gamma_bound(double kn, double d, double p) {
  if (!(kn > 0.0)) throw Error(ErrorCode::InvalidSpec, "gamma_bound: kn must be positive");
  if (!(d >= 1.0)) throw Error(ErrorCode::InvalidSpec, "gamma_bound: d must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidSpec, "gamma_bound: p must lie in (0, 1)");
  // Squared form (sqrt(kn) + a)^2 / (kn - a^2), exact when kn * a^2 is a square.
  const double a2 = (d - 1.0) / (1.0 - p);
  if (kn <= a2) return kInf;
  return (kn + a2 + 2.0 * std::sqrt(kn * a2)) / (kn - a2);
}

std::vector<double> default_levels(std::size_t count) {
  if (count < 2) return {0.5};
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = static_cast<double>(i) / static_cast<double>(count - 1);
  }
  out.back() = 1.0;
  return out;
}

double empirical_quantile(const std::vector<double>& sorted, double level) {
  if (sorted.empty()) throw Error(ErrorCode::InvalidSpec, "empirical_quantile: no values");
  if (!(level >= 0.0 && level <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "empirical_quantile: level outside [0, 1]");
  }
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || lo == hi) return sorted[lo];
  if (std::isinf(sorted[hi]) || std::isinf(sorted[lo])) return sorted[hi];
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

QuantileTrace reduce_quantiles(const std::vector<std::vector<double>>& per_rep,
                               const std::vector<std::uint64_t>& steps,
                               const std::vector<std::uint64_t>& kn,
                               const std::vector<double>& levels) {
  if (per_rep.empty()) throw Error(ErrorCode::InvalidSpec, "reduce_quantiles: no repetitions");
  if (kn.size() != steps.size()) {
    throw Error(ErrorCode::InvalidSpec, "reduce_quantiles: steps and kn differ in length");
  }
  for (const auto& rep : per_rep) {
    if (rep.size() != steps.size()) {
      throw Error(ErrorCode::InvalidSpec, "reduce_quantiles: ragged repetition traces");
    }
  }
  QuantileTrace out;
  out.levels = levels;
  out.steps = steps;
  out.kn = kn;
  out.quantiles.resize(steps.size());
  std::vector<double> column(per_rep.size());
  for (std::size_t s = 0; s < steps.size(); ++s) {
    for (std::size_t r = 0; r < per_rep.size(); ++r) {
      const double v = per_rep[r][s];
      // NaN carries no order; treat a failed evaluation like a failed framing.
      column[r] = std::isnan(v) ? kInf : v;
    }
    std::sort(column.begin(), column.end());
    out.quantiles[s].reserve(levels.size());
    for (double level : levels) out.quantiles[s].push_back(empirical_quantile(column, level));
  }
  return out;
}

}  // namespace christoffel
