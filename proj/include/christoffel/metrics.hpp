#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "christoffel/christoffel.hpp"
#include "christoffel/linalg.hpp"

namespace christoffel {

/// gamma = C / c of the pencil (h, g_true) on range(g_true); +inf when the
/// framing fails, including rank-deficient h.
double suboptimality(const SpectralGramian& h, const SpectralGramian& g_true);

/// Half the L1(rho) distance between K_h / z_h and K_g / z_g, both
/// normalized by quadrature. Throws DegenerateDensity if a normalizer is 0.
double tv_distance(const SpectralGramian& h, const SpectralGramian& g_true,
                   const FeatureDictionary& dict, const DiscretizedMeasure& measure);

/// Same, for Christoffel values already tabulated at the nodes.
double tv_distance(std::span<const double> k_h, std::span<const double> k_g,
                   const DiscretizedMeasure& measure);

/// (sqrt(kn) + a) / (sqrt(kn) - a) with a = sqrt((d - 1) / (1 - p)); +inf
/// when sqrt(kn) <= a. Throws InvalidSpec for kn <= 0, d < 1 or p outside
/// (0, 1).
double gamma_bound(double kn, double d, double p);

/// Equispaced levels 0, 1/(count-1), ..., 1.
std::vector<double> default_levels(std::size_t count = 11);

/// Linear-interpolation quantile of ascending `sorted` (+inf allowed).
double empirical_quantile(const std::vector<double>& sorted, double level);

/// Per-step quantiles over repetitions. quantiles[s][l] belongs to steps[s]
/// and levels[l].
struct QuantileTrace {
  std::string experiment_id;
  std::string method;
  std::vector<double> levels;
  std::vector<std::uint64_t> steps;
  std::vector<std::uint64_t> kn;
  std::vector<std::vector<double>> quantiles;
};

/// per_rep[r][s] is the value of repetition r at steps[s]. Throws InvalidSpec
/// when per_rep is empty or ragged.
QuantileTrace reduce_quantiles(const std::vector<std::vector<double>>& per_rep,
                               const std::vector<std::uint64_t>& steps,
                               const std::vector<std::uint64_t>& kn,
                               const std::vector<double>& levels = default_levels());

}  // namespace christoffel
