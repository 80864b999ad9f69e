#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "christoffel/dictionaries.hpp"
#include "christoffel/linalg.hpp"
#include "christoffel/measures.hpp"

namespace christoffel {

/// x -> B(x)^T pinv_floored(h) B(x), evaluated as ||W^T b(x)||^2 where b are
/// the untransformed features and W = T^T L with L L^T = pinv_floored(h).
/// Working in the base space keeps kernel directions of h that B never
/// reaches out of the arithmetic.
class ChristoffelFunction {
 public:
  ChristoffelFunction(const SpectralGramian& h, const FeatureDictionary& dict);

  double operator()(Point x) const;
  double from_base_features(const Eigen::Ref<const Vector>& b) const {
    return (factor_.transpose() * b).squaredNorm();
  }

  const FeatureDictionary& dictionary() const noexcept { return *dict_; }
  /// W, of shape base_dimension x D.
  const Matrix& base_factor() const noexcept { return factor_; }
  /// W W^T, the floored pseudo-inverse pulled back to the base features.
  Matrix base_pinv() const { return factor_ * factor_.transpose(); }

 private:
  const FeatureDictionary* dict_;
  Matrix factor_;
};

/// Throws DomainError when x lies outside the dictionary domain.
double inverse_christoffel(const SpectralGramian& h, const FeatureDictionary& dict, Point x);

/// <pinv_floored(h), g_true>_F. Equals rank(g_true) when h == g_true.
double normalization_z(const SpectralGramian& h, const SpectralGramian& g_true);

/// Untransformed features at every node of `measure`, one column per node.
Matrix grid_base_features(const FeatureDictionary& dict, const DiscretizedMeasure& measure);

/// Midpoint-rule Gramian sum_i B(node_i) B(node_i)^T mass_i.
Matrix gramian_by_quadrature(const FeatureDictionary& dict, const DiscretizedMeasure& measure);

/// The Christoffel function at every node, given grid_base_features().
std::vector<double> christoffel_on_grid(const ChristoffelFunction& k, const Matrix& grid_features);

struct MixtureWeights {
  double zbar = 0.0;
  std::optional<double> z_exact;
  std::optional<double> z_hat;
  std::size_t m = 0;

  /// z_hat when present, otherwise z_exact. Throws InvalidSpec when neither
  /// is set or a value is negative.
  double z_star() const;
};

/// Density (zbar + K_h) d rho with its importance weight
/// (zbar + z*) / (zbar + K_h(x)).
class MixtureDensity {
 public:
  MixtureDensity(ChristoffelFunction k, MixtureWeights weights);

  const ChristoffelFunction& christoffel() const noexcept { return k_; }
  const MixtureWeights& weights() const noexcept { return weights_; }
  double unnormalized(Point x) const { return weights_.zbar + k_(x); }
  double weight(Point x) const;

 private:
  ChristoffelFunction k_;
  MixtureWeights weights_;
  double numerator_;
};

/// Node values zbar + K_h(node) suitable for measures::sample, together with
/// the weight function. Throws DegenerateDensity when K_h vanishes on the
/// grid and zbar == 0.
struct GridMixture {
  std::vector<double> density;
  MixtureDensity mixture;
};
GridMixture mixture_density(const SpectralGramian& h, const FeatureDictionary& dict,
                            const DiscretizedMeasure& measure, const MixtureWeights& weights);

/// Mean of K at m independent draws from the reference measure.
double estimate_z_hat(const ChristoffelFunction& k, const DiscretizedMeasure& measure,
                      std::size_t m, Rng& rng);
double estimate_z_hat(const SpectralGramian& h, const FeatureDictionary& dict,
                      const DiscretizedMeasure& measure, std::size_t m, Rng& rng);

enum class SamplerKind {
  Auto,
  /// Cumulative packed moment tables: O(log N * D^2) per draw after an
  /// O(N * D^2) setup shared by all steps.
  Prefix,
  /// Tabulates the density on the whole grid for every call.
  Grid,
};

std::string_view to_string(SamplerKind kind) noexcept;

/// Draws from densities of the form (zbar + ||W^T b(x)||^2) d rho for a fixed
/// (dictionary, measure) pair. Both strategies select the cell with the first
/// uniform and place the point inside it with the second, so they consume the
/// rng identically and agree up to rounding at cell boundaries.
class MixtureSampler {
 public:
  /// Auto picks Prefix for one-dimensional measures when the table holds at
  /// most `prefix_limit` doubles, Grid otherwise.
  MixtureSampler(const FeatureDictionary& dict, const DiscretizedMeasure& measure,
                 SamplerKind kind = SamplerKind::Auto, std::size_t prefix_limit = 32'000'000);

  SamplerKind kind() const noexcept { return kind_; }
  const FeatureDictionary& dictionary() const noexcept { return *dict_; }
  const DiscretizedMeasure& measure() const noexcept { return *measure_; }

  /// Appends `count` draws to `out`. Throws DegenerateDensity when the
  /// discretized density has no mass.
  void draw(const ChristoffelFunction& k, double zbar, std::size_t count, Rng& rng,
            std::vector<Point>& out) const;

  /// Discretized normalizer sum_i (zbar + K(node_i)) mass_i.
  double total_mass(const ChristoffelFunction& k, double zbar) const;

 private:
  std::vector<double> packed_coefficients(const ChristoffelFunction& k) const;
  double prefix_cdf(std::size_t i, const std::vector<double>& coef, double zbar) const;

  const FeatureDictionary* dict_;
  const DiscretizedMeasure* measure_;
  SamplerKind kind_;
  Index base_dim_ = 0;
  std::size_t packed_size_ = 0;
  std::vector<double> cumulative_moments_;
  std::vector<double> cumulative_mass_;
  Matrix grid_features_;
};

}  // namespace christoffel
