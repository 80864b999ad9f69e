#include "christoffel/christoffel.hpp"

#include <algorithm>
#include <cmath>

namespace christoffel {

std::string_view to_string(SamplerKind kind) noexcept {
  switch (kind) {
    case SamplerKind::Auto: return "auto";
    case SamplerKind::Prefix: return "prefix";
    case SamplerKind::Grid: return "grid";
  }
  return "unknown";
}

ChristoffelFunction::ChristoffelFunction(const SpectralGramian& h, const FeatureDictionary& dict)
    : dict_(&dict) {
  if (h.dimension() != dict.dimension()) {
    throw Error(ErrorCode::InvalidShape, "Gramian size differs from dictionary dimension");
  }
  const Matrix l = h.floored_inverse_factor();
  if (const auto& t = dict.transform()) {
    factor_ = t->transpose() * l;
  } else {
    factor_ = l;
  }
}

double ChristoffelFunction::operator()(Point x) const {
  Vector b(dict_->base_dimension());
  dict_->evaluate_base(x, b);
  return from_base_features(b);
}

double inverse_christoffel(const SpectralGramian& h, const FeatureDictionary& dict, Point x) {
  return ChristoffelFunction(h, dict)(x);
}

double normalization_z(const SpectralGramian& h, const SpectralGramian& g_true) {
  return frobenius_inner(pinv_floored(h), g_true.matrix());
}

Matrix grid_base_features(const FeatureDictionary& dict, const DiscretizedMeasure& measure) {
  Matrix out(dict.base_dimension(), static_cast<Index>(measure.size()));
  for (std::size_t i = 0; i < measure.size(); ++i) {
    dict.evaluate_base(measure.node_point(i), out.col(static_cast<Index>(i)));
  }
  return out;
}

Matrix gramian_by_quadrature(const FeatureDictionary& dict, const DiscretizedMeasure& measure) {
  const Matrix f = grid_base_features(dict, measure);
  const Eigen::Map<const Vector> mass(measure.cell_masses().data(),
                                      static_cast<Index>(measure.size()));
  Matrix base = f * mass.asDiagonal() * f.transpose();
  base = 0.5 * (base + base.transpose());
  if (const auto& t = dict.transform()) return (*t) * base * t->transpose();
  return base;
}

std::vector<double> christoffel_on_grid(const ChristoffelFunction& k, const Matrix& grid_features) {
  if (grid_features.rows() != k.base_factor().rows()) {
    throw Error(ErrorCode::InvalidShape, "grid features do not match the dictionary");
  }
  std::vector<double> out(static_cast<std::size_t>(grid_features.cols()));
  constexpr Index block = 4096;
  for (Index start = 0; start < grid_features.cols(); start += block) {
    const Index len = std::min(block, grid_features.cols() - start);
    const Matrix projected =
        k.base_factor().transpose() * grid_features.middleCols(start, len);
    for (Index j = 0; j < len; ++j) {
      out[static_cast<std::size_t>(start + j)] = projected.col(j).squaredNorm();
    }
  }
  return out;
}

double MixtureWeights::z_star() const {
  if (!(zbar >= 0.0)) throw Error(ErrorCode::InvalidSpec, "mixture zbar must be nonnegative");
  if (z_hat) {
    if (!(*z_hat >= 0.0)) throw Error(ErrorCode::InvalidSpec, "z_hat must be nonnegative");
    return *z_hat;
  }
  if (z_exact) {
    if (!(*z_exact >= 0.0)) throw Error(ErrorCode::InvalidSpec, "z_exact must be nonnegative");
    return *z_exact;
  }
  throw Error(ErrorCode::InvalidSpec, "mixture weights need z_exact or z_hat");
}

MixtureDensity::MixtureDensity(ChristoffelFunction k, MixtureWeights weights)
    : k_(std::move(k)), weights_(weights), numerator_(weights.zbar + weights.z_star()) {}

double MixtureDensity::weight(Point x) const {
  const double denominator = weights_.zbar + k_(x);
  if (!(denominator > 0.0)) {
    throw Error(ErrorCode::DegenerateDensity, "mixture density vanishes at the sample point");
  }
  return numerator_ / denominator;
}

GridMixture mixture_density(const SpectralGramian& h, const FeatureDictionary& dict,
                            const DiscretizedMeasure& measure, const MixtureWeights& weights) {
  ChristoffelFunction k(h, dict);
  std::vector<double> density = christoffel_on_grid(k, grid_base_features(dict, measure));
  double total = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    density[i] += weights.zbar;
    total += density[i] * measure.cell_masses()[i];
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::DegenerateDensity, "mixture density vanishes on the grid");
  }
  return GridMixture{std::move(density), MixtureDensity(std::move(k), weights)};
}

double estimate_z_hat(const ChristoffelFunction& k, const DiscretizedMeasure& measure,
                      std::size_t m, Rng& rng) {
  if (m == 0) throw Error(ErrorCode::InvalidSpec, "estimate_z_hat: m must be >= 1");
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) sum += k(measure.sample_reference(rng));
  return sum / static_cast<double>(m);
}

double estimate_z_hat(const SpectralGramian& h, const FeatureDictionary& dict,
                      const DiscretizedMeasure& measure, std::size_t m, Rng& rng) {
  return estimate_z_hat(ChristoffelFunction(h, dict), measure, m, rng);
}

MixtureSampler::MixtureSampler(const FeatureDictionary& dict, const DiscretizedMeasure& measure,
                               SamplerKind kind, std::size_t prefix_limit)
    : dict_(&dict), measure_(&measure), kind_(kind), base_dim_(dict.base_dimension()) {
  const auto d = static_cast<std::size_t>(base_dim_);
  packed_size_ = d * (d + 1) / 2;
  const std::size_t n = measure.size();
  if (kind_ == SamplerKind::Auto) {
    const bool fits = packed_size_ * n <= prefix_limit;
    kind_ = (fits && measure.kind() != MeasureKind::GraphOfF) ? SamplerKind::Prefix
                                                               : SamplerKind::Grid;
  }

  Matrix features = grid_base_features(dict, measure);
  if (kind_ == SamplerKind::Grid) {
    grid_features_ = std::move(features);
    return;
  }

  cumulative_moments_.assign(n * packed_size_, 0.0);
  cumulative_mass_.resize(n);
  std::vector<double> running(packed_size_, 0.0);
  double mass_running = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mass = measure.cell_masses()[i];
    const auto b = features.col(static_cast<Index>(i));
    std::size_t p = 0;
    for (Index a = 0; a < base_dim_; ++a) {
      const double ba = b(a) * mass;
      for (Index c = a; c < base_dim_; ++c) running[p++] += ba * b(c);
    }
    std::copy(running.begin(), running.end(), cumulative_moments_.begin() + i * packed_size_);
    mass_running += mass;
    cumulative_mass_[i] = mass_running;
  }
}

std::vector<double> MixtureSampler::packed_coefficients(const ChristoffelFunction& k) const {
  const Matrix p = k.base_pinv();
  std::vector<double> coef(packed_size_);
  std::size_t idx = 0;
  for (Index a = 0; a < base_dim_; ++a) {
    coef[idx++] = p(a, a);
    for (Index c = a + 1; c < base_dim_; ++c) coef[idx++] = 2.0 * p(a, c);
  }
  return coef;
}

double MixtureSampler::prefix_cdf(std::size_t i, const std::vector<double>& coef,
                                  double zbar) const {
  const double* row = cumulative_moments_.data() + i * packed_size_;
  double s = 0.0;
  for (std::size_t p = 0; p < packed_size_; ++p) s += coef[p] * row[p];
  return zbar * cumulative_mass_[i] + s;
}

double MixtureSampler::total_mass(const ChristoffelFunction& k, double zbar) const {
  if (kind_ == SamplerKind::Prefix) {
    return prefix_cdf(measure_->size() - 1, packed_coefficients(k), zbar);
  }
  const std::vector<double> values = christoffel_on_grid(k, grid_features_);
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    total += (zbar + values[i]) * measure_->cell_masses()[i];
  }
  return total;
}

void MixtureSampler::draw(const ChristoffelFunction& k, double zbar, std::size_t count, Rng& rng,
                          std::vector<Point>& out) const {
  if (k.base_factor().rows() != base_dim_) {
    throw Error(ErrorCode::InvalidShape, "sampler and Christoffel function disagree");
  }
  if (kind_ == SamplerKind::Grid) {
    std::vector<double> density = christoffel_on_grid(k, grid_features_);
    for (auto& v : density) v += zbar;
    const std::vector<Point> pts = sample(*measure_, density, count, rng);
    out.insert(out.end(), pts.begin(), pts.end());
    return;
  }

  const std::vector<double> coef = packed_coefficients(k);
  const std::size_t n = measure_->size();
  const double total = prefix_cdf(n - 1, coef, zbar);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorCode::DegenerateDensity, "mixture density vanishes on the grid");
  }
  for (std::size_t s = 0; s < count; ++s) {
    const double target = uniform01(rng) * total;
    // First cell whose cumulative value exceeds the target.
    std::size_t lo = 0;
    std::size_t hi = n;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (prefix_cdf(mid, coef, zbar) > target) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    const std::size_t cell = std::min(lo, n - 1);
    out.push_back(measure_->point_in_cell(cell, uniform01(rng)));
  }
}

}  // namespace christoffel
