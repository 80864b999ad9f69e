#include "christoffel/refinement.hpp"

#include <cmath>
#include <limits>

#include "christoffel/metrics.hpp"

namespace christoffel {

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::ExactWeights: return "exact";
    case Mode::EstimatedWeights: return "estimated";
    case Mode::NaiveMC: return "naive_mc";
  }
  return "unknown";
}

std::string_view to_string(JPolicy policy) noexcept {
  switch (policy) {
    case JPolicy::Zero: return "zero";
    case JPolicy::ScaledIdentity: return "scaled_identity";
    case JPolicy::ScaledSelf: return "scaled_self";
  }
  return "unknown";
}

void RefinementConfig::validate() const {
  if (n == 0) throw Error(ErrorCode::InvalidSpec, "refinement: n must be >= 1");
  if (m == 0) throw Error(ErrorCode::InvalidSpec, "refinement: m must be >= 1");
  if (k_max == 0) throw Error(ErrorCode::InvalidSpec, "refinement: k_max must be >= 1");
  if (!(spectral.floor_epsilon >= 0.0) || !(spectral.rank_tolerance >= 0.0)) {
    throw Error(ErrorCode::InvalidSpec, "refinement: tolerances must be nonnegative");
  }
  if (min_eig && !(min_eig->scale > 0.0 && std::isfinite(min_eig->scale))) {
    throw Error(ErrorCode::InvalidSpec, "refinement: eigenvalue floor scale must be positive");
  }
}

Matrix weighted_outer_mean(const FeatureDictionary& dict, std::span<const Point> points,
                           std::span<const double> weights) {
  if (points.empty()) throw Error(ErrorCode::InvalidSpec, "weighted_outer_mean: no points");
  if (!weights.empty() && weights.size() != points.size()) {
    throw Error(ErrorCode::InvalidShape, "weighted_outer_mean: weight count differs");
  }
  const Index d = dict.dimension();
  Matrix sum = Matrix::Zero(d, d);
  Vector b(d);
  for (std::size_t i = 0; i < points.size(); ++i) {
    dict.evaluate(points[i], b);
    const double w = weights.empty() ? 1.0 : weights[i];
    sum.selfadjointView<Eigen::Lower>().rankUpdate(b, w);
  }
  sum.triangularView<Eigen::StrictlyUpper>() = sum.transpose();
  return sum / static_cast<double>(points.size());
}

RefinementState init_gramian(const FeatureDictionary& dict, const DiscretizedMeasure& measure,
                             std::size_t n, Rng rng, SpectralOptions options) {
  if (n == 0) throw Error(ErrorCode::InvalidSpec, "init_gramian: n must be >= 1");
  std::vector<Point> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) points.push_back(measure.sample_reference(rng));
  RefinementState state;
  state.last_half_step = weighted_outer_mean(dict, points);
  state.g_hat = sym_eig(state.last_half_step, options);
  state.k = 1;
  state.cumulative_samples = n;
  state.rng = rng;
  return state;
}

double regularizer_mass(const SpectralGramian& g_hat, JPolicy policy, std::uint64_t k) {
  switch (policy) {
    case JPolicy::Zero: return 0.0;
    case JPolicy::ScaledIdentity: return pinv_floored(g_hat).trace() / static_cast<double>(k);
    case JPolicy::ScaledSelf:
      return frobenius_inner(pinv_floored(g_hat), g_hat.matrix()) /
             static_cast<double>(g_hat.dimension());
  }
  return 0.0;
}

Matrix apply_constraints(const Matrix& matrix, const RefinementConfig& config, std::uint64_t k) {
  Matrix out = matrix;
  if (config.min_eig) {
    const SpectralGramian g = sym_eig(out, config.spectral);
    Vector lambda = g.eigenvalues();
    const double floor = config.min_eig->at(k);
    for (Index i = 0; i < g.rank(); ++i) lambda(i) = std::max(lambda(i), floor);
    for (Index i = g.rank(); i < lambda.size(); ++i) lambda(i) = 0.0;
    out = g.eigenvectors() * lambda.asDiagonal() * g.eigenvectors().transpose();
  }
  if (config.pin_b1 && out(0, 0) > 0.0) out /= out(0, 0);
  return out;
}

void accumulate_half_step(RefinementState& state, const RefinementConfig& config, Matrix half) {
  const double k = static_cast<double>(state.k);
  Matrix next = (k / (k + 1.0)) * state.g_hat.matrix() + (1.0 / (k + 1.0)) * half;
  state.last_half_step = std::move(half);
  state.k += 1;
  state.cumulative_samples += config.n;
  if (config.min_eig || config.pin_b1) next = apply_constraints(next, config, state.k);
  state.g_hat = sym_eig(next, config.spectral);
}

void refine_step(RefinementState& state, const RefinementConfig& config,
                 const MixtureSampler& sampler, const SpectralGramian* g_true) {
  if (config.mode == Mode::NaiveMC) {
    naive_mc_step(state, config, sampler.dictionary(), sampler.measure());
    return;
  }
  const FeatureDictionary& dict = sampler.dictionary();
  const ChristoffelFunction k(state.g_hat, dict);

  MixtureWeights weights;
  if (config.mode == Mode::ExactWeights) {
    if (g_true == nullptr) {
      throw Error(ErrorCode::InvalidSpec, "refine_step: exact weights need the true Gramian");
    }
    weights.z_exact = normalization_z(state.g_hat, *g_true);
  } else {
    weights.zbar = regularizer_mass(state.g_hat, config.j_policy, state.k);
    weights.m = config.m;
    weights.z_hat = estimate_z_hat(k, sampler.measure(), config.m, state.rng);
  }
  const double numerator = weights.zbar + weights.z_star();

  std::vector<Point> points;
  points.reserve(config.n);
  sampler.draw(k, weights.zbar, config.n, state.rng, points);

  const Index d = dict.dimension();
  Matrix half = Matrix::Zero(d, d);
  Vector base(dict.base_dimension());
  Vector b(d);
  for (const Point& x : points) {
    dict.evaluate_base(x, base);
    const double denominator = weights.zbar + k.from_base_features(base);
    if (!(denominator > 0.0)) {
      throw Error(ErrorCode::DegenerateDensity, "refine_step: mixture density vanishes at a sample");
    }
    if (const auto& t = dict.transform()) {
      b.noalias() = (*t) * base;
    } else {
      b = base;
    }
    half.selfadjointView<Eigen::Lower>().rankUpdate(b, numerator / denominator);
  }
  half.triangularView<Eigen::StrictlyUpper>() = half.transpose();
  half /= static_cast<double>(config.n);
  accumulate_half_step(state, config, std::move(half));
}

void naive_mc_step(RefinementState& state, const RefinementConfig& config,
                   const FeatureDictionary& dict, const DiscretizedMeasure& measure) {
  std::vector<Point> points;
  points.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) points.push_back(measure.sample_reference(state.rng));
  accumulate_half_step(state, config, weighted_outer_mean(dict, points));
}

std::vector<TracePoint> run_refinement(const RefinementConfig& config, const MixtureSampler& sampler,
                                       const SpectralGramian& g_true, Rng rng,
                                       const RecordPredicate& when,
                                       const RecordCallback& on_record) {
  config.validate();
  if (g_true.dimension() != sampler.dictionary().dimension()) {
    throw Error(ErrorCode::InvalidShape, "run_refinement: true Gramian has the wrong size");
  }
  std::vector<TracePoint> trace;
  RefinementState state =
      init_gramian(sampler.dictionary(), sampler.measure(), config.n, std::move(rng), config.spectral);
  if (config.min_eig || config.pin_b1) {
    state.g_hat = sym_eig(apply_constraints(state.g_hat.matrix(), config, state.k), config.spectral);
  }

  auto record = [&]() {
    if (when && !when(state.k)) return;
    TracePoint point{state.k, state.cumulative_samples, 0.0};
    try {
      point.gamma = suboptimality(state.g_hat, g_true);
    } catch (const Error&) {
      point.gamma = std::numeric_limits<double>::infinity();
    }
    trace.push_back(point);
    if (on_record) on_record(state, point);
  };

  record();
  while (state.k < config.k_max) {
    refine_step(state, config, sampler, &g_true);
    record();
  }
  return trace;
}

}  // namespace christoffel
