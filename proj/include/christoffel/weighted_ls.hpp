#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "christoffel/dictionaries.hpp"
#include "christoffel/measures.hpp"
#include "christoffel/metrics.hpp"

namespace christoffel {

enum class Target { Sine, Runge, Peak, Indicator };

std::string_view to_string(Target target) noexcept;
/// Throws InvalidSpec for unknown names.
Target target_from_string(std::string_view name);
const std::vector<Target>& all_targets();

/// sin(2 pi x), 1/(1 + 25 x^2), min(x^-2, 1e3) (1e3 at 0) and the indicator
/// of [0, 1].
double target_value(Target target, double x);

struct WeightedLSProblem {
  std::vector<double> points;
  /// Nonnegative, one per point.
  std::vector<double> weights;
  std::function<double(double)> target;

  /// Throws InvalidSpec on empty points, a length mismatch, negative or
  /// non-finite weights or a missing target.
  void validate() const;
};

struct LSFit {
  Vector coefficients;
  /// ||u - v||_{L2(rho)} and the same divided by ||u||_{L2(rho)}.
  double l2_error = 0.0;
  double rel_error = 0.0;
};

/// G_w = sum_i w_i b(x_i) b(x_i)^T.
Matrix weighted_gramian(const FeatureDictionary& basis, std::span<const double> points,
                        std::span<const double> weights);

/// Weighted least squares in span(basis) through the normal equations with a
/// floored pseudo-inverse; errors by quadrature on `rho`. `grid_features`
/// may hold grid_base_features(basis, rho) to skip recomputing them. Throws
/// DegenerateDensity when all weights vanish.
LSFit weighted_lsq(const WeightedLSProblem& problem, const FeatureDictionary& basis,
                   const DiscretizedMeasure& rho, const Matrix* grid_features = nullptr);

struct WeightOptions {
  double cap = 2.0;
  int max_iterations = 500;
  /// Stop once the best lambda_min has not improved by this relative amount
  /// for `patience` consecutive iterations.
  double stall_tolerance = 1e-8;
  int patience = 50;
};

/// Maximizes lambda_min(G_w) subject to lambda_max(G_w) <= cap by projected
/// supergradient ascent, starting from the scaled-uniform weights. The result
/// is never worse than that start.
std::vector<double> optimize_weights(const FeatureDictionary& basis, std::span<const double> points,
                                     const WeightOptions& options = {});

/// Uniform weights scaled so that lambda_max(G_w) == cap.
std::vector<double> scaled_uniform_weights(const FeatureDictionary& basis,
                                           std::span<const double> points, double cap = 2.0);

struct RegressionStudyConfig {
  std::vector<std::size_t> n_grid{10, 14, 20, 28, 40, 57, 80, 113, 160};
  std::size_t repetitions = 10;
  int degree = 10;
  std::vector<Target> targets = all_targets();
  WeightOptions weights;
  std::uint64_t seed = 7;

  void validate() const;
};

struct RegressionRecord {
  Target target = Target::Sine;
  std::size_t n = 0;
  std::size_t rep = 0;
  /// "naive" or "optimal".
  std::string_view method;
  double rel_error = 0.0;
};

/// One (n, rep) cell: shared uniform points, naive (w = 1/n) and optimal
/// weights, all targets. Deterministic in (seed, n, rep).
std::vector<RegressionRecord> regression_cell(const RegressionStudyConfig& config, std::size_t n,
                                              std::size_t rep);

/// All cells in the order n, rep, target, method.
std::vector<RegressionRecord> run_regression_study(const RegressionStudyConfig& config);

/// Per target and method, quantiles of rel_error over repetitions with the
/// sample sizes as steps.
std::vector<QuantileTrace> reduce_regression(const RegressionStudyConfig& config,
                                             const std::vector<RegressionRecord>& records,
                                             const std::vector<double>& levels = default_levels());

}  // namespace christoffel
