#include "christoffel/weighted_ls.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "christoffel/christoffel.hpp"
#include "christoffel/errors.hpp"
#include "christoffel/random.hpp"

namespace christoffel {

std::string_view to_string(Target target) noexcept {
  switch (target) {
    case Target::Sine: return "sin";
    case Target::Runge: return "runge";
    case Target::Peak: return "peak";
    case Target::Indicator: return "indicator";
  }
  return "unknown";
}

Target target_from_string(std::string_view name) {
  for (Target t : all_targets()) {
    if (to_string(t) == name) return t;
  }
  throw Error(ErrorCode::InvalidSpec, "unknown regression target '" + std::string(name) + "'");
}

const std::vector<Target>& all_targets() {
  static const std::vector<Target> targets{Target::Sine, Target::Runge, Target::Peak,
                                           Target::Indicator};
  return targets;
}

double target_value(Target target, double x) {
  switch (target) {
    case Target::Sine: return std::sin(2.0 * std::numbers::pi * x);
    case Target::Runge: return 1.0 / (1.0 + 25.0 * x * x);
    case Target::Peak: return x == 0.0 ? 1e3 : std::min(1.0 / (x * x), 1e3);
    case Target::Indicator: return x >= 0.0 && x <= 1.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

void WeightedLSProblem::validate() const {
  if (points.empty()) throw Error(ErrorCode::InvalidSpec, "least squares: no sample points");
  if (weights.size() != points.size()) {
    throw Error(ErrorCode::InvalidSpec, "least squares: one weight per point required");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::InvalidSpec, "least squares: weights must be finite and >= 0");
    }
  }
  if (!target) throw Error(ErrorCode::InvalidSpec, "least squares: no target function");
}

Matrix weighted_gramian(const FeatureDictionary& basis, std::span<const double> points,
                        std::span<const double> weights) {
  if (weights.size() != points.size()) {
    throw Error(ErrorCode::InvalidShape, "weighted_gramian: one weight per point required");
  }
  const Index d = basis.dimension();
  Matrix g = Matrix::Zero(d, d);
  Vector b(d);
  for (std::size_t i = 0; i < points.size(); ++i) {
    basis.evaluate(Point{points[i]}, b);
    g.selfadjointView<Eigen::Lower>().rankUpdate(b, weights[i]);
  }
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

LSFit weighted_lsq(const WeightedLSProblem& problem, const FeatureDictionary& basis,
                   const DiscretizedMeasure& rho, const Matrix* grid_features) {
  problem.validate();
  if (std::all_of(problem.weights.begin(), problem.weights.end(), [](double w) { return w == 0.0; })) {
    throw Error(ErrorCode::DegenerateDensity, "least squares: all weights are zero");
  }
  const Index d = basis.dimension();
  const Matrix g = weighted_gramian(basis, problem.points, problem.weights);
  Vector rhs = Vector::Zero(d);
  Vector b(d);
  for (std::size_t i = 0; i < problem.points.size(); ++i) {
    basis.evaluate(Point{problem.points[i]}, b);
    rhs += problem.weights[i] * problem.target(problem.points[i]) * b;
  }
  LSFit fit;
  fit.coefficients = pinv_floored(sym_eig(g)) * rhs;

  Matrix local;
  if (grid_features == nullptr) {
    local = grid_base_features(basis, rho);
    grid_features = &local;
  }
  const Vector fitted_base = basis.transform() ? Vector(basis.transform()->transpose() * fit.coefficients)
                                               : fit.coefficients;
  const Vector v = grid_features->transpose() * fitted_base;
  const auto& mass = rho.cell_masses();
  double err = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double u = problem.target(rho.nodes()[i]);
    const double r = u - v(static_cast<Index>(i));
    err += mass[i] * r * r;
    norm += mass[i] * u * u;
  }
  if (!std::isfinite(err)) throw Error(ErrorCode::NumericalError, "least squares: non-finite error");
  fit.l2_error = std::sqrt(err);
  fit.rel_error = norm > 0.0 ? fit.l2_error / std::sqrt(norm) : fit.l2_error;
  return fit;
}

namespace {

struct Extremes {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  Vector v_min;
  Vector v_max;
};

Extremes extremes(const Matrix& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const Index last = g.rows() - 1;
  return {std::max(es.eigenvalues()(0), 0.0), es.eigenvalues()(last), es.eigenvectors().col(0),
          es.eigenvectors().col(last)};
}

Matrix feature_rows(const FeatureDictionary& basis, std::span<const double> points) {
  Matrix m(static_cast<Index>(points.size()), basis.dimension());
  Vector b(basis.dimension());
  for (std::size_t i = 0; i < points.size(); ++i) {
    basis.evaluate(Point{points[i]}, b);
    m.row(static_cast<Index>(i)) = b.transpose();
  }
  return m;
}

Matrix gramian_of(const Matrix& m, const Vector& w) {
  return m.transpose() * w.asDiagonal() * m;
}

}  // namespace

std::vector<double> scaled_uniform_weights(const FeatureDictionary& basis,
                                           std::span<const double> points, double cap) {
  if (points.empty()) throw Error(ErrorCode::InvalidSpec, "optimize_weights: no sample points");
  if (!(cap > 0.0)) throw Error(ErrorCode::InvalidSpec, "optimize_weights: cap must be positive");
  const Matrix m = feature_rows(basis, points);
  const double n = static_cast<double>(points.size());
  const Vector w = Vector::Constant(m.rows(), 1.0 / n);
  const double top = extremes(gramian_of(m, w)).lambda_max;
  if (!(top > 0.0)) throw Error(ErrorCode::DegenerateDensity, "optimize_weights: all features vanish");
  return std::vector<double>(points.size(), cap / (n * top));
}

std::vector<double> optimize_weights(const FeatureDictionary& basis, std::span<const double> points,
                                     const WeightOptions& options) {
  if (options.max_iterations < 0 || options.patience < 1 || !(options.stall_tolerance >= 0.0)) {
    throw Error(ErrorCode::InvalidSpec, "optimize_weights: bad iteration options");
  }
  const std::vector<double> start = scaled_uniform_weights(basis, points, options.cap);
  const Matrix m = feature_rows(basis, points);
  Vector w = Eigen::Map<const Vector>(start.data(), static_cast<Index>(start.size()));
  Vector best = w;
  Extremes e = extremes(gramian_of(m, w));
  double best_value = e.lambda_min;
  int since_improvement = 0;

  for (int t = 0; t < options.max_iterations; ++t) {
    // On the cap surface lambda_min(G_w) = cap * r(w) with r = lambda_min / lambda_max;
    // ascend along the supergradient of r, whose parts are (v . b(x_i))^2.
    const Vector g_min = (m * e.v_min).cwiseAbs2();
    const Vector g_max = (m * e.v_max).cwiseAbs2();
    const Vector dr = (e.lambda_max * g_min - e.lambda_min * g_max) / (e.lambda_max * e.lambda_max);
    const double dr_norm = dr.lpNorm<1>();
    if (!(dr_norm > 0.0)) break;
    const double step = 0.5 / std::sqrt(static_cast<double>(t) + 1.0);
    w = (w + (step * w.sum() / dr_norm) * dr).cwiseMax(0.0);
    e = extremes(gramian_of(m, w));
    if (!(e.lambda_max > 0.0)) break;
    w *= options.cap / e.lambda_max;
    e = extremes(gramian_of(m, w));
    if (e.lambda_min > best_value * (1.0 + options.stall_tolerance)) {
      best_value = e.lambda_min;
      best = w;
      since_improvement = 0;
    } else if (++since_improvement >= options.patience) {
      break;
    }
  }
  return std::vector<double>(best.data(), best.data() + best.size());
}

void RegressionStudyConfig::validate() const {
  if (n_grid.empty()) throw Error(ErrorCode::InvalidSpec, "regression study: empty n_grid");
  for (std::size_t n : n_grid) {
    if (n == 0) throw Error(ErrorCode::InvalidSpec, "regression study: n must be >= 1");
  }
  if (repetitions == 0) throw Error(ErrorCode::InvalidSpec, "regression study: repetitions must be >= 1");
  if (degree < 1) throw Error(ErrorCode::InvalidSpec, "regression study: degree must be >= 1");
  if (targets.empty()) throw Error(ErrorCode::InvalidSpec, "regression study: no targets");
}

namespace {

Rng cell_rng(std::uint64_t seed, std::size_t n, std::size_t rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(rep)};
  return Rng(seq);
}

struct StudyContext {
  FeatureDictionary basis;
  DiscretizedMeasure rho;
  Matrix grid_features;
};

StudyContext make_context(int degree) {
  Rng unused(0);
  StudyContext c{build_dictionary(DictionarySpec::legendre(degree), unused),
                 build_measure(MeasureSpec::uniform_sym()), Matrix()};
  c.grid_features = grid_base_features(c.basis, c.rho);
  return c;
}

std::vector<RegressionRecord> cell(const RegressionStudyConfig& config, const StudyContext& ctx,
                                   std::size_t n, std::size_t rep) {
  Rng rng = cell_rng(config.seed, n, rep);
  std::vector<double> points(n);
  for (double& x : points) x = -1.0 + 2.0 * uniform01(rng);
  const std::vector<double> naive(n, 1.0 / static_cast<double>(n));
  const std::vector<double> optimal = optimize_weights(ctx.basis, points, config.weights);

  std::vector<RegressionRecord> out;
  for (Target target : config.targets) {
    WeightedLSProblem p{points, naive, [target](double x) { return target_value(target, x); }};
    out.push_back({target, n, rep, "naive", weighted_lsq(p, ctx.basis, ctx.rho, &ctx.grid_features).rel_error});
    p.weights = optimal;
    out.push_back({target, n, rep, "optimal", weighted_lsq(p, ctx.basis, ctx.rho, &ctx.grid_features).rel_error});
  }
  return out;
}

}  // namespace

std::vector<RegressionRecord> regression_cell(const RegressionStudyConfig& config, std::size_t n,
                                              std::size_t rep) {
  config.validate();
  return cell(config, make_context(config.degree), n, rep);
}

std::vector<RegressionRecord> run_regression_study(const RegressionStudyConfig& config) {
  config.validate();
  const StudyContext ctx = make_context(config.degree);
  std::vector<RegressionRecord> out;
  for (std::size_t n : config.n_grid) {
    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
      auto rows = cell(config, ctx, n, rep);
      out.insert(out.end(), rows.begin(), rows.end());
    }
  }
  return out;
}

std::vector<QuantileTrace> reduce_regression(const RegressionStudyConfig& config,
                                             const std::vector<RegressionRecord>& records,
                                             const std::vector<double>& levels) {
  config.validate();
  std::vector<std::uint64_t> steps(config.n_grid.begin(), config.n_grid.end());
  std::vector<QuantileTrace> out;
  for (Target target : config.targets) {
    for (std::string_view method : {std::string_view("naive"), std::string_view("optimal")}) {
      std::vector<std::vector<double>> per_rep(config.repetitions,
                                               std::vector<double>(steps.size(), std::nan("")));
      for (const auto& r : records) {
        if (r.target != target || r.method != method || r.rep >= config.repetitions) continue;
        const auto it = std::find(config.n_grid.begin(), config.n_grid.end(), r.n);
        if (it == config.n_grid.end()) continue;
        per_rep[r.rep][static_cast<std::size_t>(it - config.n_grid.begin())] = r.rel_error;
      }
      QuantileTrace q = reduce_quantiles(per_rep, steps, steps, levels);
      q.experiment_id = std::string(to_string(target));
      q.method = std::string(method);
      out.push_back(std::move(q));
    }
  }
  return out;
}

}  // namespace christoffel
