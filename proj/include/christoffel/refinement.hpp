#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "christoffel/christoffel.hpp"
#include "christoffel/linalg.hpp"
#include "christoffel/random.hpp"

namespace christoffel {

enum class Mode { ExactWeights, EstimatedWeights, NaiveMC };

/// Regularizer J_k of the sampling mixture: 0, (1/k) I or (1/D) G_hat.
enum class JPolicy { Zero, ScaledIdentity, ScaledSelf };

std::string_view to_string(Mode mode) noexcept;
std::string_view to_string(JPolicy policy) noexcept;

/// c_k = scale / k, applied to the nonzero eigenvalues of G_hat after each
/// update.
struct MinEigSchedule {
  double scale = 1.0;
  double at(std::uint64_t k) const { return scale / static_cast<double>(k); }
};

struct RefinementConfig {
  std::size_t n = 1;
  /// Reference draws per step for z_hat (EstimatedWeights only).
  std::size_t m = 1;
  Mode mode = Mode::ExactWeights;
  JPolicy j_policy = JPolicy::Zero;
  std::uint64_t k_max = 1;
  SpectralOptions spectral;
  std::optional<MinEigSchedule> min_eig;
  /// Rescale so that G_hat(0, 0) == 1 after each update.
  bool pin_b1 = false;

  /// Throws InvalidSpec on n, m or k_max of zero or a nonpositive schedule.
  void validate() const;
};

/// Running-average estimate after k averaged terms (the initial estimate is
/// the first), so cumulative_samples == k * n.
struct RefinementState {
  std::uint64_t k = 0;
  SpectralGramian g_hat;
  std::uint64_t cumulative_samples = 0;
  Rng rng;
  /// The most recent half-step estimate; the initial estimate after init.
  Matrix last_half_step;
};

/// (1/n) sum_i w_i B(x_i) B(x_i)^T, unit weights when `weights` is empty.
Matrix weighted_outer_mean(const FeatureDictionary& dict, std::span<const Point> points,
                           std::span<const double> weights = {});

/// Initial estimate from n reference draws; k = 1 afterwards.
RefinementState init_gramian(const FeatureDictionary& dict, const DiscretizedMeasure& measure,
                             std::size_t n, Rng rng, SpectralOptions options = {});

/// Mixture regularizer mass zbar_k = <pinv_floored(G_hat), J_k>_F.
double regularizer_mass(const SpectralGramian& g_hat, JPolicy policy, std::uint64_t k);

/// G_hat <- k/(k+1) G_hat + 1/(k+1) half, then k += 1 and the configured
/// constraints are applied at the new k.
void accumulate_half_step(RefinementState& state, const RefinementConfig& config, Matrix half);

/// One adaptive update. Per step the rng yields the m z_hat draws
/// (EstimatedWeights) and then the n mixture draws. g_true is required for
/// ExactWeights and ignored otherwise.
void refine_step(RefinementState& state, const RefinementConfig& config,
                 const MixtureSampler& sampler, const SpectralGramian* g_true);

/// One update from n unit-weight reference draws.
void naive_mc_step(RefinementState& state, const RefinementConfig& config,
                   const FeatureDictionary& dict, const DiscretizedMeasure& measure);

/// Applies the configured eigenvalue floor and B_1 pin to `matrix` at step k.
Matrix apply_constraints(const Matrix& matrix, const RefinementConfig& config, std::uint64_t k);

struct TracePoint {
  std::uint64_t step = 0;
  std::uint64_t kn = 0;
  double gamma = 0.0;
};

using RecordPredicate = std::function<bool(std::uint64_t step)>;
using RecordCallback = std::function<void(const RefinementState&, const TracePoint&)>;

/// Runs steps 1..k_max (step 1 is the initial estimate) and records gamma of
/// G_hat against g_true wherever `when` holds. A failed framing is recorded
/// as +inf. Deterministic in `rng`.
std::vector<TracePoint> run_refinement(const RefinementConfig& config, const MixtureSampler& sampler,
                                       const SpectralGramian& g_true, Rng rng,
                                       const RecordPredicate& when,
                                       const RecordCallback& on_record = {});

}  // namespace christoffel
