#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "christoffel/cd_approx.hpp"
#include "christoffel/christoffel.hpp"
#include "christoffel/dictionaries.hpp"
#include "christoffel/measures.hpp"
#include "christoffel/metrics.hpp"
#include "christoffel/refinement.hpp"
#include "christoffel/weighted_ls.hpp"

namespace christoffel {

enum class ExperimentKind { Refinement, ChristoffelDarboux, Regression };

std::string_view to_string(ExperimentKind kind) noexcept;

struct CDSettings {
  double epsilon = 1e-3;
  int degree = 8;
  std::size_t nx = 1001;
  std::size_t ny = 1000;
  /// Resolution of the dense level-set matrices.
  std::size_t level_nx = 201;
  std::size_t level_ny = 201;
  /// Step whose estimate is used for f_d_refined.
  std::uint64_t refined_step = 10;
};

struct ExperimentSpec {
  std::string id;
  ExperimentKind kind = ExperimentKind::Refinement;
  DictionarySpec dictionary;
  /// Seed for drawing random dictionaries; defaults to `seed`.
  std::optional<std::uint64_t> dictionary_seed;
  MeasureSpec measure;
  SamplerKind sampler = SamplerKind::Auto;
  RefinementConfig refinement;
  std::size_t repetitions = 10;
  std::uint64_t seed = 7;
  /// 0 records at 1..10, 20..100, 200..1000, ... and k_max; r > 0 records
  /// step 1, every multiple of r and k_max.
  std::uint64_t record_every = 0;
  std::vector<double> levels = default_levels();
  CDSettings cd;
  RegressionStudyConfig regression;

  /// Throws ConfigError describing the first invalid field.
  void validate() const;
};

/// Ascending steps in [1, k_max] at which traces are recorded.
std::vector<std::uint64_t> record_steps(std::uint64_t k_max, std::uint64_t record_every);

/// Accepts a single experiment object, an array of them, or an object with an
/// "experiments" array. Unknown keys are rejected. Throws ConfigError.
std::vector<ExperimentSpec> parse_experiments(std::string_view json_text);
std::vector<ExperimentSpec> load_experiments(const std::filesystem::path& file);

/// Resolved configuration as pretty-printed JSON; parse_experiments()
/// reproduces the spec.
std::string to_json(const ExperimentSpec& spec);

struct PresetInfo {
  std::string name;
  std::string description;
};

const std::vector<PresetInfo>& presets();

/// Throws ConfigError for unknown names.
std::vector<ExperimentSpec> preset(std::string_view name);

/// 4 d ln(4 d), rounded up.
std::size_t large_sample_size(double d);

struct RunOptions {
  std::filesystem::path output_dir = ".";
  /// 0 selects CHRISTOFFEL_JOBS, then the hardware concurrency.
  unsigned jobs = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repetitions;
  std::optional<std::uint64_t> k_max;
};

/// Applies the overrides of `options` to `spec`.
ExperimentSpec resolve(ExperimentSpec spec, const RunOptions& options);

unsigned resolve_jobs(unsigned requested);

struct ExperimentResult {
  std::string id;
  std::vector<std::filesystem::path> files;
  /// One line, also stored in the manifest.
  std::string summary;
};

/// Runs the (already resolved) spec and writes its CSVs and manifest into
/// options.output_dir. Repetitions run on a worker pool; files are written
/// afterwards by the calling thread. Throws ConfigError or IOError.
ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options);

}  // namespace christoffel
