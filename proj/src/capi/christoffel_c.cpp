#include "christoffel/christoffel.h"

#include <cmath>
#include <limits>
#include <new>
#include <string>
#include <vector>

#include "christoffel/errors.hpp"
#include "christoffel/harness.hpp"

using namespace christoffel;

struct chr_experiment {
  std::vector<ExperimentSpec> specs;
  RunOptions options;
  std::string summary;
  std::string config;
};

struct chr_dictionary {
  FeatureDictionary dict;
};

namespace {

thread_local std::string last_error;

chr_status fail(chr_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

chr_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError: return CHR_CONFIG;
    case ErrorCode::IOError: return CHR_IO;
    case ErrorCode::InvalidMatrix:
    case ErrorCode::NotPSD:
    case ErrorCode::NumericalError: return CHR_NUMERICAL;
    case ErrorCode::DegenerateReference:
    case ErrorCode::DegenerateDensity: return CHR_DEGENERATE;
    case ErrorCode::InvalidShape:
    case ErrorCode::InvalidSpec:
    case ErrorCode::DomainError: return CHR_INVALID_ARGUMENT;
  }
  return CHR_INTERNAL;
}

// Runs f, translating exceptions into status codes.
template <typename F>
chr_status guarded(F&& f) {
  last_error.clear();
  try {
    f();
    return CHR_OK;
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CHR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CHR_INTERNAL, e.what());
  } catch (...) {
    return fail(CHR_INTERNAL, "unknown exception");
  }
}

#define CHR_REQUIRE(ptr)                                                   \
  do {                                                                     \
    if ((ptr) == nullptr) return fail(CHR_INVALID_ARGUMENT, #ptr " is null"); \
  } while (0)

chr_status adopt(std::vector<ExperimentSpec> specs, chr_experiment** out) {
  *out = new chr_experiment{std::move(specs), {}, {}, {}};
  return CHR_OK;
}

Matrix row_major(const double* data, std::size_t n) {
  Matrix m(static_cast<Index>(n), static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = data[i * n + j];
  return m;
}

}  // namespace

extern "C" {

const char* chr_version(void) { return CHRISTOFFEL_VERSION; }

const char* chr_last_error(void) { return last_error.c_str(); }

const char* chr_status_string(chr_status status) {
  switch (status) {
    case CHR_OK: return "ok";
    case CHR_INVALID_ARGUMENT: return "invalid argument";
    case CHR_CONFIG: return "configuration error";
    case CHR_IO: return "I/O error";
    case CHR_NUMERICAL: return "numerical error";
    case CHR_DEGENERATE: return "degenerate input";
    case CHR_UNKNOWN_PRESET: return "unknown preset";
    case CHR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

chr_status chr_gamma_bound(double kn, double d, double p, double* out) {
  CHR_REQUIRE(out);
  return guarded([&] { *out = gamma_bound(kn, d, p); });
}

size_t chr_preset_count(void) { return presets().size(); }

chr_status chr_preset_name(size_t index, const char** name) {
  CHR_REQUIRE(name);
  if (index >= presets().size()) return fail(CHR_INVALID_ARGUMENT, "preset index out of range");
  *name = presets()[index].name.c_str();
  return CHR_OK;
}

chr_status chr_preset_description(size_t index, const char** description) {
  CHR_REQUIRE(description);
  if (index >= presets().size()) return fail(CHR_INVALID_ARGUMENT, "preset index out of range");
  *description = presets()[index].description.c_str();
  return CHR_OK;
}

chr_status chr_experiment_from_json(const char* json_text, chr_experiment** out) {
  CHR_REQUIRE(json_text);
  CHR_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { adopt(parse_experiments(json_text), out); });
}

chr_status chr_experiment_from_file(const char* path, chr_experiment** out) {
  CHR_REQUIRE(path);
  CHR_REQUIRE(out);
  *out = nullptr;
  return guarded([&] { adopt(load_experiments(path), out); });
}

chr_status chr_experiment_from_preset(const char* name, chr_experiment** out) {
  CHR_REQUIRE(name);
  CHR_REQUIRE(out);
  *out = nullptr;
  const chr_status s = guarded([&] { adopt(preset(name), out); });
  return s == CHR_CONFIG ? fail(CHR_UNKNOWN_PRESET, chr_last_error()) : s;
}

void chr_experiment_destroy(chr_experiment* experiment) { delete experiment; }

chr_status chr_experiment_count(const chr_experiment* experiment, size_t* count) {
  CHR_REQUIRE(experiment);
  CHR_REQUIRE(count);
  *count = experiment->specs.size();
  return CHR_OK;
}

chr_status chr_experiment_id(const chr_experiment* experiment, size_t index, const char** id) {
  CHR_REQUIRE(experiment);
  CHR_REQUIRE(id);
  if (index >= experiment->specs.size()) return fail(CHR_INVALID_ARGUMENT, "experiment index out of range");
  *id = experiment->specs[index].id.c_str();
  return CHR_OK;
}

chr_status chr_experiment_set_seed(chr_experiment* experiment, uint64_t seed) {
  CHR_REQUIRE(experiment);
  experiment->options.seed = seed;
  return CHR_OK;
}

chr_status chr_experiment_set_repetitions(chr_experiment* experiment, size_t repetitions) {
  CHR_REQUIRE(experiment);
  if (repetitions == 0) return fail(CHR_CONFIG, "repetitions must be >= 1");
  experiment->options.repetitions = repetitions;
  return CHR_OK;
}

chr_status chr_experiment_set_k_max(chr_experiment* experiment, uint64_t k_max) {
  CHR_REQUIRE(experiment);
  if (k_max == 0) return fail(CHR_CONFIG, "k_max must be >= 1");
  experiment->options.k_max = k_max;
  return CHR_OK;
}

chr_status chr_experiment_set_jobs(chr_experiment* experiment, unsigned jobs) {
  CHR_REQUIRE(experiment);
  experiment->options.jobs = jobs;
  return CHR_OK;
}

chr_status chr_experiment_set_output_dir(chr_experiment* experiment, const char* dir) {
  CHR_REQUIRE(experiment);
  CHR_REQUIRE(dir);
  if (*dir == '\0') return fail(CHR_INVALID_ARGUMENT, "output directory is empty");
  experiment->options.output_dir = dir;
  return CHR_OK;
}

chr_status chr_experiment_run(chr_experiment* experiment) {
  CHR_REQUIRE(experiment);
  experiment->summary.clear();
  return guarded([&] {
    for (const auto& spec : experiment->specs) {
      const auto result = run_experiment(resolve(spec, experiment->options), experiment->options);
      if (!experiment->summary.empty()) experiment->summary += '\n';
      experiment->summary += result.summary;
    }
  });
}

chr_status chr_experiment_summary(const chr_experiment* experiment, const char** summary) {
  CHR_REQUIRE(experiment);
  CHR_REQUIRE(summary);
  *summary = experiment->summary.c_str();
  return CHR_OK;
}

chr_status chr_experiment_config(chr_experiment* experiment, size_t index, const char** json_text) {
  CHR_REQUIRE(experiment);
  CHR_REQUIRE(json_text);
  if (index >= experiment->specs.size()) return fail(CHR_INVALID_ARGUMENT, "experiment index out of range");
  return guarded([&] {
    experiment->config = to_json(resolve(experiment->specs[index], experiment->options));
    *json_text = experiment->config.c_str();
  });
}

chr_status chr_dictionary_create(chr_family family, int dimension, chr_dictionary** out) {
  CHR_REQUIRE(out);
  *out = nullptr;
  DictionarySpec spec;
  switch (family) {
    case CHR_FAMILY_HERMITE: spec = DictionarySpec::hermite(dimension); break;
    case CHR_FAMILY_MONOMIAL: spec = DictionarySpec::monomial(dimension); break;
    case CHR_FAMILY_LEGENDRE: spec = DictionarySpec::legendre(dimension); break;
    case CHR_FAMILY_STEP_DYADIC: spec = DictionarySpec::step_dyadic(dimension - 1); break;
    default: return fail(CHR_INVALID_ARGUMENT, "unknown dictionary family");
  }
  return guarded([&] {
    Rng rng(0);
    *out = new chr_dictionary{build_dictionary(spec, rng)};
  });
}

void chr_dictionary_destroy(chr_dictionary* dictionary) { delete dictionary; }

chr_status chr_dictionary_dimension(const chr_dictionary* dictionary, size_t* dimension) {
  CHR_REQUIRE(dictionary);
  CHR_REQUIRE(dimension);
  *dimension = static_cast<size_t>(dictionary->dict.dimension());
  return CHR_OK;
}

chr_status chr_dictionary_evaluate(const chr_dictionary* dictionary, double x, double* out) {
  CHR_REQUIRE(dictionary);
  CHR_REQUIRE(out);
  return guarded([&] {
    const Vector b = dictionary->dict(Point{x, 0.0});
    for (Index i = 0; i < b.size(); ++i) out[i] = b(i);
  });
}

chr_status chr_inverse_christoffel(const chr_dictionary* dictionary, const double* h, double x,
                                   double* out) {
  CHR_REQUIRE(dictionary);
  CHR_REQUIRE(h);
  CHR_REQUIRE(out);
  return guarded([&] {
    const auto n = static_cast<std::size_t>(dictionary->dict.dimension());
    *out = inverse_christoffel(sym_eig(row_major(h, n)), dictionary->dict, Point{x, 0.0});
  });
}

chr_status chr_suboptimality(const double* h, const double* g, size_t dimension, double* out) {
  CHR_REQUIRE(h);
  CHR_REQUIRE(g);
  CHR_REQUIRE(out);
  if (dimension == 0) return fail(CHR_INVALID_ARGUMENT, "dimension must be >= 1");
  return guarded([&] {
    *out = suboptimality(sym_eig(row_major(h, dimension)), sym_eig(row_major(g, dimension)));
  });
}

}  // extern "C"
