/* C interface to the christoffel library. Every function returns a
 * chr_status; on failure chr_last_error() describes the problem for the
 * calling thread. Handles are opaque and owned by the caller. */
#ifndef CHRISTOFFEL_C_H
#define CHRISTOFFEL_C_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CHR_API __declspec(dllexport)
#else
#define CHR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum chr_status {
  CHR_OK = 0,
  CHR_INVALID_ARGUMENT = 1, /* null pointer, bad index, bad enum value */
  CHR_CONFIG = 2,           /* invalid experiment spec or JSON */
  CHR_IO = 3,               /* output directory or file not writable */
  CHR_NUMERICAL = 4,        /* non-finite values, PSD violations */
  CHR_DEGENERATE = 5,       /* zero-mass density or rank-zero reference */
  CHR_UNKNOWN_PRESET = 6,
  CHR_INTERNAL = 7
} chr_status;

typedef enum chr_family {
  CHR_FAMILY_HERMITE = 0,
  CHR_FAMILY_MONOMIAL = 1,
  CHR_FAMILY_LEGENDRE = 2,
  CHR_FAMILY_STEP_DYADIC = 3
} chr_family;

typedef struct chr_experiment chr_experiment;
typedef struct chr_dictionary chr_dictionary;

CHR_API const char* chr_version(void);

/* Message of the last failed call on this thread, "" if none. */
CHR_API const char* chr_last_error(void);

CHR_API const char* chr_status_string(chr_status status);

/* gamma bound for kn cumulative samples; writes +inf when kn is too small. */
CHR_API chr_status chr_gamma_bound(double kn, double d, double p, double* out);

CHR_API size_t chr_preset_count(void);
CHR_API chr_status chr_preset_name(size_t index, const char** name);
CHR_API chr_status chr_preset_description(size_t index, const char** description);

/* An experiment handle holds one or more experiment specs plus run options. */
CHR_API chr_status chr_experiment_from_json(const char* json_text, chr_experiment** out);
CHR_API chr_status chr_experiment_from_file(const char* path, chr_experiment** out);
/* Accepts a preset group ("hermite") or a single member ("hermite-n1-exact"). */
CHR_API chr_status chr_experiment_from_preset(const char* name, chr_experiment** out);
CHR_API void chr_experiment_destroy(chr_experiment* experiment);

CHR_API chr_status chr_experiment_count(const chr_experiment* experiment, size_t* count);
CHR_API chr_status chr_experiment_id(const chr_experiment* experiment, size_t index,
                                     const char** id);
CHR_API chr_status chr_experiment_set_seed(chr_experiment* experiment, uint64_t seed);
CHR_API chr_status chr_experiment_set_repetitions(chr_experiment* experiment, size_t repetitions);
CHR_API chr_status chr_experiment_set_k_max(chr_experiment* experiment, uint64_t k_max);
/* 0 selects CHRISTOFFEL_JOBS, then the hardware concurrency. */
CHR_API chr_status chr_experiment_set_jobs(chr_experiment* experiment, unsigned jobs);
CHR_API chr_status chr_experiment_set_output_dir(chr_experiment* experiment, const char* dir);

/* Runs every spec in order, writing CSVs and manifests to the output
 * directory. Stops at the first failure. */
CHR_API chr_status chr_experiment_run(chr_experiment* experiment);
/* One summary line per completed spec, joined by newlines. Valid until the
 * next run or destroy. */
CHR_API chr_status chr_experiment_summary(const chr_experiment* experiment, const char** summary);
/* Resolved configuration of spec `index` as JSON. Valid until the next call
 * on this handle. */
CHR_API chr_status chr_experiment_config(chr_experiment* experiment, size_t index,
                                         const char** json_text);

CHR_API chr_status chr_dictionary_create(chr_family family, int dimension, chr_dictionary** out);
CHR_API void chr_dictionary_destroy(chr_dictionary* dictionary);
CHR_API chr_status chr_dictionary_dimension(const chr_dictionary* dictionary, size_t* dimension);
/* Writes dimension() values of B(x). */
CHR_API chr_status chr_dictionary_evaluate(const chr_dictionary* dictionary, double x, double* out);

/* B(x)^T pinv(H) B(x) for the row-major dimension x dimension matrix h. */
CHR_API chr_status chr_inverse_christoffel(const chr_dictionary* dictionary, const double* h,
                                           double x, double* out);
/* gamma of the framing of h against g (row-major, both dimension x
 * dimension); +inf when the framing fails. */
CHR_API chr_status chr_suboptimality(const double* h, const double* g, size_t dimension,
                                     double* out);

#ifdef __cplusplus
}
#endif

#endif
