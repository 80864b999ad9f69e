#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "christoffel/csv.hpp"
#include "christoffel/errors.hpp"
#include "christoffel/harness.hpp"
#include "json.hpp"

namespace christoffel {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

ExperimentSpec resolve(ExperimentSpec spec, const RunOptions& options) {
  if (options.seed) spec.seed = *options.seed;
  if (options.repetitions) spec.repetitions = *options.repetitions;
  if (options.k_max) spec.refinement.k_max = *options.k_max;
  spec.regression.seed = spec.seed;
  spec.regression.repetitions = spec.repetitions;
  spec.validate();
  return spec;
}

unsigned resolve_jobs(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CHRISTOFFEL_JOBS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

[[noreturn]] void io_error(const std::string& what) { throw Error(ErrorCode::IOError, what); }

// Runs task(i) for i in [0, count) on `jobs` threads. Results go to slots the
// task owns, so the outcome does not depend on scheduling. The first
// exception (lowest index) is rethrown.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) io_error("cannot create output directory '" + dir.string() + "'");
  const fs::path probe = dir / ".christoffel-write-probe";
  {
    std::ofstream out(probe);
    if (!out) io_error("output directory '" + dir.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

class Collector {
 public:
  explicit Collector(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) io_error("cannot open '" + path.string() + "' for writing");
    body(out);
    out.flush();
    if (!out) io_error("write to '" + path.string() + "' failed");
    files_.push_back(path);
  }

  const std::vector<fs::path>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

SpectralGramian true_gramian(const FeatureDictionary& dict, const DiscretizedMeasure& measure,
                             SpectralOptions options) {
  if (auto g = exact_gramian(dict, measure.kind(), options)) return *std::move(g);
  return sym_eig(gramian_by_quadrature(dict, measure), options);
}

FeatureDictionary dictionary_for(const ExperimentSpec& spec) {
  Rng rng(spec.dictionary_seed.value_or(spec.seed));
  return build_dictionary(spec.dictionary, rng);
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return empirical_quantile(values, 0.5);
}

void write_manifest(Collector& out, const ExperimentSpec& spec, const std::string& summary) {
  json files = json::array();
  for (const auto& f : out.files()) files.push_back(f.filename().string());
  json m;
  m["id"] = spec.id;
  m["kind"] = to_string(spec.kind);
  m["library_version"] = CHRISTOFFEL_VERSION;
  m["seed"] = spec.seed;
  m["repetitions"] = spec.repetitions;
  m["rng"] = "mt19937_64 seeded with seed xor repetition";
  m["config"] = json::parse(to_json(spec));
  m["files"] = files;
  m["summary"] = summary;
  out.write(spec.id + ".manifest.json", [&](std::ostream& os) { os << m.dump(2) << '\n'; });
}

struct RepTrace {
  std::vector<TracePoint> points;
};

void write_rep_traces(Collector& out, const std::string& name, const std::vector<RepTrace>& reps) {
  out.write(name, [&](std::ostream& os) {
    os << "rep,step,kn,gamma\n";
    for (std::size_t r = 0; r < reps.size(); ++r) {
      for (const auto& p : reps[r].points) {
        os << r << ',' << p.step << ',' << p.kn << ',' << format_double(p.gamma) << '\n';
      }
    }
  });
}

QuantileTrace reduce_traces(const ExperimentSpec& spec, const std::vector<RepTrace>& reps) {
  std::vector<std::vector<double>> per_rep;
  for (const auto& r : reps) {
    std::vector<double> g;
    for (const auto& p : r.points) g.push_back(p.gamma);
    per_rep.push_back(std::move(g));
  }
  std::vector<std::uint64_t> steps, kn;
  for (const auto& p : reps.front().points) {
    steps.push_back(p.step);
    kn.push_back(p.kn);
  }
  QuantileTrace t = reduce_quantiles(per_rep, steps, kn, spec.levels);
  t.experiment_id = spec.id;
  t.method = std::string(to_string(spec.refinement.mode));
  return t;
}

RecordPredicate record_at(std::vector<std::uint64_t> steps) {
  return [steps = std::move(steps)](std::uint64_t k) {
    return std::binary_search(steps.begin(), steps.end(), k);
  };
}

ExperimentResult run_refinement_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  const FeatureDictionary dict = dictionary_for(spec);
  const DiscretizedMeasure measure = build_measure(spec.measure);
  const SpectralGramian g_true = true_gramian(dict, measure, spec.refinement.spectral);
  const MixtureSampler sampler(dict, measure, spec.sampler);
  const auto when = record_at(record_steps(spec.refinement.k_max, spec.record_every));

  std::vector<RepTrace> reps(spec.repetitions);
  parallel_for(spec.repetitions, resolve_jobs(options.jobs), [&](std::size_t r) {
    reps[r].points = run_refinement(spec.refinement, sampler, g_true, repetition_rng(spec.seed, r), when);
  });

  const QuantileTrace trace = reduce_traces(spec, reps);
  std::vector<double> last;
  for (const auto& r : reps) last.push_back(r.points.back().gamma);
  std::ostringstream summary;
  summary << spec.id << ": median gamma " << format_double(median_of(last)) << " at step "
          << trace.steps.back() << " (kn = " << trace.kn.back() << ", " << spec.repetitions << " reps)";

  Collector out(options.output_dir);
  out.write(spec.id + ".csv", [&](std::ostream& os) { write_quantile_csv(os, trace); });
  write_rep_traces(out, spec.id + "_reps.csv", reps);
  write_manifest(out, spec, summary.str());
  return {spec.id, out.files(), summary.str()};
}

struct CDRep {
  std::vector<TracePoint> points;
  Matrix initial;
  SpectralGramian refined;
  double gamma_refined = 0.0;
  std::vector<double> f_d;
  double error = 0.0;
};

ExperimentResult run_cd_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  const CDSettings& cd = spec.cd;
  const FeatureDictionary dict = dictionary_for(spec);
  const DiscretizedMeasure measure = build_measure(spec.measure);
  const SpectralGramian g_true = true_gramian(dict, measure, spec.refinement.spectral);
  const MixtureSampler sampler(dict, measure, spec.sampler);
  const CDProblem problem = CDProblem::standard(cd.epsilon, cd.degree, cd.nx, cd.ny);

  auto steps = record_steps(spec.refinement.k_max, spec.record_every);
  if (!std::binary_search(steps.begin(), steps.end(), cd.refined_step)) {
    steps.insert(std::upper_bound(steps.begin(), steps.end(), cd.refined_step), cd.refined_step);
  }
  const auto when = record_at(steps);

  std::vector<CDRep> reps(spec.repetitions);
  parallel_for(spec.repetitions, resolve_jobs(options.jobs), [&](std::size_t r) {
    CDRep& rep = reps[r];
    rep.points = run_refinement(spec.refinement, sampler, g_true, repetition_rng(spec.seed, r), when,
                                [&](const RefinementState& state, const TracePoint& p) {
                                  if (p.step == 1) rep.initial = state.g_hat.matrix();
                                  if (p.step == cd.refined_step) {
                                    rep.refined = state.g_hat;
                                    rep.gamma_refined = p.gamma;
                                  }
                                });
    rep.f_d = cd_approximation(rep.refined, dict, problem);
    rep.error = max_cd_error(problem, rep.f_d);
  });

  const std::vector<double> f_exact = cd_approximation(g_true, dict, problem);
  const double error_exact = max_cd_error(problem, f_exact);
  std::vector<double> errors, gammas;
  for (const auto& r : reps) {
    errors.push_back(r.error);
    gammas.push_back(r.gamma_refined);
  }
  std::ostringstream summary;
  summary << spec.id << ": exact-G error " << format_double(error_exact) << ", median error at step "
          << cd.refined_step << ' ' << format_double(median_of(errors)) << ", median gamma "
          << format_double(median_of(gammas)) << " (" << spec.repetitions << " reps)";

  std::vector<RepTrace> traces;
  for (const auto& r : reps) traces.push_back({r.points});
  const QuantileTrace trace = reduce_traces(spec, traces);

  const auto xs = uniform_grid(cd.level_nx);
  const auto ys = uniform_grid(cd.level_ny);
  const SpectralOptions so = spec.refinement.spectral;

  Collector out(options.output_dir);
  out.write(spec.id + ".csv", [&](std::ostream& os) {
    os << "x,f_true,f_d_exact,f_d_refined\n";
    for (std::size_t i = 0; i < problem.x_grid.size(); ++i) {
      const double x = problem.x_grid[i];
      os << format_double(x) << ',' << format_double(target_f(problem, x)) << ','
         << format_double(f_exact[i]) << ',' << format_double(reps.front().f_d[i]) << '\n';
    }
  });
  out.write(spec.id + "_errors.csv", [&](std::ostream& os) {
    os << "rep,error_exact,error_refined,gamma_refined\n";
    for (std::size_t r = 0; r < reps.size(); ++r) {
      os << r << ',' << format_double(error_exact) << ',' << format_double(reps[r].error) << ','
         << format_double(reps[r].gamma_refined) << '\n';
    }
  });
  out.write(spec.id + "_gamma.csv", [&](std::ostream& os) { write_quantile_csv(os, trace); });
  write_rep_traces(out, spec.id + "_reps.csv", traces);
  out.write(spec.id + "_levels_init.csv", [&](std::ostream& os) {
    write_matrix_csv(os, christoffel_levels(sym_eig(reps.front().initial, so), dict, xs, ys));
  });
  out.write(spec.id + "_levels_refined.csv", [&](std::ostream& os) {
    write_matrix_csv(os, christoffel_levels(reps.front().refined, dict, xs, ys));
  });
  out.write(spec.id + "_levels_exact.csv", [&](std::ostream& os) {
    write_matrix_csv(os, christoffel_levels(g_true, dict, xs, ys));
  });
  write_manifest(out, spec, summary.str());
  return {spec.id, out.files(), summary.str()};
}

ExperimentResult run_regression_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  const RegressionStudyConfig& config = spec.regression;
  const std::size_t cells = config.n_grid.size() * config.repetitions;
  std::vector<std::vector<RegressionRecord>> results(cells);
  parallel_for(cells, resolve_jobs(options.jobs), [&](std::size_t i) {
    results[i] = regression_cell(config, config.n_grid[i / config.repetitions], i % config.repetitions);
  });
  std::vector<RegressionRecord> records;
  for (auto& cell : results) records.insert(records.end(), cell.begin(), cell.end());
  const auto traces = reduce_regression(config, records, spec.levels);

  std::ostringstream summary;
  summary << spec.id << ": " << config.targets.size() << " targets, " << config.n_grid.size()
          << " sample sizes, " << config.repetitions << " reps";

  Collector out(options.output_dir);
  out.write(spec.id + ".csv", [&](std::ostream& os) {
    os << "target,n,rep,method,rel_error\n";
    for (const auto& r : records) {
      os << to_string(r.target) << ',' << r.n << ',' << r.rep << ',' << r.method << ','
         << format_double(r.rel_error) << '\n';
    }
  });
  out.write(spec.id + "_quantiles.csv", [&](std::ostream& os) {
    os << "target,method,n,level,rel_error\n";
    for (const auto& t : traces) {
      for (std::size_t s = 0; s < t.steps.size(); ++s) {
        for (std::size_t l = 0; l < t.levels.size(); ++l) {
          os << t.experiment_id << ',' << t.method << ',' << t.steps[s] << ','
             << format_double(t.levels[l]) << ',' << format_double(t.quantiles[s][l]) << '\n';
        }
      }
    }
  });
  write_manifest(out, spec, summary.str());
  return {spec.id, out.files(), summary.str()};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  prepare_output_dir(options.output_dir);
  try {
    switch (spec.kind) {
      case ExperimentKind::Refinement: return run_refinement_experiment(spec, options);
      case ExperimentKind::ChristoffelDarboux: return run_cd_experiment(spec, options);
      case ExperimentKind::Regression: return run_regression_experiment(spec, options);
    }
  } catch (const fs::filesystem_error& e) {
    io_error(e.what());
  }
  throw Error(ErrorCode::ConfigError, "unknown experiment kind");
}

}  // namespace christoffel
