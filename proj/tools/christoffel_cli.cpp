#include <cstdio>
#include <cstring>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "christoffel/christoffel.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 1, kIO = 2, kFailure = 3 };

int exit_code(chr_status s) {
  switch (s) {
    case CHR_OK: return kOk;
    case CHR_CONFIG:
    case CHR_UNKNOWN_PRESET:
    case CHR_INVALID_ARGUMENT: return kConfig;
    case CHR_IO: return kIO;
    default: return kFailure;
  }
}

int report(chr_status s) {
  if (s != CHR_OK) std::cerr << "error: " << chr_status_string(s) << ": " << chr_last_error() << '\n';
  return exit_code(s);
}

// %.17g, with ".0" appended to integral values.
std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eni") == std::string::npos) s += ".0";
  return s;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> k_max;
  unsigned jobs = 0;
  std::string out = ".";
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Base seed (repetition r uses seed xor r)");
  cmd->add_option("--reps", o.reps, "Number of repetitions")->check(CLI::PositiveNumber);
  cmd->add_option("--k-max", o.k_max, "Number of refinement steps")->check(CLI::PositiveNumber);
  cmd->add_option("--jobs", o.jobs, "Worker threads (default: CHRISTOFFEL_JOBS or all cores)");
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
}

int run(chr_experiment* e, const Overrides& o) {
  chr_status s = CHR_OK;
  if (o.seed) s = chr_experiment_set_seed(e, *o.seed);
  if (s == CHR_OK && o.reps) s = chr_experiment_set_repetitions(e, *o.reps);
  if (s == CHR_OK && o.k_max) s = chr_experiment_set_k_max(e, *o.k_max);
  if (s == CHR_OK) s = chr_experiment_set_jobs(e, o.jobs);
  if (s == CHR_OK) s = chr_experiment_set_output_dir(e, o.out.c_str());
  if (s == CHR_OK) s = chr_experiment_run(e);
  if (s == CHR_OK) {
    const char* summary = "";
    chr_experiment_summary(e, &summary);
    std::cout << summary << '\n';
  }
  chr_experiment_destroy(e);
  return report(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative refinement of Christoffel sampling measures"};
  app.set_version_flag("--version", std::string(chr_version()));
  app.require_subcommand(1);

  Overrides run_opts, preset_opts;
  std::string config_path, preset_name;
  auto* run_cmd = app.add_subcommand("run", "Run the experiments of a JSON configuration");
  run_cmd->add_option("config", config_path, "Configuration file")->required();
  add_overrides(run_cmd, run_opts);

  auto* preset_cmd = app.add_subcommand("preset", "Run a built-in preset (see list-presets)");
  preset_cmd->add_option("name", preset_name, "Preset group or experiment id")->required();
  add_overrides(preset_cmd, preset_opts);

  double d = 0, p = 0, kn = 0;
  auto* bound_cmd = app.add_subcommand("bound", "Print the gamma bound for kn samples");
  bound_cmd->add_option("--d", d, "Dimension of the dictionary span")->required();
  bound_cmd->add_option("--p", p, "Probability level in (0, 1)")->required();
  bound_cmd->add_option("--kn", kn, "Cumulative sample count")->required();

  auto* list_cmd = app.add_subcommand("list-presets", "List the built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  if (*run_cmd) {
    chr_experiment* e = nullptr;
    const chr_status s = chr_experiment_from_file(config_path.c_str(), &e);
    if (s != CHR_OK) return report(s);
    return run(e, run_opts);
  }
  if (*preset_cmd) {
    chr_experiment* e = nullptr;
    const chr_status s = chr_experiment_from_preset(preset_name.c_str(), &e);
    if (s != CHR_OK) return report(s);
    return run(e, preset_opts);
  }
  if (*bound_cmd) {
    double value = 0;
    const chr_status s = chr_gamma_bound(kn, d, p, &value);
    if (s != CHR_OK) return report(s);
    std::cout << format_number(value) << '\n';
    return kOk;
  }
  if (*list_cmd) {
    for (std::size_t i = 0; i < chr_preset_count(); ++i) {
      const char* name = "";
      const char* description = "";
      chr_preset_name(i, &name);
      chr_preset_description(i, &description);
      std::printf("%-18s %s\n", name, description);
    }
    return kOk;
  }
  return kUsage;
}
