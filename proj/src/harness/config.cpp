#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "christoffel/errors.hpp"
#include "christoffel/harness.hpp"
#include "json.hpp"

namespace christoffel {

using json = nlohmann::ordered_json;

std::string_view to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::Refinement: return "refinement";
    case ExperimentKind::ChristoffelDarboux: return "cd";
    case ExperimentKind::Regression: return "weighted_ls";
  }
  return "unknown";
}

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

template <typename E, std::size_t N>
E enum_from(std::string_view name, const std::array<E, N>& values, const char* what) {
  for (E v : values) {
    if (to_string(v) == name) return v;
  }
  config_error(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

constexpr std::array kKinds{ExperimentKind::Refinement, ExperimentKind::ChristoffelDarboux,
                            ExperimentKind::Regression};
constexpr std::array kFamilies{Family::Hermite, Family::Monomial, Family::RandomMixed,
                               Family::Step, Family::BivariateMonomial, Family::Legendre};
constexpr std::array kMeasures{MeasureKind::GaussianTruncated, MeasureKind::Uniform01,
                               MeasureKind::UniformSym, MeasureKind::GraphOfF};
constexpr std::array kModes{Mode::ExactWeights, Mode::EstimatedWeights, Mode::NaiveMC};
constexpr std::array kPolicies{JPolicy::Zero, JPolicy::ScaledIdentity, JPolicy::ScaledSelf};
constexpr std::array kSamplers{SamplerKind::Auto, SamplerKind::Prefix, SamplerKind::Grid};

// Reads typed fields from a JSON object and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) config_error(where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      config_error(where_ + "." + key + ": " + e.what());
    }
  }

  void mark(const char* key) { seen_.insert(key); }

  bool has(const char* key) const { return j_.contains(key); }

  const json& child(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) config_error(where_ + ": unknown key '" + item.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

DictionarySpec dictionary_from(const json& j, std::optional<std::uint64_t>& seed) {
  Reader r(j, "dictionary");
  DictionarySpec d;
  std::string family = std::string(to_string(d.family));
  r.get("family", family);
  d.family = enum_from(family, kFamilies, "dictionary family");
  r.get("dimension", d.dimension);
  r.get("mixed_rows", d.mixed_rows);
  r.get("mixed_degree", d.mixed_degree);
  r.get("breakpoints", d.breakpoints);
  r.get("dyadic_levels", d.dyadic_levels);
  r.get("per_axis_degree", d.per_axis_degree);
  if (r.has("seed")) {
    std::uint64_t s = 0;
    r.get("seed", s);
    seed = s;
  }
  r.finish();
  return d;
}

MeasureSpec measure_from(const json& j) {
  Reader r(j, "measure");
  MeasureSpec m;
  std::string kind = std::string(to_string(m.kind));
  r.get("kind", kind);
  m.kind = enum_from(kind, kMeasures, "measure kind");
  r.get("grid_size", m.grid_size);
  r.get("radius", m.radius);
  r.get("graph_epsilon", m.graph_epsilon);
  r.finish();
  return m;
}

CDSettings cd_from(const json& j) {
  Reader r(j, "cd");
  CDSettings c;
  r.get("epsilon", c.epsilon);
  r.get("degree", c.degree);
  r.get("nx", c.nx);
  r.get("ny", c.ny);
  r.get("level_nx", c.level_nx);
  r.get("level_ny", c.level_ny);
  r.get("refined_step", c.refined_step);
  r.finish();
  return c;
}

RegressionStudyConfig regression_from(const json& j) {
  Reader r(j, "regression");
  RegressionStudyConfig c;
  r.get("n_grid", c.n_grid);
  r.get("degree", c.degree);
  if (r.has("targets")) {
    std::vector<std::string> names;
    r.get("targets", names);
    c.targets.clear();
    for (const auto& n : names) {
      try {
        c.targets.push_back(target_from_string(n));
      } catch (const Error& e) {
        config_error(std::string("regression.targets: ") + e.what());
      }
    }
  }
  r.get("cap", c.weights.cap);
  r.get("max_iterations", c.weights.max_iterations);
  r.get("stall_tolerance", c.weights.stall_tolerance);
  r.get("patience", c.weights.patience);
  r.finish();
  return c;
}

ExperimentSpec spec_from(const json& j) {
  Reader r(j, "experiment");
  ExperimentSpec s;
  r.get("id", s.id);
  std::string kind = std::string(to_string(s.kind));
  r.get("kind", kind);
  s.kind = enum_from(kind, kKinds, "experiment kind");
  if (r.has("dictionary")) s.dictionary = dictionary_from(r.child("dictionary"), s.dictionary_seed);
  if (r.has("measure")) s.measure = measure_from(r.child("measure"));
  std::string sampler = std::string(to_string(s.sampler));
  r.get("sampler", sampler);
  s.sampler = enum_from(sampler, kSamplers, "sampler");

  auto& c = s.refinement;
  std::string mode = std::string(to_string(c.mode));
  std::string policy = std::string(to_string(c.j_policy));
  r.get("mode", mode);
  r.get("j_policy", policy);
  c.mode = enum_from(mode, kModes, "mode");
  c.j_policy = enum_from(policy, kPolicies, "j_policy");
  r.get("n", c.n);
  r.get("m", c.m);
  r.get("k_max", c.k_max);
  r.get("floor_epsilon", c.spectral.floor_epsilon);
  r.get("rank_tolerance", c.spectral.rank_tolerance);
  if (r.has("min_eig_scale") && !j.at("min_eig_scale").is_null()) {
    double scale = 1.0;
    r.get("min_eig_scale", scale);
    c.min_eig = MinEigSchedule{scale};
  } else {
    r.mark("min_eig_scale");
  }
  r.get("pin_b1", c.pin_b1);

  r.get("repetitions", s.repetitions);
  r.get("seed", s.seed);
  r.get("record_every", s.record_every);
  r.get("levels", s.levels);
  if (r.has("cd")) s.cd = cd_from(r.child("cd"));
  if (r.has("regression")) s.regression = regression_from(r.child("regression"));
  r.finish();
  s.regression.repetitions = s.repetitions;
  s.regression.seed = s.seed;
  s.validate();
  return s;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (id.empty()) config_error("experiment id is empty");
  for (char ch : id) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.')) {
      config_error("experiment id '" + id + "' is not filesystem-safe");
    }
  }
  if (id.front() == '.') config_error("experiment id may not start with '.'");
  if (repetitions == 0) config_error(id + ": repetitions must be >= 1");
  if (levels.empty()) config_error(id + ": no quantile levels");
  for (double l : levels) {
    if (!(l >= 0.0 && l <= 1.0)) config_error(id + ": quantile levels must lie in [0, 1]");
  }
  try {
    refinement.validate();
    if (kind == ExperimentKind::ChristoffelDarboux) {
      if (dictionary.family != Family::BivariateMonomial || measure.kind != MeasureKind::GraphOfF) {
        config_error(id + ": cd experiments need a bivariate_monomial dictionary and the graph measure");
      }
      if (cd.degree != dictionary.per_axis_degree) {
        config_error(id + ": cd.degree differs from dictionary.per_axis_degree");
      }
      if (cd.refined_step == 0 || cd.refined_step > refinement.k_max) {
        config_error(id + ": cd.refined_step must lie in [1, k_max]");
      }
      if (cd.nx == 0 || cd.ny == 0 || cd.level_nx == 0 || cd.level_ny == 0) {
        config_error(id + ": cd grids must be nonempty");
      }
      CDProblem::standard(cd.epsilon, cd.degree, cd.nx, cd.ny).validate();
    }
    if (kind == ExperimentKind::Regression) regression.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_error(id + ": " + e.what());
  }
}

std::vector<std::uint64_t> record_steps(std::uint64_t k_max, std::uint64_t record_every) {
  std::vector<std::uint64_t> out;
  if (k_max == 0) return out;
  if (record_every == 0) {
    for (std::uint64_t decade = 1; decade <= k_max; decade *= 10) {
      for (std::uint64_t m = 1; m <= 9; ++m) {
        const std::uint64_t k = m * decade;
        if (k > k_max) break;
        if (decade > 1 && m == 1) continue;  // already emitted as 10 * previous decade
        out.push_back(k);
      }
      out.push_back(10 * decade);
      if (decade > k_max / 10) break;
    }
    while (!out.empty() && out.back() > k_max) out.pop_back();
  } else {
    out.push_back(1);
    for (std::uint64_t k = record_every; k <= k_max; k += record_every) {
      if (k != 1) out.push_back(k);
    }
  }
  if (out.empty() || out.back() != k_max) out.push_back(k_max);
  return out;
}

std::vector<ExperimentSpec> parse_experiments(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  std::vector<ExperimentSpec> out;
  const json* list = &j;
  if (j.is_object() && j.contains("experiments")) {
    if (j.size() != 1) config_error("top level: only 'experiments' may appear next to the list");
    list = &j.at("experiments");
  }
  if (list->is_array()) {
    for (const auto& e : *list) out.push_back(spec_from(e));
  } else {
    out.push_back(spec_from(*list));
  }
  if (out.empty()) config_error("no experiments in configuration");
  std::set<std::string> ids;
  for (const auto& s : out) {
    if (!ids.insert(s.id).second) config_error("duplicate experiment id '" + s.id + "'");
  }
  return out;
}

std::vector<ExperimentSpec> load_experiments(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) config_error("cannot read configuration '" + file.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiments(buf.str());
}

std::string to_json(const ExperimentSpec& s) {
  json d;
  d["family"] = to_string(s.dictionary.family);
  d["dimension"] = s.dictionary.dimension;
  d["mixed_rows"] = s.dictionary.mixed_rows;
  d["mixed_degree"] = s.dictionary.mixed_degree;
  d["breakpoints"] = s.dictionary.breakpoints;
  d["dyadic_levels"] = s.dictionary.dyadic_levels;
  d["per_axis_degree"] = s.dictionary.per_axis_degree;
  d["seed"] = s.dictionary_seed.value_or(s.seed);

  json m;
  m["kind"] = to_string(s.measure.kind);
  m["grid_size"] = s.measure.grid_size == 0 ? default_grid_size(s.measure.kind) : s.measure.grid_size;
  m["radius"] = s.measure.radius;
  m["graph_epsilon"] = s.measure.graph_epsilon;

  json j;
  j["id"] = s.id;
  j["kind"] = to_string(s.kind);
  j["dictionary"] = d;
  j["measure"] = m;
  j["sampler"] = to_string(s.sampler);
  const auto& c = s.refinement;
  j["mode"] = to_string(c.mode);
  j["j_policy"] = to_string(c.j_policy);
  j["n"] = c.n;
  j["m"] = c.m;
  j["k_max"] = c.k_max;
  j["floor_epsilon"] = c.spectral.floor_epsilon;
  j["rank_tolerance"] = c.spectral.rank_tolerance;
  j["min_eig_scale"] = c.min_eig ? json(c.min_eig->scale) : json(nullptr);
  j["pin_b1"] = c.pin_b1;
  j["repetitions"] = s.repetitions;
  j["seed"] = s.seed;
  j["record_every"] = s.record_every;
  j["levels"] = s.levels;
  if (s.kind == ExperimentKind::ChristoffelDarboux) {
    j["cd"] = {{"epsilon", s.cd.epsilon},   {"degree", s.cd.degree},
               {"nx", s.cd.nx},             {"ny", s.cd.ny},
               {"level_nx", s.cd.level_nx}, {"level_ny", s.cd.level_ny},
               {"refined_step", s.cd.refined_step}};
  }
  if (s.kind == ExperimentKind::Regression) {
    std::vector<std::string> targets;
    for (Target t : s.regression.targets) targets.emplace_back(to_string(t));
    j["regression"] = {{"n_grid", s.regression.n_grid},
                       {"degree", s.regression.degree},
                       {"targets", targets},
                       {"cap", s.regression.weights.cap},
                       {"max_iterations", s.regression.weights.max_iterations},
                       {"stall_tolerance", s.regression.weights.stall_tolerance},
                       {"patience", s.regression.weights.patience}};
  }
  return j.dump(2);
}

std::size_t large_sample_size(double d) {
  return static_cast<std::size_t>(std::ceil(4.0 * d * std::log(4.0 * d)));
}

namespace {

ExperimentSpec refinement_spec(std::string id, DictionarySpec dict, MeasureSpec measure, Mode mode,
                               std::size_t n, std::uint64_t k_max) {
  ExperimentSpec s;
  s.id = std::move(id);
  s.dictionary = std::move(dict);
  s.measure = measure;
  s.refinement.mode = mode;
  s.refinement.n = n;
  s.refinement.k_max = k_max;
  return s;
}

// Exact weights against naive Monte Carlo at n = 1 and n = 4 d ln(4 d).
std::vector<ExperimentSpec> sample_size_study(const std::string& stem, const DictionarySpec& dict,
                                              const MeasureSpec& measure, double d) {
  std::vector<ExperimentSpec> out;
  for (std::size_t n : {std::size_t{1}, large_sample_size(d)}) {
    const std::string tag = stem + "-n" + std::to_string(n);
    out.push_back(refinement_spec(tag + "-exact", dict, measure, Mode::ExactWeights, n, 10000));
    out.push_back(refinement_spec(tag + "-mc", dict, measure, Mode::NaiveMC, n, 10000));
  }
  return out;
}

// Estimated weights, n = 1, m in {1, 100}, every J policy, plus naive MC.
std::vector<ExperimentSpec> estimated_study(const std::string& stem, const DictionarySpec& dict,
                                            const MeasureSpec& measure) {
  std::vector<ExperimentSpec> out;
  for (std::size_t m : {std::size_t{1}, std::size_t{100}}) {
    for (JPolicy policy : kPolicies) {
      auto s = refinement_spec(stem + "-m" + std::to_string(m) + "-" + std::string(to_string(policy)),
                               dict, measure, Mode::EstimatedWeights, 1, 10000);
      s.refinement.m = m;
      s.refinement.j_policy = policy;
      out.push_back(std::move(s));
    }
  }
  out.push_back(refinement_spec(stem + "-mc", dict, measure, Mode::NaiveMC, 1, 10000));
  return out;
}

}  // namespace

const std::vector<PresetInfo>& presets() {
  static const std::vector<PresetInfo> list{
      {"hermite", "Hermite D=8, Gaussian: exact weights vs naive MC, n = 1 and 111"},
      {"random-poly", "16 random polynomials of degree < 8, Gaussian: exact weights vs naive MC, n = 1 and 111"},
      {"step", "18 step functions, uniform[0,1]: exact weights vs naive MC, n = 1 and 308"},
      {"hermite-estimated", "Hermite D=8: estimated weights, n = 1, m in {1,100}, all J policies, naive MC"},
      {"random-estimated", "random polynomials D=16: estimated weights, n = 1, m in {1,100}, all J policies, naive MC"},
      {"step-estimated", "step functions D=18: estimated weights, n = 1, m in {1,100}, all J policies, naive MC"},
      {"cd", "Christoffel-Darboux recovery of f_eps from exact and refined moment matrices"},
      {"weighted-ls", "Legendre d=10 regression: naive vs optimally weighted least squares"},
  };
  return list;
}

namespace {

std::vector<ExperimentSpec> preset_group(std::string_view name) {
  const auto hermite = DictionarySpec::hermite(8);
  const auto mixed = DictionarySpec::random_mixed(16, 8);
  const auto step = DictionarySpec::step_dyadic(17);
  const auto gauss = MeasureSpec::gaussian();
  const auto unit = MeasureSpec::uniform01();
  if (name == "hermite") return sample_size_study("hermite", hermite, gauss, 8);
  if (name == "random-poly") return sample_size_study("random-poly", mixed, gauss, 8);
  if (name == "step") return sample_size_study("step", step, unit, 18);
  if (name == "hermite-estimated") return estimated_study("hermite-estimated", hermite, gauss);
  if (name == "random-estimated") return estimated_study("random-estimated", mixed, gauss);
  if (name == "step-estimated") return estimated_study("step-estimated", step, unit);
  if (name == "cd") {
    ExperimentSpec s = refinement_spec("cd", DictionarySpec::bivariate_monomial(8), MeasureSpec::graph(),
                                       Mode::ExactWeights, 1, 100);
    s.kind = ExperimentKind::ChristoffelDarboux;
    return {s};
  }
  if (name == "weighted-ls") {
    ExperimentSpec s;
    s.id = "weighted-ls";
    s.kind = ExperimentKind::Regression;
    s.dictionary = DictionarySpec::legendre(10);
    s.measure = MeasureSpec::uniform_sym();
    return {s};
  }
  return {};
}

}  // namespace

std::vector<ExperimentSpec> preset(std::string_view name) {
  auto group = preset_group(name);
  if (!group.empty()) return group;
  // A single member of a group, e.g. "hermite-n1-exact".
  for (const auto& info : presets()) {
    for (auto& spec : preset_group(info.name)) {
      if (spec.id == name) return {spec};
    }
  }
  config_error("unknown preset '" + std::string(name) + "'");
}

}  // namespace christoffel
