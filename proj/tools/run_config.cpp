#include "run_config.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

namespace ness::cli {

ModelParams RunConfig::model_params() const {
  ModelParams p = geometry == "channel" ? ModelParams::channel(coupling, beta, lambda)
                                        : ModelParams::darken(coupling, beta, field, lambda);
  if (phi_bar_left) p.phi_bar_left = *phi_bar_left;
  if (phi_bar_right) p.phi_bar_right = *phi_bar_right;
  return p;
}

SolverOptions RunConfig::solver_options() const { return {tol, max_iters}; }

SimulationConfig RunConfig::simulation_config() const {
  SimulationConfig s;
  s.dt = dt;
  s.n_steps = steps;
  s.burn_in = burn_in;
  s.seed = seed;
  s.thin = thin;
  s.batches = batches;
  s.integrator = integrator == "exact" ? Integrator::exact_ou : Integrator::euler_maruyama;
  return s;
}

ReservoirConfig RunConfig::reservoir_config() const {
  ReservoirConfig r;
  r.far_offset = far_offset;
  r.eps = eps;
  r.n_samples = samples;
  r.seed = seed;
  r.step_cap = step_cap;
  r.threads = threads;
  return r;
}

void RunConfig::validate() const {
  const auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    fail("unknown or missing command '" + command + "'");
  if (!preset.empty() && std::find(kPresets.begin(), kPresets.end(), preset) == kPresets.end())
    fail("unknown preset '" + preset + "'");
  if (geometry != "darken" && geometry != "channel") fail("geometry must be darken or channel");
  if (n < 1) fail("n must be >= 1");
  if (m < 0) fail("m must be >= 0");
  if (n_values.empty()) fail("n_values must not be empty");
  for (int v : n_values)
    if (v < 1) fail("every entry of n_values must be >= 1");
  if (command == "reservoir" && sweep && m_values.size() != n_values.size())
    fail("m_values must pair with n_values");
  for (int v : m_values)
    if (v < 0) fail("every entry of m_values must be >= 0");
  if (integrator != "euler" && integrator != "exact") fail("integrator must be euler or exact");
  if (!(tol > 0.0)) fail("tol must be > 0");
  if (max_iters < 0) fail("max_iters must be >= 0");
  if (x_min > x_max) fail("x_min must be <= x_max");
  if (n_max < 1) fail("n_max must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
  if (out.empty()) fail("out must name a directory");
  try {
    ModelParams p = model_params();
    p.validate();
    simulation_config().validate();
    if (command == "reservoir") reservoir_config().validate(m);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

void apply_preset(RunConfig& c, const std::string& preset) {
  c.preset = preset;
  if (preset == "small") {
    c.geometry = "darken";
    c.n = 1;
    c.coupling = 1.0;
    c.beta = 1.0;
    c.field = -1.0;
    c.lambda = 1.0;
    c.dt = 1e-3;
    c.steps = 2'000'000;
    c.burn_in = 500'000;
  } else if (preset == "scaling") {
    c.n_values = {4, 8, 16};
    c.m_values = {2, 2, 2};
    c.lambda = 1.0;
    c.field = -1.0;
    c.sweep = true;
  } else if (!preset.empty()) {
    throw ConfigError("unknown preset '" + preset + "'");
  }
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json cfg{
      {"command", c.command},     {"preset", c.preset},       {"geometry", c.geometry},
      {"n", c.n},                 {"m", c.m},                 {"n_values", c.n_values},
      {"m_values", c.m_values},   {"coupling", c.coupling},   {"beta", c.beta},
      {"field", c.field},         {"lambda", c.lambda},       {"tol", c.tol},
      {"max_iters", c.max_iters}, {"dt", c.dt},               {"steps", c.steps},
      {"burn_in", c.burn_in},     {"thin", c.thin},           {"batches", c.batches},
      {"integrator", c.integrator}, {"samples", c.samples},   {"far_offset", c.far_offset},
      {"eps", c.eps},             {"step_cap", c.step_cap},   {"sweep", c.sweep},
      {"x_min", c.x_min},         {"x_max", c.x_max},         {"n_max", c.n_max},
      {"seed", c.seed},           {"threads", c.threads},     {"out", c.out},
  };
  cfg["phi_bar_left"] = c.phi_bar_left ? nlohmann::json(*c.phi_bar_left) : nlohmann::json(nullptr);
  cfg["phi_bar_right"] = c.phi_bar_right ? nlohmann::json(*c.phi_bar_right) : nlohmann::json(nullptr);
  return {{"manifest_version", kManifestVersion}, {"config", cfg}};
}

RunConfig from_json(const nlohmann::json& manifest) {
  try {
    if (manifest.at("manifest_version").get<int>() != kManifestVersion)
      throw ConfigError("unsupported manifest_version");
    const auto& cfg = manifest.at("config");
    RunConfig c;
    RunConfig reference;
    const auto known = to_json(reference).at("config");
    for (const auto& [key, value] : cfg.items())
      if (!known.contains(key)) throw ConfigError("unknown manifest key '" + key + "'");
    const auto get = [&](const char* key, auto& field) {
      if (cfg.contains(key)) cfg.at(key).get_to(field);
    };
    get("command", c.command);
    get("preset", c.preset);
    get("geometry", c.geometry);
    get("n", c.n);
    get("m", c.m);
    get("n_values", c.n_values);
    get("m_values", c.m_values);
    get("coupling", c.coupling);
    get("beta", c.beta);
    get("field", c.field);
    get("lambda", c.lambda);
    get("tol", c.tol);
    get("max_iters", c.max_iters);
    get("dt", c.dt);
    get("steps", c.steps);
    get("burn_in", c.burn_in);
    get("thin", c.thin);
    get("batches", c.batches);
    get("integrator", c.integrator);
    get("samples", c.samples);
    get("far_offset", c.far_offset);
    get("eps", c.eps);
    get("step_cap", c.step_cap);
    get("sweep", c.sweep);
    get("x_min", c.x_min);
    get("x_max", c.x_max);
    get("n_max", c.n_max);
    get("seed", c.seed);
    get("threads", c.threads);
    get("out", c.out);
    for (const auto& [key, target] : {std::pair{"phi_bar_left", &c.phi_bar_left}, {"phi_bar_right", &c.phi_bar_right}})
      if (cfg.contains(key) && !cfg.at(key).is_null()) *target = cfg.at(key).get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

namespace {

struct Sources {
  std::string preset;
  std::string manifest;
};

void bind(CLI::App& app, RunConfig& c, Sources& s) {
  app.set_config("--config", "", "key=value configuration file (flags take precedence)");
  app.add_option("--preset", s.preset, "Experiment preset: small | scaling");
  app.add_option("--manifest", s.manifest, "Rerun from a manifest.json written by a previous run");

  app.add_option("--geometry", c.geometry, "darken | channel")->capture_default_str();
  app.add_option("--n", c.n, "Size parameter N")->capture_default_str();
  app.add_option("--m", c.m, "Channel half-width M")->capture_default_str();
  app.add_option("--n-values", c.n_values, "N values for sweeps")->delimiter(',')->capture_default_str();
  app.add_option("--m-values", c.m_values, "Channel M per sweep entry")->delimiter(',')->capture_default_str();

  app.add_option("--coupling,-J", c.coupling, "Coupling J > 0")->capture_default_str();
  app.add_option("--beta", c.beta, "Inverse temperature")->capture_default_str();
  app.add_option("--field", c.field, "Bulk field h <= 0 on x1 < 0")->capture_default_str();
  app.add_option("--lambda", c.lambda, "Boundary chemical potential amplitude")->capture_default_str();
  app.add_option_function<double>(
      "--phi-bar-left", [&c](const double& v) { c.phi_bar_left = v; }, "Left reservoir value override");
  app.add_option_function<double>(
      "--phi-bar-right", [&c](const double& v) { c.phi_bar_right = v; }, "Right reservoir value override");

  app.add_option("--tol", c.tol, "Solver tolerance")->capture_default_str();
  app.add_option("--max-iters", c.max_iters, "Solver iteration cap (0 = automatic)")->capture_default_str();

  app.add_option("--dt", c.dt, "Time step")->capture_default_str();
  app.add_option("--steps", c.steps, "Number of time steps")->capture_default_str();
  app.add_option("--burn-in", c.burn_in, "Steps discarded before sampling")->capture_default_str();
  app.add_option("--thin", c.thin, "Sample every k-th step")->capture_default_str();
  app.add_option("--batches", c.batches, "Batches for batch-means errors")->capture_default_str();
  app.add_option("--integrator", c.integrator, "euler | exact")->capture_default_str();

  app.add_option("--samples", c.samples, "Walks per site")->capture_default_str();
  app.add_option("--far-offset", c.far_offset, "Far-plane offset R (0 = automatic)")->capture_default_str();
  app.add_option("--eps", c.eps, "Exponent margin in R = M^(2+eps)")->capture_default_str();
  app.add_option("--step-cap", c.step_cap, "Per-walk step cap")->capture_default_str();
  app.add_flag("--sweep", c.sweep, "Reservoir: sweep over n-values/m-values");

  app.add_option("--x-min", c.x_min, "Junction table start")->capture_default_str();
  app.add_option("--x-max", c.x_max, "Junction table end")->capture_default_str();
  app.add_option("--n-max", c.n_max, "Junction series truncation")->capture_default_str();

  app.add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app.add_option("--threads", c.threads, "Worker cap; results do not depend on it")->capture_default_str();
  app.add_option("--out", c.out, "Output directory")->capture_default_str();

  app.require_subcommand(0, 1);
  app.add_subcommand("solve", "Stationary profile, currents and covariance samples")->fallthrough();
  app.add_subcommand("junction", "Infinite-volume junction layer table")->fallthrough();
  app.add_subcommand("simulate", "Langevin trace cross-check")->fallthrough();
  app.add_subcommand("reservoir", "Random-walk estimate of the channel harmonic function")->fallthrough();
  app.add_subcommand("fick", "Scaling table over N")->fallthrough();
}

std::string chosen_subcommand(const CLI::App& app) {
  for (const auto* sub : app.get_subcommands()) return sub->get_name();
  return {};
}

}  // namespace

ParseOutcome parse_command_line(int argc, const char* const* argv) {
  // Pass one only locates the preset and manifest.
  RunConfig scratch;
  Sources sources;
  {
    CLI::App app{"Quadratic Ginzburg-Landau lattice steady states", "ness"};
    bind(app, scratch, sources);
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return {std::nullopt, code == 0 ? kExitOk : kExitConfig};
    }
  }

  RunConfig base;
  if (!sources.manifest.empty()) {
    std::ifstream in(sources.manifest);
    if (!in) throw ConfigError("cannot open manifest " + sources.manifest);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
    }
    base = from_json(j);
    if (!sources.preset.empty() && sources.preset != base.preset)
      throw ConfigError("--preset conflicts with the manifest's preset");
  } else if (!sources.preset.empty()) {
    apply_preset(base, sources.preset);
  }

  Sources ignored;
  CLI::App app{"Quadratic Ginzburg-Landau lattice steady states", "ness"};
  bind(app, base, ignored);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return {std::nullopt, app.exit(e) == 0 ? kExitOk : kExitConfig};
  }
  if (const std::string sub = chosen_subcommand(app); !sub.empty()) base.command = sub;
  base.preset = sources.preset.empty() ? base.preset : sources.preset;
  base.validate();
  return {base, kExitOk};
}

}  // namespace ness::cli
