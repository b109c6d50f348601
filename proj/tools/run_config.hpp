#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ness/dynamics.hpp"
#include "ness/model.hpp"
#include "ness/reservoirs.hpp"
#include "ness/solver.hpp"

namespace ness::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitStatistical = 4;

inline constexpr int kManifestVersion = 1;

/// Fully resolved configuration of one run. Every field has a flag of the same name with
/// underscores replaced by dashes, and the same key in config files and manifests.
struct RunConfig {
  std::string command;
  std::string preset;

  std::string geometry = "darken";
  int n = 4;
  int m = 1;
  std::vector<int> n_values{4, 8, 16};
  std::vector<int> m_values{2, 2, 2};  // channel widths paired with n_values

  double coupling = 1.0;
  double beta = 1.0;
  double field = -1.0;
  double lambda = 0.5;
  std::optional<double> phi_bar_left;   // default lambda + h (darken) or 0 (channel)
  std::optional<double> phi_bar_right;  // default -lambda (darken) or 0 (channel)

  double tol = 1e-12;
  long max_iters = 0;

  double dt = 1e-3;
  long steps = 100000;
  long burn_in = 10000;
  long thin = 1;
  int batches = 30;
  std::string integrator = "euler";

  long samples = 20000;
  int far_offset = 0;
  double eps = 0.1;
  long step_cap = 10'000'000;
  bool sweep = false;

  int x_min = -10;
  int x_max = 10;
  int n_max = 60;

  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "out";

  [[nodiscard]] ModelParams model_params() const;
  [[nodiscard]] SolverOptions solver_options() const;
  [[nodiscard]] SimulationConfig simulation_config() const;
  [[nodiscard]] ReservoirConfig reservoir_config() const;

  /// Throws std::invalid_argument on any inconsistent field.
  void validate() const;
};

inline const std::vector<std::string> kCommands{"solve", "junction", "simulate", "reservoir", "fick"};
inline const std::vector<std::string> kPresets{"small", "scaling"};

void apply_preset(RunConfig& config, const std::string& preset);

nlohmann::json to_json(const RunConfig& config);
/// Unknown keys are rejected.
RunConfig from_json(const nlohmann::json& manifest);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ParseOutcome {
  std::optional<RunConfig> config;  // empty when help was printed
  int exit_code = kExitOk;
};

/// Precedence, lowest first: defaults, --preset, --manifest, --config file, flags.
ParseOutcome parse_command_line(int argc, const char* const* argv);

}  // namespace ness::cli
