#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <set>

#include "ness/junction.hpp"
#include "output.hpp"

namespace ness::cli {

namespace fs = std::filesystem;

namespace {

fs::path prepare(const RunConfig& c) {
  const fs::path dir(c.out);
  fs::create_directories(dir);
  write_json(dir / "manifest.json", to_json(c));
  return dir;
}

DomainPtr make_domain(const RunConfig& c) {
  if (c.geometry == "channel") {
    if (channel_scale_warning(c.n, c.m))
      std::cerr << "warning: channel M=" << c.m << " is not below sqrt(N) for N=" << c.n << "\n";
    return share(LatticeDomain::channel(c.n, c.m));
  }
  return share(LatticeDomain::darken(c.n));
}

double solver_residual(const GaussianSteadyState<double>& st) {
  return (st.model().apply_precision(st.mean().values()) - st.model().linear_field()).cwiseAbs().maxCoeff();
}

// Bond current predicted by the tilt: tilt(x) - tilt(y).
double tilt_drop(const QuadraticModel<double>& model, const Bond& b) { return model.tilt()(b.from) - model.tilt()(b.to); }

// Half-width of the junction window excluded from Fick comparisons.
int junction_halfwidth(double coupling) { return static_cast<int>(std::ceil(3.0 / solve_gamma(coupling))); }

}  // namespace

int cmd_solve(const RunConfig& c) {
  const fs::path dir = prepare(c);
  const DomainPtr dom = make_domain(c);
  const auto model = assemble<double>(dom, c.model_params());
  const auto st = stationary_mean(model, c.solver_options());

  {
    CsvWriter csv(dir / "profile.csv", {"x1", "x2", "x3", "m", "tilt", "field"});
    for (Index i = 0; i < dom->size(); ++i) {
      const Site& x = dom->site(i);
      csv.row(x.x1, x.x2, x.x3, st.mean()(i), model.tilt()(i), model.field()(i));
    }
  }

  const Vector<double> currents = bond_currents(st);
  double e1_dev = 0.0;
  double transverse_max = 0.0;
  {
    CsvWriter csv(dir / "currents.csv", {"x1", "x2", "x3", "dx", "dy", "dz", "current"});
    for (std::size_t k = 0; k < dom->bonds().size(); ++k) {
      const Bond& b = dom->bonds()[k];
      const Site& x = dom->site(b.from);
      const Site& e = kUnitSteps[static_cast<std::size_t>(2 * b.axis)];
      const double j = currents(static_cast<Index>(k));
      csv.row(x.x1, x.x2, x.x3, e.x1, e.x2, e.x3, j);
      if (b.axis == 0)
        e1_dev = std::max(e1_dev, std::abs(j - tilt_drop(model, b)));
      else
        transverse_max = std::max(transverse_max, std::abs(j));
    }
  }

  // Covariance rows at a few axis sites; full rows cost one Neumann solve each.
  double row_sum_max = -std::numeric_limits<double>::infinity();
  {
    CsvWriter csv(dir / "covariance.csv", {"x1", "x2", "x3", "y1", "y2", "y3", "covariance"});
    const std::set<int> probes{dom->x1_min(), -1, 0, dom->x1_max()};
    for (int x1 : probes) {
      if (x1 < dom->x1_min() || x1 > dom->x1_max()) continue;
      const Index i = dom->axis_index(x1);
      const Vector<double> row = st.covariance_row(i);
      row_sum_max = std::max(row_sum_max, row.sum());
      const Site& x = dom->site(i);
      csv.row(x.x1, x.x2, x.x3, x.x1, x.x2, x.x3, row(i));
      for (const Neighbor& nb : dom->neighbors(x)) {
        if (nb.kind != NeighborKind::core) continue;
        csv.row(x.x1, x.x2, x.x3, nb.site.x1, nb.site.x2, nb.site.x3, row(dom->index(nb.site)));
      }
    }
  }

  double section_min = std::numeric_limits<double>::infinity();
  double section_max = -section_min;
  double fick_max = 0.0;
  const int w = junction_halfwidth(c.coupling);
  for (int x1 = dom->x1_min(); x1 < dom->x1_max(); ++x1) {
    const double jsec = section_current(st, x1);
    section_min = std::min(section_min, jsec);
    section_max = std::max(section_max, jsec);
    const bool near_junction = dom->geometry() == Geometry::darken && x1 >= -w - 1 && x1 <= w;
    if (!near_junction) {
      const double drop = sectional_average(st.mean(), x1) - sectional_average(st.mean(), x1 + 1);
      fick_max = std::max(fick_max, std::abs(jsec - drop));
    }
  }

  nlohmann::json summary{
      {"command", "solve"},
      {"geometry", c.geometry},
      {"n", c.n},
      {"sites", dom->size()},
      {"iterations", st.iterations()},
      {"max_solver_residual", solver_residual(st)},
      {"e1_current_max_deviation_from_tilt_drop", e1_dev},
      {"transverse_current_max", transverse_max},
      {"section_current_min", section_min},
      {"section_current_max", section_max},
      {"fick_residual_max", fick_max},
      {"covariance_row_sum_max_sampled", row_sum_max},
      {"covariance_row_sum_bound", 1.0 / (2.0 * c.beta)},
  };
  if (dom->geometry() == Geometry::darken) {
    summary["e1_current_theory"] = 2.0 * c.lambda / (4.0 * c.n + 1.0);
    summary["fick_excluded_x1"] = {-w - 1, w};
    const UphillWindow uw = uphill_window(st);
    summary["uphill_window"] = {{"found", uw.found()}, {"first", uw.first}, {"last", uw.last}};
  } else {
    summary["m"] = c.m;
    summary["e1_current_theory"] = c.lambda / c.n;
  }
  write_json(dir / "summary.json", summary);
  return kExitOk;
}

int cmd_junction(const RunConfig& c) {
  if (!(c.field < 0.0)) throw ConfigError("junction requires field < 0");
  const fs::path dir = prepare(c);
  const auto layer = junction_profile(c.coupling, c.field);
  double series_dev = 0.0;
  double reflection = 0.0;
  double recursion = 0.0;
  {
    CsvWriter csv(dir / "junction.csv", {"x1", "m_matched", "m_series", "gamma"});
    for (int x1 = c.x_min; x1 <= c.x_max; ++x1) {
      const double series = junction_series_oracle(c.coupling, c.field, x1, c.n_max);
      csv.row(x1, layer(x1), series, layer.gamma);
      series_dev = std::max(series_dev, std::abs(layer(x1) - series));
      reflection = std::max(reflection, std::abs(layer(x1) + layer(-1 - x1) + std::abs(c.field)));
      recursion = std::max(recursion, std::abs(layer.recursion_residual(x1)));
    }
  }
  write_json(dir / "summary.json",
             {{"command", "junction"},
              {"coupling", c.coupling},
              {"field", c.field},
              {"gamma", layer.gamma},
              {"gamma_closed_form", gamma_closed_form(c.coupling)},
              {"m0", layer.m0},
              {"m0_in_bounds", c.field / 2.0 < layer.m0 && layer.m0 < 0.0},
              {"n_max", c.n_max},
              {"series_max_deviation", series_dev},
              {"series_tail_bound", junction_series_tail_bound(c.coupling, c.field, c.n_max)},
              {"reflection_max_residual", reflection},
              {"recursion_max_residual", recursion}});
  return kExitOk;
}

int cmd_simulate(const RunConfig& c) {
  if (c.geometry != "darken") throw ConfigError("simulate supports the darken geometry only");
  const DomainPtr dom = share(LatticeDomain::darken(c.n));
  const auto model = assemble<double>(dom, c.model_params());
  const auto st = stationary_mean(model, c.solver_options());
  const LinearDrift drift = build_drift(model);
  if (c.integrator == "euler") {
    const double bound = 2.0 / gershgorin_bound(drift.matrix);
    if (!(c.dt < bound))
      throw ConfigError("dt = " + format_real(c.dt) + " exceeds the stability limit " + format_real(bound) +
                        "; choose dt below it");
  }
  const fs::path dir = prepare(c);
  const TraceSummary trace = simulate(model, c.simulation_config());

  nlohmann::json lyap = nullptr;
  nlohmann::json lyap_gibbs = nullptr;
  Vector<double> gibbs_var = Vector<double>::Constant(model.size(), std::numeric_limits<double>::quiet_NaN());
  if (model.size() <= QuadraticModel<double>::kDenseLimit) {
    const DenseMatrix<double> cov = dense_covariance(model);
    lyap = lyapunov_residual(drift, cov);
    lyap_gibbs = lyapunov_residual(drift, 2.0 * cov);
    gibbs_var = 2.0 * cov.diagonal();
  }

  double mean_z_max = 0.0;
  long means_within = 0;
  {
    CsvWriter csv(dir / "trace.csv",
                  {"x1", "x2", "x3", "mean", "mean_stderr", "exact_mean", "z", "variance", "gibbs_variance"});
    for (Index i = 0; i < model.size(); ++i) {
      const Site& x = dom->site(i);
      const double z = (trace.mean(i) - st.mean()(i)) / trace.mean_stderr(i);
      mean_z_max = std::max(mean_z_max, std::abs(z));
      means_within += std::abs(z) < 5.0 ? 1 : 0;
      csv.row(x.x1, x.x2, x.x3, trace.mean(i), trace.mean_stderr(i), st.mean()(i), z, trace.variance(i), gibbs_var(i));
    }
  }
  long currents_within = 0;
  {
    const Vector<double> theory = bond_currents(st);
    CsvWriter csv(dir / "currents.csv", {"x1", "x2", "x3", "dx", "dy", "dz", "current", "stderr", "theory", "z"});
    for (std::size_t k = 0; k < trace.bonds.size(); ++k) {
      const Bond& b = trace.bonds[k];
      const Site& x = dom->site(b.from);
      const Site& e = kUnitSteps[static_cast<std::size_t>(2 * b.axis)];
      const auto ki = static_cast<Index>(k);
      const double z = (trace.current(ki) - theory(ki)) / trace.current_stderr(ki);
      currents_within += std::abs(z) < 3.0 ? 1 : 0;
      csv.row(x.x1, x.x2, x.x3, e.x1, e.x2, e.x3, trace.current(ki), trace.current_stderr(ki), theory(ki), z);
    }
  }
  const auto n_bonds = static_cast<double>(trace.bonds.size());
  write_json(dir / "summary.json",
             {{"command", "simulate"},
              {"n", c.n},
              {"integrator", c.integrator},
              {"samples", trace.n_samples},
              {"batches", trace.batches},
              {"lyapunov_residual", lyap},
              {"lyapunov_residual_gibbs_covariance", lyap_gibbs},
              {"mean_equation_residual", mean_equation_residual(drift, st.mean().values())},
              {"mean_z_max", mean_z_max},
              {"mean_fraction_within_5se", static_cast<double>(means_within) / static_cast<double>(model.size())},
              {"current_fraction_within_3z", n_bonds > 0 ? static_cast<double>(currents_within) / n_bonds : 1.0},
              {"stability_dt_limit", 2.0 / gershgorin_bound(drift.matrix)}});
  return kExitOk;
}

namespace {

struct AxisScan {
  int n;
  int m;
  int far_offset;
  std::vector<std::pair<Site, LambdaStarEstimate>> estimates;
};

AxisScan scan_axis(const RunConfig& c, int n, int m, std::uint64_t seed) {
  if (channel_scale_warning(n, m)) std::cerr << "warning: channel M=" << m << " is not below sqrt(N) for N=" << n << "\n";
  const LatticeDomain dom = LatticeDomain::channel(n, m);
  ReservoirConfig rc = c.reservoir_config();
  rc.seed = seed;
  rc.validate(m);
  AxisScan scan{n, m, rc.resolved_far_offset(m), {}};
  for (int x1 = -n + 1; x1 <= n - 1; ++x1) {
    const Site x{x1, 0, 0};
    scan.estimates.emplace_back(x, estimate_lambda_star(dom, x, c.lambda, rc));
  }
  return scan;
}

struct ScanStats {
  double center_value = 0.0;
  double center_stderr = 0.0;
  double antisymmetry_z_max = 0.0;
  double max_deviation = 0.0;
  double max_deviation_stderr = 0.0;
  double current = 0.0;
  double current_stderr = 0.0;
  bool valid = true;
};

ScanStats scan_stats(const AxisScan& s, double lambda) {
  ScanStats out;
  const auto& e = s.estimates;
  const std::size_t k = e.size();
  for (std::size_t i = 0; i < k; ++i) {
    const auto& est = e[i].second.estimate;
    out.valid = out.valid && e[i].second.valid;
    if (e[i].first.x1 == 0) {
      out.center_value = est.value;
      out.center_stderr = est.stderr;
    }
    const auto& mirror = e[k - 1 - i].second.estimate;
    const double joint = std::hypot(est.stderr, mirror.stderr);
    if (joint > 0.0) out.antisymmetry_z_max = std::max(out.antisymmetry_z_max, std::abs(est.value + mirror.value) / joint);
    else if (est.value + mirror.value != 0.0) out.antisymmetry_z_max = std::numeric_limits<double>::infinity();
    const double dev = std::abs(est.value - channel_tilt(s.n, lambda, e[i].first.x1));
    if (dev > out.max_deviation) {
      out.max_deviation = dev;
      out.max_deviation_stderr = est.stderr;
    }
  }
  // Telescoping mean of N (f(x) - f(x + e1)) along the axis.
  const auto& first = e.front().second.estimate;
  const auto& last = e.back().second.estimate;
  const double steps = static_cast<double>(k - 1);
  if (k > 1) {
    out.current = s.n * (first.value - last.value) / steps;
    out.current_stderr = s.n * std::hypot(first.stderr, last.stderr) / steps;
  }
  return out;
}

}  // namespace

int cmd_reservoir(const RunConfig& c) {
  const fs::path dir = prepare(c);
  std::vector<std::pair<int, int>> cases;
  if (c.sweep)
    for (std::size_t i = 0; i < c.n_values.size(); ++i) cases.emplace_back(c.n_values[i], c.m_values[i]);
  else
    cases.emplace_back(c.n, c.m);

  bool all_valid = true;
  nlohmann::json runs = nlohmann::json::array();
  CsvWriter est_csv(dir / "estimates.csv", {"n", "m", "x1", "x2", "x3", "lambda_star", "stderr", "tilt", "deviation",
                                            "n_samples", "capped", "far_offset", "valid"});
  CsvWriter scale_csv(dir / "scaling.csv",
                      {"n", "m", "far_offset", "max_deviation", "max_deviation_stderr", "non_increasing"});
  double prev_dev = 0.0;
  double prev_err = 0.0;
  bool trend_ok = true;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto [n, m] = cases[i];
    const AxisScan scan = scan_axis(c, n, m, substream_seed(c.seed, {n, m}));
    for (const auto& [x, est] : scan.estimates) {
      const double tilt = channel_tilt(n, c.lambda, x.x1);
      est_csv.row(n, m, x.x1, x.x2, x.x3, est.estimate.value, est.estimate.stderr, tilt, est.estimate.value - tilt,
                  est.estimate.n_samples, est.capped, est.far_offset, est.valid);
    }
    const ScanStats s = scan_stats(scan, c.lambda);
    const bool step_ok = i == 0 || s.max_deviation <= prev_dev + 3.0 * std::hypot(s.max_deviation_stderr, prev_err);
    trend_ok = trend_ok && step_ok;
    scale_csv.row(n, m, scan.far_offset, s.max_deviation, s.max_deviation_stderr, step_ok);
    prev_dev = s.max_deviation;
    prev_err = s.max_deviation_stderr;
    all_valid = all_valid && s.valid;
    runs.push_back({{"n", n},
                    {"m", m},
                    {"far_offset", scan.far_offset},
                    {"scale_warning", channel_scale_warning(n, m)},
                    {"center", {{"value", s.center_value}, {"stderr", s.center_stderr}}},
                    {"antisymmetry_z_max", s.antisymmetry_z_max},
                    {"max_tilt_deviation", s.max_deviation},
                    {"max_tilt_deviation_stderr", s.max_deviation_stderr},
                    {"current", s.current},
                    {"current_stderr", s.current_stderr},
                    {"current_right_to_left", -s.current},
                    {"valid", s.valid}});
  }
  write_json(dir / "summary.json", {{"command", "reservoir"},
                                    {"lambda", c.lambda},
                                    {"samples_per_site", c.samples},
                                    {"runs", runs},
                                    {"deviation_non_increasing", trend_ok},
                                    {"valid", all_valid}});
  if (!all_valid) {
    std::cerr << "error: more than " << kMaxCappedFraction * 100 << "% of walks hit the step cap\n";
    return kExitStatistical;
  }
  return kExitOk;
}

int cmd_fick(const RunConfig& c) {
  for (int n : c.n_values)
    if (n < 2) throw ConfigError("fick needs every N >= 2");
  const fs::path dir = prepare(c);
  CsvWriter csv(dir / "scaling.csv", {"n", "slope", "slope_target", "slope_error", "current", "current_target",
                                      "current_error", "section_current_spread", "macro_error", "solver_residual"});
  nlohmann::json rows = nlohmann::json::array();
  std::vector<double> slope_errors;
  double spread_max = 0.0;
  for (int n : c.n_values) {
    const DomainPtr dom = share(LatticeDomain::darken(n));
    const auto model = assemble<double>(dom, c.model_params());
    const auto st = stationary_mean(model, c.solver_options());
    // Bulk window r1 in [1/2, 3/2] on the right of the junction.
    const int a = (n + 1) / 2;
    const int b = std::min(std::max(a + 1, 3 * n / 2), 2 * n - 1);
    const double slope = n * (sectional_average(st.mean(), b) - sectional_average(st.mean(), a)) / (b - a);
    const double slope_target = macroscopic_slope(c.lambda);
    const double current = n * section_current(st, 0);
    double jmin = std::numeric_limits<double>::infinity();
    double jmax = -jmin;
    for (int x1 = dom->x1_min(); x1 < dom->x1_max(); ++x1) {
      const double j = section_current(st, x1);
      jmin = std::min(jmin, j);
      jmax = std::max(jmax, j);
    }
    double macro = 0.0;
    for (int x1 = dom->x1_min(); x1 <= dom->x1_max(); ++x1) {
      const double r1 = static_cast<double>(x1) / n;
      if (std::abs(r1) < 0.25 || std::abs(r1) > 1.75) continue;
      macro = std::max(macro, std::abs(sectional_average(st.mean(), x1) - macroscopic_profile(r1, c.lambda, c.field)));
    }
    const double slope_error = std::abs(slope - slope_target);
    const double current_error = std::abs(current - macroscopic_current(c.lambda));
    slope_errors.push_back(slope_error);
    spread_max = std::max(spread_max, jmax - jmin);
    csv.row(n, slope, slope_target, slope_error, current, macroscopic_current(c.lambda), current_error, jmax - jmin,
            macro, solver_residual(st));
    rows.push_back({{"n", n}, {"slope", slope}, {"slope_error", slope_error}, {"current", current},
                    {"current_error", current_error}, {"section_current_spread", jmax - jmin}, {"macro_error", macro}});
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < slope_errors.size(); ++i) decreasing = decreasing && slope_errors[i] < slope_errors[i - 1];
  write_json(dir / "summary.json", {{"command", "fick"},
                                    {"lambda", c.lambda},
                                    {"field", c.field},
                                    {"rows", rows},
                                    {"slope_error_decreasing", decreasing},
                                    {"section_current_spread_max", spread_max}});
  return kExitOk;
}

int run(const RunConfig& c) {
  try {
    if (c.command == "solve") return cmd_solve(c);
    if (c.command == "junction") return cmd_junction(c);
    if (c.command == "simulate") return cmd_simulate(c);
    if (c.command == "reservoir") return cmd_reservoir(c);
    if (c.command == "fick") return cmd_fick(c);
    throw ConfigError("unknown command '" + c.command + "'");
  } catch (const SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const SimulationDiverged& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::length_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int main_entry(int argc, const char* const* argv) {
  try {
    const ParseOutcome parsed = parse_command_line(argc, argv);
    if (!parsed.config) return parsed.exit_code;
    return run(*parsed.config);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ness::cli
