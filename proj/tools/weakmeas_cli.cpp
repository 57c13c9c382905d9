// weakmeas: command-line front end for repeated weak measurement
// experiments. Every subcommand is deterministic given its flags and seed.
//
// Exit codes: 0 success, 2 invalid configuration or flags, 3 self-test
// failure, 1 anything unexpected.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "weakmeas/acceptance.hpp"
#include "weakmeas/analytics.hpp"
#include "weakmeas/config.hpp"
#include "weakmeas/measurement.hpp"
#include "weakmeas/report.hpp"
#include "weakmeas/trajectories.hpp"

namespace {

using nlohmann::json;
using namespace weakmeas;

constexpr int kExitValidation = 2;
constexpr int kExitSelfTest = 3;

/// Flags shared by the config-driven subcommands. Set flags win over the
/// config file.
struct ConfigFlags {
  std::string config_path;
  std::vector<double> spectrum;
  std::string amplitudes;
  std::vector<double> probabilities;
  std::optional<double> delta_p;
  std::optional<std::uint64_t> steps;
  std::optional<std::uint64_t> trajectories;
  std::optional<std::string> seed;
  std::optional<double> tol;
  std::optional<std::size_t> bins;
  std::optional<bool> early_stop;
  std::optional<unsigned> threads;
  std::optional<std::string> format;
  std::string output;

  void attach(CLI::App& cmd) {
    cmd.add_option("-c,--config", config_path, "JSON experiment config file");
    cmd.add_option("--spectrum", spectrum, "Eigenvalues, e.g. 1,-1")->delimiter(',');
    cmd.add_option("--amplitudes", amplitudes,
                   "Amplitudes as JSON [re, im] pairs, e.g. '[[0.8944,0],[0.4472,0]]'");
    cmd.add_option("--probabilities", probabilities,
                   "Born weights |alpha_i|^2 (zero phases), e.g. 0.8,0.2")
        ->delimiter(',');
    cmd.add_option("--delta-p", delta_p, "Pointer width delta_p (> 0)");
    cmd.add_option("-M,--steps", steps, "Repetitions M, or the step cap with early stop");
    cmd.add_option("-R,--trajectories", trajectories, "Number of trajectories");
    cmd.add_option("--seed", seed, "Master seed (falls back to $SEED, then 0)");
    cmd.add_option("--tol", tol, "Convergence tolerance on 1 - max |alpha_i|^2");
    cmd.add_option("--bins", bins, "Histogram bins for y_M");
    cmd.add_option("--early-stop", early_stop,
                   "Stop trajectories at convergence (true/false)");
    cmd.add_option("-j,--threads", threads, "Worker threads (0 = all cores)");
    cmd.add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd.add_option("-o,--output", output, "Write the main output here instead of stdout");
  }

  ExperimentConfig build() const {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ExperimentConfig::load(config_path);
    ExperimentConfig flags;
    if (!spectrum.empty()) flags.spectrum = spectrum;
    if (!amplitudes.empty()) {
      json doc;
      try {
        doc = json::parse(amplitudes);
      } catch (const json::parse_error&) {
        throw ValidationError("--amplitudes is not valid JSON");
      }
      flags.amplitudes = ExperimentConfig::from_json({{"amplitudes", doc}}).amplitudes;
    }
    if (!probabilities.empty()) flags.probabilities = probabilities;
    flags.delta_p = delta_p;
    flags.steps = steps;
    flags.trajectories = trajectories;
    if (seed) flags.master_seed = parse_seed(*seed);
    flags.convergence_tol = tol;
    flags.bins = bins;
    flags.early_stop = early_stop;
    flags.threads = threads;
    flags.format = format;
    cfg.merge(flags);
    cfg.apply_defaults();
    return cfg;
  }

  void write(const std::string& text) const {
    if (output.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream out(output);
    if (!out) throw ValidationError("cannot write '" + output + "'");
    out << text;
  }
};

std::string with_config(const ExperimentConfig& cfg, const std::string& key, json body) {
  json doc;
  doc["config"] = cfg.to_json();
  doc[key] = std::move(body);
  return doc.dump(2) + "\n";
}

int cmd_trajectory(const ConfigFlags& flags, bool retain) {
  ExperimentConfig cfg = flags.build();
  Experiment ex = resolve(cfg);
  ex.trajectory.retain_outcomes = retain;
  Stream stream = Stream::for_trajectory(ex.ensemble.master_seed, 0);
  TrajectoryRecord record = run_trajectory(ex.state, ex.app, ex.trajectory, stream, 0);
  if (*cfg.format == "json") {
    flags.write(with_config(cfg, "trajectory", trajectory_json(record)));
  } else {
    flags.write(trajectory_csv(record));
  }
  return 0;
}

int cmd_ensemble(const ConfigFlags& flags, const std::string& summary_path) {
  ExperimentConfig cfg = flags.build();
  Experiment ex = resolve(cfg);
  EnsembleStats stats = run_ensemble(ex.state, ex.app, ex.ensemble);
  std::optional<AverageDistribution> analytic;
  if (stats.common_steps) {
    analytic = average_distribution_binned(ex.state, ex.app, *stats.common_steps,
                                           stats.y_histogram.edges);
  }
  std::string summary = with_config(cfg, "ensemble", ensemble_json(stats));
  if (*cfg.format == "json") {
    flags.write(summary);
  } else {
    flags.write(histogram_csv(stats, analytic ? &*analytic : nullptr));
  }
  if (!summary_path.empty()) {
    std::ofstream out(summary_path);
    if (!out) throw ValidationError("cannot write '" + summary_path + "'");
    out << summary;
  }
  return 0;
}

int cmd_ydist(const ConfigFlags& flags, std::size_t points) {
  ExperimentConfig cfg = flags.build();
  Experiment ex = resolve(cfg);
  const std::uint64_t m = ex.trajectory.max_steps;
  auto dist = average_distribution(
      ex.state, ex.app, m, default_average_grid(ex.state.spectrum(), ex.app, m, points));
  if (*cfg.format == "json") {
    json body{{"repetitions", m},
              {"y", dist.grid},
              {"density", dist.density},
              {"integral", dist.integral()},
              {"mean", dist.first_moment()},
              {"variance", dist.second_central_moment()}};
    flags.write(with_config(cfg, "average_distribution", body));
  } else {
    flags.write(average_distribution_csv(dist));
  }
  return 0;
}

int cmd_disturbance(const ConfigFlags& flags, double eps_min, double eps_max,
                    std::size_t eps_points) {
  ExperimentConfig cfg = flags.build();
  Experiment ex = resolve(cfg);
  if (!(eps_min > 0.0) || !(eps_max >= eps_min) || eps_points < 1) {
    throw ValidationError("epsilon grid needs 0 < eps-min <= eps-max and >= 1 point");
  }
  std::vector<DisturbancePoint> curve;
  for (std::size_t k = 0; k < eps_points; ++k) {
    double t = eps_points == 1 ? 0.0
                               : static_cast<double>(k) / static_cast<double>(eps_points - 1);
    double eps = eps_min * std::pow(eps_max / eps_min, t);
    curve.push_back({eps, disturbance(ex.state, eps)});
  }
  const double limit = disturbance_limit(ex.state);
  if (*cfg.format == "json") {
    json eps = json::array(), dist = json::array();
    for (const auto& pt : curve) {
      eps.push_back(pt.epsilon);
      dist.push_back(pt.disturbance);
    }
    flags.write(with_config(cfg, "disturbance",
                            {{"epsilon", eps}, {"disturbance", dist}, {"limit", limit}}));
  } else {
    flags.write(disturbance_csv(limit, curve));
  }
  return 0;
}

int cmd_saturation(std::vector<double> fs, std::optional<double> f_max,
                   std::size_t f_points, const std::string& format,
                   const std::string& output) {
  if (f_max) {
    if (!(*f_max >= 0.0) || f_points < 2) {
      throw ValidationError("--f-max needs a value >= 0 and --f-points >= 2");
    }
    fs.clear();
    for (std::size_t k = 0; k < f_points; ++k) {
      fs.push_back(*f_max * static_cast<double>(k) / static_cast<double>(f_points - 1));
    }
  }
  auto rows = saturation_table(fs);
  std::string text;
  if (format == "json") {
    json f = json::array(), r = json::array();
    for (const auto& row : rows) {
      f.push_back(row.f);
      r.push_back(row.ratio);
    }
    text = json{{"f", f}, {"r_sat", r}}.dump(2) + "\n";
  } else {
    text = saturation_csv(rows);
  }
  ConfigFlags sink;
  sink.output = output;
  sink.write(text);
  return 0;
}

int cmd_povm_check(const ConfigFlags& flags, std::size_t points) {
  ExperimentConfig cfg = flags.build();
  if (!cfg.spectrum) throw ValidationError("config: 'spectrum' is required");
  if (!cfg.delta_p) throw ValidationError("config: 'delta_p' is required");
  Spectrum spectrum(*cfg.spectrum);
  ApparatusConfig app(*cfg.delta_p);
  CompletenessCheck check = povm_completeness(spectrum, app, points);
  if (*cfg.format == "json") {
    json body{{"points", check.points},
              {"lower", check.lower},
              {"upper", check.upper},
              {"diagonal", check.diagonal},
              {"max_abs_deviation", check.max_abs_deviation}};
    flags.write(with_config(cfg, "completeness", body));
  } else {
    flags.write(completeness_csv(check));
  }
  return 0;
}

int cmd_resources(const ConfigFlags& flags, std::optional<double> delta_s,
                  double strong_repetitions) {
  ExperimentConfig cfg = flags.build();
  if (!cfg.delta_p) throw ValidationError("config: 'delta_p' is required");
  double ds = 0.0;
  if (delta_s) {
    ds = *delta_s;
  } else {
    ds = std::sqrt(observable_variance(resolve(cfg).state));
  }
  double mw = required_weak_repetitions(*cfg.delta_p, ds, strong_repetitions);
  if (*cfg.format == "json") {
    json body{{"delta_p", *cfg.delta_p},
              {"delta_s", ds},
              {"strong_repetitions", strong_repetitions},
              {"weak_repetitions", mw}};
    flags.write(with_config(cfg, "resources", body));
  } else {
    flags.write("delta_p,delta_s,strong_repetitions,weak_repetitions\n" +
                format_number(*cfg.delta_p) + "," + format_number(ds) + "," +
                format_number(strong_repetitions) + "," + format_number(mw) + "\n");
  }
  return 0;
}

int cmd_selftest(const acceptance::Options& options, bool verbose) {
  bool all = true;
  acceptance::run(options, [&](const acceptance::CriterionResult& r) {
    std::cout << acceptance::format_line(r) << std::endl;
    if (verbose || !r.passed) {
      for (const auto& d : r.details) std::cout << "      " << d << '\n';
    }
    all = all && r.passed;
  });
  std::cout << (all ? "all criteria passed" : "some criteria FAILED") << std::endl;
  return all ? 0 : kExitSelfTest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeated weak measurements on a single copy: simulation and analytics"};
  app.require_subcommand(1);

  ConfigFlags traj_flags, ens_flags, ydist_flags, dist_flags, povm_flags, res_flags;

  auto* traj = app.add_subcommand("trajectory", "Run one repeated-measurement trajectory");
  traj_flags.attach(*traj);
  bool retain = false;
  traj->add_flag("--retain-outcomes", retain, "Include every outcome in the JSON report");

  auto* ens = app.add_subcommand("ensemble", "Run an ensemble; histogram CSV + JSON summary");
  ens_flags.attach(*ens);
  std::string summary_path;
  ens->add_option("--summary", summary_path, "Also write the JSON summary to this file");

  auto* ydist = app.add_subcommand("ydist", "Analytic distribution of the trajectory average");
  ydist_flags.attach(*ydist);
  std::size_t grid_points = 2048;
  ydist->add_option("--grid-points", grid_points, "Number of grid nodes")
      ->check(CLI::Range(2, 100000000));

  auto* dist = app.add_subcommand("disturbance", "Disturbance vs. error epsilon");
  dist_flags.attach(*dist);
  double eps_min = 0.01, eps_max = 100.0;
  std::size_t eps_points = 41;
  dist->add_option("--eps-min", eps_min, "Smallest epsilon");
  dist->add_option("--eps-max", eps_max, "Largest epsilon");
  dist->add_option("--eps-points", eps_points, "Geometric grid size");

  auto* sat = app.add_subcommand("saturation", "Saturation ratio of the mean outcome");
  std::vector<double> fs{0.5, 1.0, 2.0};
  std::optional<double> f_max;
  std::size_t f_points = 21;
  std::string sat_format = "csv", sat_output;
  sat->add_option("--f", fs, "Values of f, e.g. 0.5,1,2")->delimiter(',');
  sat->add_option("--f-max", f_max, "Uniform grid on [0, f-max] instead of --f");
  sat->add_option("--f-points", f_points, "Nodes of the --f-max grid");
  sat->add_option("--format", sat_format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  sat->add_option("-o,--output", sat_output, "Write here instead of stdout");

  auto* povm = app.add_subcommand("povm-check", "Completeness residual of the POVM");
  povm_flags.attach(*povm);
  std::size_t povm_points = 4096;
  povm->add_option("--points", povm_points, "Minimum quadrature nodes");

  auto* res = app.add_subcommand("resources", "Weak repetitions matching M_s strong ones");
  res_flags.attach(*res);
  std::optional<double> delta_s;
  double strong_reps = 1.0;
  res->add_option("--delta-s", delta_s, "Spread Delta S (default: from the state)");
  res->add_option("--strong-repetitions", strong_reps, "M_s");

  auto* self = app.add_subcommand("selftest", "Run the acceptance suite");
  acceptance::Options accept;
  std::string accept_seed;
  bool verbose = false;
  self->add_option("-j,--threads", accept.threads, "Worker threads (0 = all cores)");
  self->add_option("--seed", accept_seed, "Master seed for the suite");
  self->add_option("--only", accept.only, "Criterion ids to run")->delimiter(',');
  self->add_flag("-v,--verbose", verbose, "Print every check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (traj->parsed()) return cmd_trajectory(traj_flags, retain);
    if (ens->parsed()) return cmd_ensemble(ens_flags, summary_path);
    if (ydist->parsed()) return cmd_ydist(ydist_flags, grid_points);
    if (dist->parsed()) return cmd_disturbance(dist_flags, eps_min, eps_max, eps_points);
    if (sat->parsed()) return cmd_saturation(fs, f_max, f_points, sat_format, sat_output);
    if (povm->parsed()) return cmd_povm_check(povm_flags, povm_points);
    if (res->parsed()) return cmd_resources(res_flags, delta_s, strong_reps);
    if (self->parsed()) {
      if (!accept_seed.empty()) accept.seed = parse_seed(accept_seed);
      return cmd_selftest(accept, verbose);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
