#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "weakmeas/state.hpp"
#include "weakmeas/trajectories.hpp"

namespace weakmeas {

/// Experiment description shared by every CLI subcommand.
///
/// On disk this is a JSON object; see docs/config.md for the schema. Flags
/// override file values field by field via `merge`.
struct ExperimentConfig {
  std::optional<std::vector<double>> spectrum;
  /// Complex amplitudes, serialized as [re, im] pairs.
  std::optional<std::vector<Amplitude>> amplitudes;
  /// Alternative to `amplitudes`: Born weights with zero phases.
  std::optional<std::vector<double>> probabilities;
  std::optional<double> delta_p;
  /// Number of repetitions M (fixed-M runs) or the step cap.
  std::optional<std::uint64_t> steps;
  std::optional<std::uint64_t> trajectories;
  std::optional<std::uint64_t> master_seed;
  std::optional<double> convergence_tol;
  std::optional<std::size_t> bins;
  std::optional<bool> early_stop;
  std::optional<unsigned> threads;
  std::optional<std::string> format;

  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::string& path);

  /// Fields set in `overrides` replace the ones here.
  void merge(const ExperimentConfig& overrides);

  /// Fills defaults. The seed falls back to the SEED environment variable
  /// and then to 0.
  void apply_defaults();

  nlohmann::json to_json() const;
};

/// Validated domain objects built from a config.
struct Experiment {
  PureState state;
  ApparatusConfig app;
  TrajectoryOptions trajectory;
  EnsembleOptions ensemble;
};

/// Throws ValidationError naming the failed invariant.
Experiment resolve(const ExperimentConfig& config);

/// Parses a SEED-style value; throws ValidationError on garbage.
std::uint64_t parse_seed(const std::string& text);

}  // namespace weakmeas
