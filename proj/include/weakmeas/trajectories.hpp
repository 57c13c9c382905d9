#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "weakmeas/analytics.hpp"
#include "weakmeas/random.hpp"
#include "weakmeas/state.hpp"

namespace weakmeas {

inline constexpr double kDefaultConvergenceTol = 1e-6;

struct TrajectoryOptions {
  std::uint64_t max_steps = 1000;
  double convergence_tol = kDefaultConvergenceTol;
  /// When false every trajectory runs exactly max_steps (fixed-M statistics).
  bool stop_on_convergence = true;
  bool retain_outcomes = false;

  void validate() const;
};

/// One single-copy realization of repeated weak measurements.
struct TrajectoryRecord {
  std::uint64_t seed_id = 0;
  std::uint64_t steps_taken = 0;
  /// y_M = T / M over the steps actually taken.
  double running_average = 0.0;
  PureState final_state;
  /// Present iff terminal_fidelity >= 1 - convergence_tol.
  std::optional<std::size_t> terminal_index;
  /// max_i |alpha_i|^2 of the final state.
  double terminal_fidelity = 0.0;
  OutcomeSequence outcomes;
  double first_outcome = 0.0;
  /// First step at which the convergence threshold was met, if ever.
  std::optional<std::uint64_t> first_converged_step;
};

/// Alternates outcome sampling and state update, stopping once one Born
/// weight reaches 1 - convergence_tol (unless disabled) or after max_steps.
/// The state is tracked through the count and sum of outcomes, which is
/// exactly the composition of single-step collapses.
TrajectoryRecord run_trajectory(const PureState& state,
                                const ApparatusConfig& app,
                                const TrajectoryOptions& options,
                                Stream& stream, std::uint64_t seed_id = 0);

/// Uniform-bin histogram with explicit under/overflow buckets.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::uint64_t> counts;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  static Histogram uniform(double lo, double hi, std::size_t bins);
  explicit Histogram(std::vector<double> bin_edges);
  Histogram() = default;

  void add(double y);
  std::uint64_t total() const;
  std::size_t bins() const { return counts.size(); }
};

/// [min s - 4 sigma_M, max s + 4 sigma_M] split into `bins` uniform bins.
std::vector<double> default_histogram_edges(const Spectrum& spectrum,
                                            const ApparatusConfig& app,
                                            std::uint64_t repetitions,
                                            std::size_t bins = 101);

struct EnsembleOptions {
  std::uint64_t trajectories = 1000;
  std::uint64_t master_seed = 0;
  TrajectoryOptions trajectory;
  /// Histogram edges for y_M; defaults to default_histogram_edges(max_steps).
  std::optional<std::vector<double>> bin_edges;
  std::size_t bins = 101;
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 1;
  bool keep_records = false;
};

struct EnsembleStats {
  std::uint64_t trajectory_count = 0;
  std::vector<double> born_weights{};
  std::vector<double> eigenvalues{};

  Histogram y_histogram{};
  /// Trajectories that ended in each eigenstate; `unconverged` holds the rest.
  std::vector<std::uint64_t> terminal_counts{};
  std::uint64_t unconverged = 0;

  DensityMatrix mean_final_density;
  /// Standard error of each entry of the mean final density matrix
  /// (real and imaginary parts combined).
  Eigen::MatrixXd density_standard_error{};

  /// TV distance of the y_M histogram to the analytic law; only defined when
  /// every trajectory ran the same number of steps.
  std::optional<double> tv_distance{};
  std::optional<std::uint64_t> common_steps{};

  double y_mean = 0.0;
  double y_variance = 0.0;
  double first_outcome_mean = 0.0;
  double first_outcome_variance = 0.0;
  double mean_steps = 0.0;
  /// Per trajectory, in trajectory order.
  std::vector<std::uint64_t> steps_taken{};
  std::vector<std::optional<std::uint64_t>> first_converged_step{};
  std::vector<TrajectoryRecord> records{};
};

/// Runs independent trajectories. Each trajectory's stream is derived from
/// (master_seed, index) and all reductions run in index order, so the result
/// is bit-identical for any number of threads.
EnsembleStats run_ensemble(const PureState& state, const ApparatusConfig& app,
                           const EnsembleOptions& options);

/// Total-variation distance between the normalized y_M histogram and the
/// analytic bin masses, with under/overflow treated as two extra bins.
double empirical_vs_analytic(const EnsembleStats& stats,
                             const AverageDistribution& analytic);

struct TerminalFrequencies {
  std::vector<double> frequencies;
  /// Pearson statistic against the Born weights of the initial state.
  double chi_square = 0.0;
  std::size_t degrees_of_freedom = 0;
  double p_value = 1.0;
};

/// Requires every trajectory to have converged.
TerminalFrequencies terminal_frequencies(const EnsembleStats& stats);

/// Fraction of trajectories that converged within `steps` steps.
double converged_fraction_by(const EnsembleStats& stats, std::uint64_t steps);

}  // namespace weakmeas
