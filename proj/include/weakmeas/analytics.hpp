#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "weakmeas/state.hpp"

namespace weakmeas {

// Closed-form ensemble predictions. Everything here is a pure function of its
// arguments and doubles as the reference for the Monte Carlo engine.

/// sum_i |alpha_i|^2 s_i
double ensemble_mean(const PureState& state);

/// (Delta S)^2 = <S^2> - <S>^2
double observable_variance(const PureState& state);

/// delta_p^2 / 2 + (Delta S)^2
double outcome_variance(const PureState& state, const ApparatusConfig& app);

/// Number of weak repetitions matching the statistical error of
/// `strong_repetitions` projective ones: (delta_p / delta_s)^2 M_s / 2.
double required_weak_repetitions(double delta_p, double delta_s,
                                 double strong_repetitions);

/// Fraction of the mean outcome collected from |p| <= f delta_p in the weak
/// regime: erf(f) - 2 f exp(-f^2) / sqrt(pi). Uses std::erf.
double saturation_ratio(double f);

/// Leading-order (in 1/delta_p^2) reduced density matrix after one weak step.
/// Returned exactly as the expansion gives it; at small delta_p it can leave
/// the PSD cone, which is reported through `warning`.
struct ReducedDensityEstimate {
  Eigen::MatrixXcd entries;
  double min_eigenvalue = 0.0;
  bool positive_semidefinite = true;
  std::optional<std::string> warning;
};

ReducedDensityEstimate single_step_reduced_density(const PureState& state,
                                                   const ApparatusConfig& app);

/// Ensemble-averaged state after `repetitions` steps: rho_ij is damped by
/// exp(-M (s_i - s_j)^2 / (4 delta_p^2)).
DensityMatrix expected_reduced_density_after(const PureState& state,
                                             const ApparatusConfig& app,
                                             double repetitions);

/// Statistical error of the trajectory average, delta_p / sqrt(2 M).
double statistical_error(const ApparatusConfig& app, double repetitions);

/// 1 - tr(rho rho_M) written in terms of the error epsilon:
///   sum_ij |alpha_i|^2 |alpha_j|^2 (1 - exp(-(s_i - s_j)^2 / (8 epsilon^2)))
double disturbance(const PureState& state, double epsilon);

/// epsilon -> 0 limit, sum_i |alpha_i|^2 (1 - |alpha_i|^2).
double disturbance_limit(const PureState& state);

/// Analytic density of the trajectory average y_M: a mixture of Gaussians
/// centred on the eigenvalues, weights |alpha_i|^2, std delta_p / sqrt(2M).
struct AverageDistribution {
  std::uint64_t repetitions = 1;
  std::vector<double> grid;
  std::vector<double> density;

  /// Exact probability mass per bin when built with bin edges; the grid then
  /// equals the edges. `underflow`/`overflow` hold the mass outside them.
  std::vector<double> bin_masses;
  double underflow = 0.0;
  double overflow = 0.0;

  bool has_bins() const { return !bin_masses.empty(); }
  /// Trapezoid integral of the density over the grid.
  double integral() const;
  double first_moment() const;
  double second_central_moment() const;
};

double average_density(const PureState& state, const ApparatusConfig& app,
                       std::uint64_t repetitions, double y);
double average_cdf(const PureState& state, const ApparatusConfig& app,
                   std::uint64_t repetitions, double y);

/// [min s - 6 sigma_M, max s + 6 sigma_M] with `points` nodes.
std::vector<double> default_average_grid(const Spectrum& spectrum,
                                         const ApparatusConfig& app,
                                         std::uint64_t repetitions,
                                         std::size_t points = 2048);

AverageDistribution average_distribution(const PureState& state,
                                         const ApparatusConfig& app,
                                         std::uint64_t repetitions,
                                         std::vector<double> grid);

/// Evaluates on the edges and also fills exact per-bin masses (CDF
/// differences), for comparison against histograms.
AverageDistribution average_distribution_binned(const PureState& state,
                                                const ApparatusConfig& app,
                                                std::uint64_t repetitions,
                                                std::vector<double> edges);

}  // namespace weakmeas
