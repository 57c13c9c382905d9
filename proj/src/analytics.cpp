#include "weakmeas/analytics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace weakmeas {

double ensemble_mean(const PureState& state) {
  const auto& spectrum = state.spectrum();
  double acc = 0.0;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    acc += std::norm(state[i]) * spectrum[i];
  }
  return acc;
}

double observable_variance(const PureState& state) {
  const auto& spectrum = state.spectrum();
  const double mean = ensemble_mean(state);
  double acc = 0.0;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    double ds = spectrum[i] - mean;
    acc += std::norm(state[i]) * ds * ds;
  }
  return acc;
}

double outcome_variance(const PureState& state, const ApparatusConfig& app) {
  return 0.5 * app.delta_p() * app.delta_p() + observable_variance(state);
}

double required_weak_repetitions(double delta_p, double delta_s,
                                 double strong_repetitions) {
  if (delta_s == 0.0) {
    throw ValidationError(
        "eigenstate has zero spread; strong comparison undefined");
  }
  if (!(delta_s > 0.0)) throw ValidationError("delta_S must be > 0");
  if (!(delta_p > 0.0)) throw ValidationError("delta_p must be > 0");
  if (!(strong_repetitions >= 1.0)) {
    throw ValidationError("M_s must be >= 1");
  }
  double ratio = delta_p / delta_s;
  return ratio * ratio * strong_repetitions / 2.0;
}

double saturation_ratio(double f) {
  if (!(f >= 0.0)) throw ValidationError("saturation ratio needs f >= 0");
  return std::erf(f) - 2.0 * f * std::exp(-f * f) / std::sqrt(std::numbers::pi);
}

ReducedDensityEstimate single_step_reduced_density(const PureState& state,
                                                   const ApparatusConfig& app) {
  const auto& spectrum = state.spectrum();
  const auto d = static_cast<Eigen::Index>(state.dimension());
  const double scale = 1.0 / (4.0 * app.delta_p() * app.delta_p());
  ReducedDensityEstimate out;
  out.entries.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      auto ui = static_cast<std::size_t>(i);
      auto uj = static_cast<std::size_t>(j);
      Amplitude rho = state[ui] * std::conj(state[uj]);
      double ds = spectrum[ui] - spectrum[uj];
      out.entries(i, j) = rho - scale * ds * ds * rho;
    }
  }
  out.min_eigenvalue = min_hermitian_eigenvalue(out.entries);
  out.positive_semidefinite = out.min_eigenvalue >= -kPositivityTolerance;
  if (!out.positive_semidefinite) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "leading-order single-step density matrix is not positive "
           "semidefinite at delta_p = "
        << app.delta_p() << " (min eigenvalue " << out.min_eigenvalue
        << "); use the exact multi-step form instead";
    out.warning = msg.str();
  }
  return out;
}

DensityMatrix expected_reduced_density_after(const PureState& state,
                                             const ApparatusConfig& app,
                                             double repetitions) {
  if (!(repetitions >= 0.0)) {
    throw ValidationError("number of repetitions must be >= 0");
  }
  const auto& spectrum = state.spectrum();
  const auto d = static_cast<Eigen::Index>(state.dimension());
  const double rate = repetitions / (4.0 * app.delta_p() * app.delta_p());
  Eigen::MatrixXcd rho(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      auto ui = static_cast<std::size_t>(i);
      auto uj = static_cast<std::size_t>(j);
      double ds = spectrum[ui] - spectrum[uj];
      double damping = i == j ? 1.0 : std::exp(-rate * ds * ds);
      rho(i, j) = damping * state[ui] * std::conj(state[uj]);
    }
  }
  return DensityMatrix(std::move(rho));
}

double statistical_error(const ApparatusConfig& app, double repetitions) {
  if (!(repetitions > 0.0)) throw ValidationError("repetitions must be > 0");
  return app.delta_p() / std::sqrt(2.0 * repetitions);
}

double disturbance(const PureState& state, double epsilon) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
  const auto& spectrum = state.spectrum();
  const auto weights = state.probabilities();
  const double inv = 1.0 / (8.0 * epsilon * epsilon);
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (std::size_t j = 0; j < weights.size(); ++j) {
      if (i == j) continue;
      double ds = spectrum[i] - spectrum[j];
      acc += weights[i] * weights[j] * -std::expm1(-ds * ds * inv);
    }
  }
  return acc;
}

double disturbance_limit(const PureState& state) {
  double acc = 0.0;
  for (double w : state.probabilities()) acc += w * (1.0 - w);
  return acc;
}

namespace {

double average_sigma(const ApparatusConfig& app, std::uint64_t repetitions) {
  if (repetitions < 1) throw ValidationError("M must be >= 1");
  return statistical_error(app, static_cast<double>(repetitions));
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t k = 1; k < x.size(); ++k) {
    acc += 0.5 * (x[k] - x[k - 1]) * (y[k] + y[k - 1]);
  }
  return acc;
}

void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw ValidationError("grid needs at least two points");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      throw ValidationError("grid must be strictly increasing");
    }
  }
}

}  // namespace

double AverageDistribution::integral() const { return trapezoid(grid, density); }

double AverageDistribution::first_moment() const {
  std::vector<double> y(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) y[k] = grid[k] * density[k];
  return trapezoid(grid, y);
}

double AverageDistribution::second_central_moment() const {
  const double mean = first_moment();
  std::vector<double> y(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double dy = grid[k] - mean;
    y[k] = dy * dy * density[k];
  }
  return trapezoid(grid, y);
}

double average_density(const PureState& state, const ApparatusConfig& app,
                       std::uint64_t repetitions, double y) {
  average_sigma(app, repetitions);
  const auto& spectrum = state.spectrum();
  const double m = static_cast<double>(repetitions);
  const double var = app.delta_p() * app.delta_p();
  double acc = 0.0;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    double dy = y - spectrum[i];
    acc += std::norm(state[i]) * std::exp(-dy * dy * m / var);
  }
  return std::sqrt(m / (std::numbers::pi * var)) * acc;
}

double average_cdf(const PureState& state, const ApparatusConfig& app,
                   std::uint64_t repetitions, double y) {
  const double sigma = average_sigma(app, repetitions);
  const auto& spectrum = state.spectrum();
  double acc = 0.0;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    double z = (y - spectrum[i]) / sigma;
    acc += std::norm(state[i]) * 0.5 * std::erfc(-z / std::numbers::sqrt2);
  }
  return acc;
}

std::vector<double> default_average_grid(const Spectrum& spectrum,
                                         const ApparatusConfig& app,
                                         std::uint64_t repetitions,
                                         std::size_t points) {
  if (points < 2) throw ValidationError("grid needs at least two points");
  const double sigma = average_sigma(app, repetitions);
  const double lo = spectrum.min() - 6.0 * sigma;
  const double hi = spectrum.max() + 6.0 * sigma;
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = lo + (hi - lo) * static_cast<double>(k) /
                       static_cast<double>(points - 1);
  }
  return grid;
}

AverageDistribution average_distribution(const PureState& state,
                                         const ApparatusConfig& app,
                                         std::uint64_t repetitions,
                                         std::vector<double> grid) {
  average_sigma(app, repetitions);
  check_grid(grid);
  AverageDistribution out;
  out.repetitions = repetitions;
  out.grid = std::move(grid);
  out.density.reserve(out.grid.size());
  for (double y : out.grid) {
    out.density.push_back(average_density(state, app, repetitions, y));
  }
  return out;
}

AverageDistribution average_distribution_binned(const PureState& state,
                                                const ApparatusConfig& app,
                                                std::uint64_t repetitions,
                                                std::vector<double> edges) {
  AverageDistribution out =
      average_distribution(state, app, repetitions, std::move(edges));
  std::vector<double> cdf;
  cdf.reserve(out.grid.size());
  for (double y : out.grid) cdf.push_back(average_cdf(state, app, repetitions, y));
  out.bin_masses.resize(cdf.size() - 1);
  for (std::size_t k = 0; k + 1 < cdf.size(); ++k) {
    out.bin_masses[k] = cdf[k + 1] - cdf[k];
  }
  out.underflow = cdf.front();
  const double sigma = average_sigma(app, repetitions);
  const auto& spectrum = state.spectrum();
  out.overflow = 0.0;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    double z = (out.grid.back() - spectrum[i]) / sigma;
    out.overflow += std::norm(state[i]) * 0.5 * std::erfc(z / std::numbers::sqrt2);
  }
  return out;
}

}  // namespace weakmeas
