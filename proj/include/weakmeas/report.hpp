#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "weakmeas/analytics.hpp"
#include "weakmeas/measurement.hpp"
#include "weakmeas/trajectories.hpp"

namespace weakmeas {

// Text renderings used by the CLI. CSV output is comma-separated with a
// fixed header row and every number printed with 17 significant digits.

std::string format_number(double value);

std::string trajectory_csv(const TrajectoryRecord& record);
nlohmann::json trajectory_json(const TrajectoryRecord& record);

/// bin_left,bin_right,count,empirical_mass,analytic_mass
std::string histogram_csv(const EnsembleStats& stats,
                          const AverageDistribution* analytic);
nlohmann::json ensemble_json(const EnsembleStats& stats);

/// y,density
std::string average_distribution_csv(const AverageDistribution& dist);

struct DisturbancePoint {
  double epsilon = 0.0;
  double disturbance = 0.0;
};
/// epsilon,disturbance; the first row has epsilon 0 and carries the
/// epsilon -> 0 limit.
std::string disturbance_csv(double limit, std::span<const DisturbancePoint> curve);

struct SaturationRow {
  double f = 0.0;
  double ratio = 0.0;
};
std::vector<SaturationRow> saturation_table(std::span<const double> fs);
/// f,r_sat
std::string saturation_csv(std::span<const SaturationRow> rows);

/// points,lower,upper,max_abs_deviation followed by one diag_<i> column each.
std::string completeness_csv(const CompletenessCheck& check);

}  // namespace weakmeas
