#include "weakmeas/report.hpp"

#include <cstdio>
#include <sstream>

namespace weakmeas {

using nlohmann::json;

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::string join_numbers(std::span<const double> values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += format_number(values[i]);
  }
  return out;
}

}  // namespace

std::string trajectory_csv(const TrajectoryRecord& r) {
  std::ostringstream out;
  out << "seed_id,steps,y_M,sum,terminal_index,terminal_eigenvalue,"
         "terminal_fidelity,final_probabilities\n";
  out << r.seed_id << ',' << r.steps_taken << ','
      << format_number(r.running_average) << ','
      << format_number(r.outcomes.sum()) << ',';
  if (r.terminal_index) {
    out << *r.terminal_index << ','
        << format_number(r.final_state.spectrum()[*r.terminal_index]);
  } else {
    out << ',';
  }
  out << ',' << format_number(r.terminal_fidelity) << ','
      << join_numbers(r.final_state.probabilities(), ';') << '\n';
  return out.str();
}

json trajectory_json(const TrajectoryRecord& r) {
  json doc;
  doc["seed_id"] = r.seed_id;
  doc["steps"] = r.steps_taken;
  doc["y_M"] = r.running_average;
  doc["sum"] = r.outcomes.sum();
  doc["converged"] = r.terminal_index.has_value();
  if (r.terminal_index) {
    doc["terminal_index"] = *r.terminal_index;
    doc["terminal_eigenvalue"] = r.final_state.spectrum()[*r.terminal_index];
  } else {
    doc["terminal_index"] = nullptr;
    doc["terminal_eigenvalue"] = nullptr;
  }
  doc["terminal_fidelity"] = r.terminal_fidelity;
  doc["eigenvalues"] = std::vector<double>(r.final_state.spectrum().values().begin(),
                                           r.final_state.spectrum().values().end());
  doc["final_probabilities"] = r.final_state.probabilities();
  if (r.outcomes.retains_outcomes()) {
    doc["outcomes"] = std::vector<double>(r.outcomes.outcomes().begin(),
                                          r.outcomes.outcomes().end());
  }
  return doc;
}

std::string histogram_csv(const EnsembleStats& stats,
                          const AverageDistribution* analytic) {
  const auto& h = stats.y_histogram;
  const double total = static_cast<double>(h.total());
  std::ostringstream out;
  out << "bin_left,bin_right,count,empirical_mass,analytic_mass\n";
  for (std::size_t k = 0; k < h.bins(); ++k) {
    out << format_number(h.edges[k]) << ',' << format_number(h.edges[k + 1])
        << ',' << h.counts[k] << ','
        << format_number(static_cast<double>(h.counts[k]) / total) << ',';
    if (analytic && analytic->has_bins()) {
      out << format_number(analytic->bin_masses[k]);
    }
    out << '\n';
  }
  return out.str();
}

json ensemble_json(const EnsembleStats& s) {
  json doc;
  doc["trajectories"] = s.trajectory_count;
  doc["eigenvalues"] = s.eigenvalues;
  doc["born_weights"] = s.born_weights;
  doc["terminal_counts"] = s.terminal_counts;
  doc["unconverged"] = s.unconverged;
  doc["y_mean"] = s.y_mean;
  doc["y_variance"] = s.y_variance;
  doc["first_outcome_mean"] = s.first_outcome_mean;
  doc["first_outcome_variance"] = s.first_outcome_variance;
  doc["mean_steps"] = s.mean_steps;
  doc["common_steps"] = s.common_steps ? json(*s.common_steps) : json(nullptr);
  doc["tv_distance"] = s.tv_distance ? json(*s.tv_distance) : json(nullptr);
  doc["histogram"] = {{"edges", s.y_histogram.edges},
                      {"counts", s.y_histogram.counts},
                      {"underflow", s.y_histogram.underflow},
                      {"overflow", s.y_histogram.overflow}};
  json re = json::array();
  json im = json::array();
  json se = json::array();
  const auto& rho = s.mean_final_density.entries();
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    json rr = json::array(), ri = json::array(), rs = json::array();
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
      rr.push_back(rho(i, j).real());
      ri.push_back(rho(i, j).imag());
      rs.push_back(s.density_standard_error(i, j));
    }
    re.push_back(rr);
    im.push_back(ri);
    se.push_back(rs);
  }
  doc["mean_final_density"] = {{"re", re}, {"im", im}, {"standard_error", se}};
  return doc;
}

std::string average_distribution_csv(const AverageDistribution& dist) {
  std::ostringstream out;
  out << "y,density\n";
  for (std::size_t k = 0; k < dist.grid.size(); ++k) {
    out << format_number(dist.grid[k]) << ',' << format_number(dist.density[k])
        << '\n';
  }
  return out.str();
}

std::string disturbance_csv(double limit, std::span<const DisturbancePoint> curve) {
  std::ostringstream out;
  out << "epsilon,disturbance\n";
  out << format_number(0.0) << ',' << format_number(limit) << '\n';
  for (const auto& pt : curve) {
    out << format_number(pt.epsilon) << ',' << format_number(pt.disturbance)
        << '\n';
  }
  return out.str();
}

std::vector<SaturationRow> saturation_table(std::span<const double> fs) {
  std::vector<SaturationRow> rows;
  rows.reserve(fs.size());
  for (double f : fs) rows.push_back({f, saturation_ratio(f)});
  return rows;
}

std::string saturation_csv(std::span<const SaturationRow> rows) {
  std::ostringstream out;
  out << "f,r_sat\n";
  for (const auto& r : rows) {
    out << format_number(r.f) << ',' << format_number(r.ratio) << '\n';
  }
  return out.str();
}

std::string completeness_csv(const CompletenessCheck& check) {
  std::ostringstream out;
  out << "points,lower,upper,max_abs_deviation";
  for (std::size_t i = 0; i < check.diagonal.size(); ++i) out << ",diag_" << i;
  out << '\n'
      << check.points << ',' << format_number(check.lower) << ','
      << format_number(check.upper) << ','
      << format_number(check.max_abs_deviation);
  for (double v : check.diagonal) out << ',' << format_number(v);
  out << '\n';
  return out.str();
}

}  // namespace weakmeas
