#include "weakmeas/trajectories.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include <boost/math/distributions/chi_squared.hpp>

#include "weakmeas/measurement.hpp"

namespace weakmeas {

void TrajectoryOptions::validate() const {
  if (max_steps < 1) throw ValidationError("max_steps must be >= 1");
  if (!(convergence_tol > 0.0 && convergence_tol < 1.0)) {
    throw ValidationError("convergence_tol must lie in (0, 1)");
  }
}

TrajectoryRecord run_trajectory(const PureState& state,
                                const ApparatusConfig& app,
                                const TrajectoryOptions& options,
                                Stream& stream, std::uint64_t seed_id) {
  options.validate();
  const auto& spectrum = state.spectrum();
  const double threshold = 1.0 - options.convergence_tol;

  SequenceTracker tracker(state, app);
  OutcomeSequence outcomes = options.retain_outcomes
                                 ? OutcomeSequence{}
                                 : OutcomeSequence::stats_only();
  double first_outcome = 0.0;
  std::optional<std::uint64_t> first_converged;

  for (std::uint64_t step = 1; step <= options.max_steps; ++step) {
    double p = sample_outcome(tracker.born_weights(), spectrum, app, stream);
    tracker.record(p);
    outcomes.push(p);
    if (step == 1) first_outcome = p;

    auto weights = tracker.born_weights();
    double top = *std::max_element(weights.begin(), weights.end());
    if (top >= threshold) {
      if (!first_converged) first_converged = step;
      if (options.stop_on_convergence) break;
    }
  }

  PureState final_state = tracker.state();
  auto weights = final_state.probabilities();
  auto top = std::max_element(weights.begin(), weights.end());

  TrajectoryRecord record{.seed_id = seed_id,
                          .steps_taken = tracker.count(),
                          .running_average = outcomes.mean(),
                          .final_state = std::move(final_state),
                          .terminal_index = std::nullopt,
                          .terminal_fidelity = *top,
                          .outcomes = std::move(outcomes),
                          .first_outcome = first_outcome,
                          .first_converged_step = first_converged};
  if (record.terminal_fidelity >= threshold) {
    record.terminal_index = static_cast<std::size_t>(top - weights.begin());
  }
  return record;
}

Histogram::Histogram(std::vector<double> bin_edges)
    : edges(std::move(bin_edges)) {
  if (edges.size() < 2) throw ValidationError("histogram needs >= 1 bin");
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (!(edges[k] > edges[k - 1])) {
      throw ValidationError("histogram edges must be strictly increasing");
    }
  }
  counts.assign(edges.size() - 1, 0);
}

Histogram Histogram::uniform(double lo, double hi, std::size_t bins) {
  if (bins < 1 || !(hi > lo)) {
    throw ValidationError("uniform histogram needs bins >= 1 and hi > lo");
  }
  std::vector<double> e(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    e[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
  }
  return Histogram(std::move(e));
}

void Histogram::add(double y) {
  if (y < edges.front()) {
    ++underflow;
    return;
  }
  if (y >= edges.back()) {
    ++overflow;
    return;
  }
  auto it = std::upper_bound(edges.begin(), edges.end(), y);
  ++counts[static_cast<std::size_t>(it - edges.begin()) - 1];
}

std::uint64_t Histogram::total() const {
  std::uint64_t n = underflow + overflow;
  for (auto c : counts) n += c;
  return n;
}

std::vector<double> default_histogram_edges(const Spectrum& spectrum,
                                            const ApparatusConfig& app,
                                            std::uint64_t repetitions,
                                            std::size_t bins) {
  const double sigma = statistical_error(app, static_cast<double>(repetitions));
  return Histogram::uniform(spectrum.min() - 4.0 * sigma,
                            spectrum.max() + 4.0 * sigma, bins)
      .edges;
}

namespace {

std::vector<TrajectoryRecord> run_all(const PureState& state,
                                      const ApparatusConfig& app,
                                      const EnsembleOptions& options) {
  const std::uint64_t n = options.trajectories;
  std::vector<std::optional<TrajectoryRecord>> slots(n);
  std::atomic<std::uint64_t> next{0};

  auto worker = [&] {
    for (;;) {
      std::uint64_t k = next.fetch_add(1, std::memory_order_relaxed);
      if (k >= n) return;
      Stream stream = Stream::for_trajectory(options.master_seed, k);
      slots[k] = run_trajectory(state, app, options.trajectory, stream, k);
    }
  };

  unsigned threads = options.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::uint64_t>(threads, std::max<std::uint64_t>(n, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<TrajectoryRecord> records;
  records.reserve(n);
  for (auto& slot : slots) records.push_back(std::move(*slot));
  return records;
}

double sample_variance(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size() - 1);
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

EnsembleStats run_ensemble(const PureState& state, const ApparatusConfig& app,
                           const EnsembleOptions& options) {
  if (options.trajectories < 1) {
    throw ValidationError("ensemble needs at least one trajectory");
  }
  options.trajectory.validate();
  std::vector<TrajectoryRecord> records = run_all(state, app, options);
  const std::size_t d = state.dimension();
  const auto n = static_cast<double>(records.size());
  const auto dim = static_cast<Eigen::Index>(d);

  // Everything below walks the records in trajectory order.
  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
  std::vector<double> ys;
  std::vector<double> firsts;
  ys.reserve(records.size());
  firsts.reserve(records.size());
  for (const auto& r : records) {
    ys.push_back(r.running_average);
    firsts.push_back(r.first_outcome);
    sum += density_from_pure(r.final_state).entries();
  }
  Eigen::MatrixXcd mean = sum / n;

  Eigen::MatrixXd se = Eigen::MatrixXd::Zero(dim, dim);
  if (records.size() > 1) {
    for (const auto& r : records) {
      Eigen::MatrixXcd dev = density_from_pure(r.final_state).entries() - mean;
      se += dev.cwiseAbs2();
    }
    se = (se / (n - 1.0) / n).cwiseSqrt();
  }

  EnsembleStats stats{.mean_final_density = DensityMatrix(std::move(mean))};
  stats.trajectory_count = records.size();
  stats.born_weights = state.probabilities();
  stats.eigenvalues.assign(state.spectrum().values().begin(),
                           state.spectrum().values().end());
  stats.density_standard_error = std::move(se);

  std::uint64_t steps0 = records.front().steps_taken;
  bool common = true;
  for (const auto& r : records) common = common && r.steps_taken == steps0;
  if (common) stats.common_steps = steps0;

  std::vector<double> edges =
      options.bin_edges ? *options.bin_edges
                        : default_histogram_edges(state.spectrum(), app,
                                                  options.trajectory.max_steps,
                                                  options.bins);
  stats.y_histogram = Histogram(std::move(edges));
  stats.terminal_counts.assign(d, 0);
  double steps_total = 0.0;
  for (const auto& r : records) {
    stats.y_histogram.add(r.running_average);
    if (r.terminal_index) {
      ++stats.terminal_counts[*r.terminal_index];
    } else {
      ++stats.unconverged;
    }
    steps_total += static_cast<double>(r.steps_taken);
    stats.steps_taken.push_back(r.steps_taken);
    stats.first_converged_step.push_back(r.first_converged_step);
  }
  stats.mean_steps = steps_total / n;
  stats.y_mean = mean_of(ys);
  stats.y_variance = sample_variance(ys, stats.y_mean);
  stats.first_outcome_mean = mean_of(firsts);
  stats.first_outcome_variance = sample_variance(firsts, stats.first_outcome_mean);

  if (stats.common_steps) {
    auto analytic = average_distribution_binned(state, app, *stats.common_steps,
                                                stats.y_histogram.edges);
    stats.tv_distance = empirical_vs_analytic(stats, analytic);
  }
  if (options.keep_records) stats.records = std::move(records);
  return stats;
}

double empirical_vs_analytic(const EnsembleStats& stats,
                             const AverageDistribution& analytic) {
  const auto& hist = stats.y_histogram;
  if (!analytic.has_bins()) {
    throw ValidationError("analytic distribution carries no bin masses");
  }
  if (analytic.grid.size() != hist.edges.size() ||
      analytic.bin_masses.size() != hist.counts.size()) {
    throw ValidationError("bin mismatch: different number of bins");
  }
  for (std::size_t k = 0; k < hist.edges.size(); ++k) {
    double scale = std::max(1.0, std::abs(hist.edges[k]));
    if (std::abs(analytic.grid[k] - hist.edges[k]) > 1e-12 * scale) {
      throw ValidationError("bin mismatch: edges differ");
    }
  }
  const double total = static_cast<double>(hist.total());
  if (total == 0.0) throw ValidationError("histogram is empty");
  double tv = std::abs(static_cast<double>(hist.underflow) / total -
                       analytic.underflow) +
              std::abs(static_cast<double>(hist.overflow) / total -
                       analytic.overflow);
  for (std::size_t k = 0; k < hist.counts.size(); ++k) {
    tv += std::abs(static_cast<double>(hist.counts[k]) / total -
                   analytic.bin_masses[k]);
  }
  return std::min(1.0, 0.5 * tv);
}

TerminalFrequencies terminal_frequencies(const EnsembleStats& stats) {
  if (stats.unconverged > 0) {
    std::ostringstream msg;
    msg << stats.unconverged << " of " << stats.trajectory_count
        << " trajectories did not converge";
    throw ValidationError(msg.str());
  }
  TerminalFrequencies out;
  const auto n = static_cast<double>(stats.trajectory_count);
  std::size_t categories = 0;
  for (std::size_t i = 0; i < stats.terminal_counts.size(); ++i) {
    double observed = static_cast<double>(stats.terminal_counts[i]);
    out.frequencies.push_back(observed / n);
    double expected = stats.born_weights[i] * n;
    if (expected > 0.0) {
      ++categories;
      out.chi_square += (observed - expected) * (observed - expected) / expected;
    } else if (observed > 0.0) {
      out.chi_square = std::numeric_limits<double>::infinity();
    }
  }
  out.degrees_of_freedom = categories > 0 ? categories - 1 : 0;
  if (std::isinf(out.chi_square)) {
    out.p_value = 0.0;
  } else if (out.degrees_of_freedom == 0) {
    out.p_value = 1.0;
  } else {
    boost::math::chi_squared dist(static_cast<double>(out.degrees_of_freedom));
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.chi_square));
  }
  return out;
}

double converged_fraction_by(const EnsembleStats& stats, std::uint64_t steps) {
  std::uint64_t hits = 0;
  for (const auto& s : stats.first_converged_step) {
    if (s && *s <= steps) ++hits;
  }
  return static_cast<double>(hits) /
         static_cast<double>(stats.first_converged_step.size());
}

}  // namespace weakmeas
