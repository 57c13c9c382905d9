#include "weakmeas/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace weakmeas {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> args) {
  double top = kNegInf;
  for (double a : args) top = std::max(top, a);
  if (top == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double a : args) acc += std::exp(a - top);
  return top + std::log(acc);
}

void check_same_dimension(const PureState& state, std::span<const double> v) {
  if (state.dimension() != v.size()) {
    throw ValidationError("dimension mismatch between state and factors");
  }
}

}  // namespace

double outcome_density(const PureState& state, const ApparatusConfig& app,
                       double p) {
  const auto& spectrum = state.spectrum();
  const double inv_var = 1.0 / (app.delta_p() * app.delta_p());
  double acc = 0.0;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    double dp = p - spectrum[i];
    acc += std::norm(state[i]) * std::exp(-dp * dp * inv_var);
  }
  return app.norm_squared() * acc;
}

std::size_t sample_index(std::span<const double> weights, Stream& stream) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = stream.uniform() * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    cumulative += weights[i];
    last_positive = i;
    if (u < cumulative) return i;
  }
  // u landed in the rounding gap at the top end.
  return last_positive;
}

double sample_outcome(std::span<const double> born_weights,
                      const Spectrum& spectrum, const ApparatusConfig& app,
                      Stream& stream) {
  std::size_t i = sample_index(born_weights, stream);
  return stream.normal(spectrum[i], app.outcome_stddev());
}

double sample_outcome(const PureState& state, const ApparatusConfig& app,
                      Stream& stream) {
  auto weights = state.probabilities();
  return sample_outcome(weights, state.spectrum(), app, stream);
}

PureState reweight(const PureState& state, std::span<const double> log_factors) {
  check_same_dimension(state, log_factors);
  const std::size_t d = state.dimension();
  std::vector<double> log_mag(d, kNegInf);
  double top = kNegInf;
  for (std::size_t i = 0; i < d; ++i) {
    double mag = std::abs(state[i]);
    if (mag > 0.0) {
      log_mag[i] = std::log(mag) + log_factors[i];
      top = std::max(top, log_mag[i]);
    }
  }
  std::vector<Amplitude> out(d);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (log_mag[i] == kNegInf) continue;
    double mag = std::exp(log_mag[i] - top);
    out[i] = (state[i] / std::abs(state[i])) * mag;
    norm2 += mag * mag;
  }
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& a : out) a *= scale;
  return PureState(state.spectrum_ptr(), std::move(out));
}

PureState collapse(const PureState& state, const ApparatusConfig& app,
                   double p) {
  const auto& spectrum = state.spectrum();
  const double two_var = 2.0 * app.delta_p() * app.delta_p();
  std::vector<double> log_factors(state.dimension());
  for (std::size_t i = 0; i < log_factors.size(); ++i) {
    double dp = p - spectrum[i];
    log_factors[i] = -dp * dp / two_var;
  }
  return reweight(state, log_factors);
}

std::vector<double> povm_element(const Spectrum& spectrum,
                                 const ApparatusConfig& app, double p) {
  const double two_var = 2.0 * app.delta_p() * app.delta_p();
  const double n = app.norm();
  std::vector<double> out(spectrum.dimension());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double dp = p - spectrum[i];
    out[i] = n * std::exp(-dp * dp / two_var);
  }
  return out;
}

CompletenessCheck povm_completeness(const Spectrum& spectrum,
                                    const ApparatusConfig& app,
                                    std::size_t min_points) {
  CompletenessCheck check;
  check.lower = spectrum.min() - 10.0 * app.delta_p();
  check.upper = spectrum.max() + 10.0 * app.delta_p();
  const double span = check.upper - check.lower;
  const double max_step = 0.25 * app.outcome_stddev();
  auto needed = static_cast<std::size_t>(std::ceil(span / max_step)) + 1;
  check.points = std::max({min_points, needed, std::size_t{2}});
  const double h = span / static_cast<double>(check.points - 1);

  check.diagonal.assign(spectrum.dimension(), 0.0);
  for (std::size_t k = 0; k < check.points; ++k) {
    double p = check.lower + h * static_cast<double>(k);
    double w = (k == 0 || k + 1 == check.points) ? 0.5 * h : h;
    auto m = povm_element(spectrum, app, p);
    for (std::size_t i = 0; i < m.size(); ++i) check.diagonal[i] += w * m[i] * m[i];
  }
  for (double v : check.diagonal) {
    check.max_abs_deviation = std::max(check.max_abs_deviation, std::abs(v - 1.0));
  }
  return check;
}

double log_joint_density(const PureState& state, const ApparatusConfig& app,
                         const OutcomeSequence& outcomes) {
  if (outcomes.count() == 0) throw ValidationError("empty sequence");
  if (!outcomes.retains_outcomes()) {
    throw ValidationError(
        "joint density needs the individual outcomes; sequence keeps only "
        "its count and sum");
  }
  const auto& spectrum = state.spectrum();
  const double inv_var = 1.0 / (app.delta_p() * app.delta_p());
  std::vector<double> terms(state.dimension(), kNegInf);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    double w = std::norm(state[i]);
    if (w == 0.0) continue;
    double sq = 0.0;
    for (double p : outcomes.outcomes()) {
      double dp = p - spectrum[i];
      sq += dp * dp;
    }
    terms[i] = std::log(w) - sq * inv_var;
  }
  return static_cast<double>(outcomes.count()) * std::log(app.norm_squared()) +
         log_sum_exp(terms);
}

double joint_density(const PureState& state, const ApparatusConfig& app,
                     const OutcomeSequence& outcomes) {
  return std::exp(log_joint_density(state, app, outcomes));
}

PureState state_after_sequence(const PureState& state,
                               const ApparatusConfig& app,
                               const OutcomeSequence& outcomes) {
  if (outcomes.count() == 0) return state;
  const auto& spectrum = state.spectrum();
  const double m = static_cast<double>(outcomes.count());
  const double t = outcomes.sum();
  const double two_var = 2.0 * app.delta_p() * app.delta_p();
  std::vector<double> log_factors(state.dimension());
  for (std::size_t i = 0; i < log_factors.size(); ++i) {
    double s = spectrum[i];
    log_factors[i] = (2.0 * s * t - m * s * s) / two_var;
  }
  return reweight(state, log_factors);
}

std::size_t strong_sample(const PureState& state, Stream& stream) {
  auto weights = state.probabilities();
  return sample_index(weights, stream);
}

SequenceTracker::SequenceTracker(PureState initial, ApparatusConfig app)
    : initial_(std::move(initial)), app_(app) {
  const std::size_t d = initial_.dimension();
  log_initial_weights_.resize(d);
  log_scratch_.resize(d);
  weights_.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    double w = std::norm(initial_[i]);
    log_initial_weights_[i] = w > 0.0 ? std::log(w) : kNegInf;
  }
  refresh();
}

void SequenceTracker::record(double p) {
  ++count_;
  sum_ += p;
  refresh();
}

void SequenceTracker::refresh() {
  const auto& spectrum = initial_.spectrum();
  const double inv_var = 1.0 / (app_.delta_p() * app_.delta_p());
  const double m = static_cast<double>(count_);
  double top = kNegInf;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    double s = spectrum[i];
    double lw = log_initial_weights_[i];
    if (lw != kNegInf) lw += (2.0 * s * sum_ - m * s * s) * inv_var;
    log_scratch_[i] = lw;
    top = std::max(top, lw);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    weights_[i] = log_scratch_[i] == kNegInf ? 0.0 : std::exp(log_scratch_[i] - top);
    total += weights_[i];
  }
  for (double& w : weights_) w /= total;
}

PureState SequenceTracker::state() const {
  return state_after_sequence(initial_, app_,
                              OutcomeSequence::from_stats(count_, sum_));
}

}  // namespace weakmeas
