#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "weakmeas/random.hpp"
#include "weakmeas/state.hpp"

namespace weakmeas {

// Single-step and multi-step weak measurement of the observable whose
// eigenbasis the state is written in. The pointer state is a Gaussian of
// width delta_p centred at zero; after an outcome p the system is updated by
//
//   alpha_i -> alpha_i exp(-(p - s_i)^2 / (2 delta_p^2)) / norm
//
// All state updates are done on log-magnitudes with max-subtraction so that
// long sequences and sharp (strong) measurements do not underflow.

/// Probability density of outcome p:
///   N^2 sum_i |alpha_i|^2 exp(-(p - s_i)^2 / delta_p^2).
double outcome_density(const PureState& state, const ApparatusConfig& app,
                       double p);

/// Draws p from outcome_density: picks component i with probability
/// |alpha_i|^2, then a Gaussian around s_i with std delta_p / sqrt(2).
double sample_outcome(const PureState& state, const ApparatusConfig& app,
                      Stream& stream);

/// Same draw from precomputed Born weights.
double sample_outcome(std::span<const double> born_weights,
                      const Spectrum& spectrum, const ApparatusConfig& app,
                      Stream& stream);

/// Post-measurement state after observing p. Phases are unchanged and
/// eigenstates are fixed points.
PureState collapse(const PureState& state, const ApparatusConfig& app,
                   double p);

/// Diagonal of the measurement operator M_p, N exp(-(p - s_i)^2 / (2 delta_p^2)).
std::vector<double> povm_element(const Spectrum& spectrum,
                                 const ApparatusConfig& app, double p);

struct CompletenessCheck {
  /// Trapezoid estimate of the diagonal of the integral of M_p^2 dp.
  std::vector<double> diagonal;
  /// max |integral - identity|; off-diagonal entries vanish identically.
  double max_abs_deviation = 0.0;
  std::size_t points = 0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Integrates M_p^dagger M_p over [min s - 10 delta_p, max s + 10 delta_p]
/// with the trapezoid rule. At least `min_points` nodes are used, more when
/// needed to keep the step below a quarter of the outcome width.
CompletenessCheck povm_completeness(const Spectrum& spectrum,
                                    const ApparatusConfig& app,
                                    std::size_t min_points = 4096);

/// Joint density of an outcome sequence, evaluated in log space.
/// Requires a non-empty sequence with retained outcomes.
double log_joint_density(const PureState& state, const ApparatusConfig& app,
                         const OutcomeSequence& outcomes);
double joint_density(const PureState& state, const ApparatusConfig& app,
                     const OutcomeSequence& outcomes);

/// State after a whole sequence. Uses only the count and the sum of the
/// outcomes: alpha_i is reweighted by exp((2 s_i T - M s_i^2) / (2 delta_p^2)).
PureState state_after_sequence(const PureState& state,
                               const ApparatusConfig& app,
                               const OutcomeSequence& outcomes);

/// Projective (Born rule) baseline: index i with probability |alpha_i|^2.
std::size_t strong_sample(const PureState& state, Stream& stream);
std::size_t sample_index(std::span<const double> weights, Stream& stream);

/// Reweights |alpha_i| by exp(log_factors[i]) and renormalizes, keeping
/// phases. Zero amplitudes stay zero.
PureState reweight(const PureState& state, std::span<const double> log_factors);

/// Tracks a measurement sequence through its sufficient statistics and
/// exposes the current Born weights without materializing a state per step.
class SequenceTracker {
 public:
  SequenceTracker(PureState initial, ApparatusConfig app);

  void record(double p);

  std::uint64_t count() const { return count_; }
  double sum() const { return sum_; }
  /// Current |alpha_i|^2.
  std::span<const double> born_weights() const { return weights_; }
  PureState state() const;

 private:
  void refresh();

  PureState initial_;
  ApparatusConfig app_;
  std::vector<double> log_initial_weights_;
  std::vector<double> log_scratch_;
  std::vector<double> weights_;
  std::uint64_t count_ = 0;
  double sum_ = 0.0;
};

}  // namespace weakmeas
