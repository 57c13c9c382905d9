#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace weakmeas {

using Amplitude = std::complex<double>;

/// Raised when a value would violate one of the domain invariants.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kPositivityTolerance = 1e-10;

/// Non-degenerate spectrum of the measured observable, kept sorted ascending.
class Spectrum {
 public:
  explicit Spectrum(std::vector<double> eigenvalues);

  std::size_t dimension() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

  double min() const { return values_.front(); }
  double max() const { return values_.back(); }
  double min_gap() const;

 private:
  std::vector<double> values_;
};

/// Width of the Gaussian pointer state (centred at zero). Large values give
/// weak measurements, small values recover projective ones.
class ApparatusConfig {
 public:
  explicit ApparatusConfig(double delta_p);

  double delta_p() const { return delta_p_; }
  /// N^2 with N^2 sqrt(pi delta_p^2) = 1.
  double norm_squared() const;
  double norm() const;
  /// Standard deviation of a single outcome around an eigenvalue.
  double outcome_stddev() const;

 private:
  double delta_p_;
};

/// Pure state expressed in the eigenbasis of its spectrum.
///
/// The spectrum is shared and immutable, so copies of a state are cheap and
/// safe to hand to other threads.
class PureState {
 public:
  /// Requires unit norm within kNormTolerance.
  PureState(std::shared_ptr<const Spectrum> spectrum,
            std::vector<Amplitude> amplitudes);

  /// Rescales the amplitudes to unit norm before validating.
  static PureState normalized(std::shared_ptr<const Spectrum> spectrum,
                              std::vector<Amplitude> amplitudes);
  static PureState eigenstate(std::shared_ptr<const Spectrum> spectrum,
                              std::size_t index);

  const Spectrum& spectrum() const { return *spectrum_; }
  const std::shared_ptr<const Spectrum>& spectrum_ptr() const {
    return spectrum_;
  }
  std::size_t dimension() const { return amplitudes_.size(); }
  std::span<const Amplitude> amplitudes() const { return amplitudes_; }
  Amplitude operator[](std::size_t i) const { return amplitudes_[i]; }

  /// Born weights |alpha_i|^2.
  std::vector<double> probabilities() const;

 private:
  std::shared_ptr<const Spectrum> spectrum_;
  std::vector<Amplitude> amplitudes_;
};

/// Pairs eigenvalues with amplitudes, sorts both by eigenvalue and builds the
/// state. With `normalize` the amplitudes are rescaled first.
PureState make_state(std::vector<double> eigenvalues,
                     std::vector<Amplitude> amplitudes, bool normalize = false);

/// Same as make_state, taking Born weights and zero phases.
PureState make_state_from_probabilities(std::vector<double> eigenvalues,
                                        std::vector<double> probabilities);

/// Outcomes p_1..p_M of a measurement sequence.
///
/// The count and sum are always tracked and are authoritative. The individual
/// outcomes are kept only when retention is on.
class OutcomeSequence {
 public:
  OutcomeSequence() = default;
  explicit OutcomeSequence(std::vector<double> outcomes);
  static OutcomeSequence from_stats(std::uint64_t count, double sum);
  static OutcomeSequence stats_only() { return from_stats(0, 0.0); }

  void push(double p);

  std::uint64_t count() const { return count_; }
  double sum() const { return sum_; }
  double mean() const;
  bool retains_outcomes() const { return retain_; }
  std::span<const double> outcomes() const { return outcomes_; }

 private:
  std::vector<double> outcomes_;
  std::uint64_t count_ = 0;
  double sum_ = 0.0;
  bool retain_ = true;
};

/// Hermitian, unit-trace, positive semidefinite matrix in the eigenbasis.
class DensityMatrix {
 public:
  explicit DensityMatrix(Eigen::MatrixXcd entries);

  const Eigen::MatrixXcd& entries() const { return entries_; }
  std::size_t dimension() const {
    return static_cast<std::size_t>(entries_.rows());
  }
  Amplitude operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  double min_eigenvalue() const;

 private:
  Eigen::MatrixXcd entries_;
};

DensityMatrix density_from_pure(const PureState& state);
/// tr rho^2
double purity(const DensityMatrix& rho);
/// tr(rho_a rho_b); real for Hermitian arguments.
double overlap_trace(const DensityMatrix& a, const DensityMatrix& b);

/// Smallest eigenvalue of the Hermitian part of `m`.
double min_hermitian_eigenvalue(const Eigen::MatrixXcd& m);

}  // namespace weakmeas
