#include "weakmeas/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <utility>

namespace weakmeas {

Spectrum::Spectrum(std::vector<double> eigenvalues)
    : values_(std::move(eigenvalues)) {
  if (values_.size() < 2) {
    throw ValidationError("spectrum needs at least two eigenvalues");
  }
  for (double s : values_) {
    if (!std::isfinite(s)) {
      throw ValidationError("spectrum contains a non-finite eigenvalue");
    }
  }
  std::sort(values_.begin(), values_.end());
  auto repeated = std::adjacent_find(values_.begin(), values_.end());
  if (repeated != values_.end()) {
    std::ostringstream msg;
    msg << "spectrum must be non-degenerate (all eigenvalues distinct); "
        << "eigenvalue " << *repeated << " is repeated";
    throw ValidationError(msg.str());
  }
}

double Spectrum::min_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < values_.size(); ++i) {
    gap = std::min(gap, values_[i] - values_[i - 1]);
  }
  return gap;
}

ApparatusConfig::ApparatusConfig(double delta_p) : delta_p_(delta_p) {
  if (!(delta_p > 0.0) || !std::isfinite(delta_p)) {
    throw ValidationError("delta_p must be a finite number > 0");
  }
}

double ApparatusConfig::norm_squared() const {
  return 1.0 / (std::sqrt(std::numbers::pi) * delta_p_);
}

double ApparatusConfig::norm() const { return std::sqrt(norm_squared()); }

double ApparatusConfig::outcome_stddev() const {
  return delta_p_ / std::numbers::sqrt2;
}

namespace {

double norm_squared_of(std::span<const Amplitude> amplitudes) {
  double total = 0.0;
  for (const auto& a : amplitudes) total += std::norm(a);
  return total;
}

void check_dimension(const Spectrum& spectrum, std::size_t size) {
  if (spectrum.dimension() != size) {
    std::ostringstream msg;
    msg << "state has " << size << " amplitudes but the spectrum has "
        << spectrum.dimension() << " eigenvalues";
    throw ValidationError(msg.str());
  }
}

}  // namespace

PureState::PureState(std::shared_ptr<const Spectrum> spectrum,
                     std::vector<Amplitude> amplitudes)
    : spectrum_(std::move(spectrum)), amplitudes_(std::move(amplitudes)) {
  if (!spectrum_) throw ValidationError("state has no spectrum");
  check_dimension(*spectrum_, amplitudes_.size());
  for (const auto& a : amplitudes_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw ValidationError("state contains a non-finite amplitude");
    }
  }
  double n = norm_squared_of(amplitudes_);
  if (std::abs(n - 1.0) > kNormTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "state is not normalized: sum |alpha_i|^2 = " << n;
    throw ValidationError(msg.str());
  }
}

PureState PureState::normalized(std::shared_ptr<const Spectrum> spectrum,
                                 std::vector<Amplitude> amplitudes) {
  double n = norm_squared_of(amplitudes);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw ValidationError("amplitudes have zero or non-finite norm");
  }
  double scale = 1.0 / std::sqrt(n);
  for (auto& a : amplitudes) a *= scale;
  return PureState(std::move(spectrum), std::move(amplitudes));
}

PureState PureState::eigenstate(std::shared_ptr<const Spectrum> spectrum,
                                std::size_t index) {
  if (!spectrum || index >= spectrum->dimension()) {
    throw ValidationError("eigenstate index out of range");
  }
  std::vector<Amplitude> amplitudes(spectrum->dimension());
  amplitudes[index] = 1.0;
  return PureState(std::move(spectrum), std::move(amplitudes));
}

std::vector<double> PureState::probabilities() const {
  std::vector<double> out(amplitudes_.size());
  std::transform(amplitudes_.begin(), amplitudes_.end(), out.begin(),
                 [](const Amplitude& a) { return std::norm(a); });
  return out;
}

PureState make_state(std::vector<double> eigenvalues,
                     std::vector<Amplitude> amplitudes, bool normalize) {
  if (eigenvalues.size() != amplitudes.size()) {
    std::ostringstream msg;
    msg << "got " << amplitudes.size() << " amplitudes for "
        << eigenvalues.size() << " eigenvalues";
    throw ValidationError(msg.str());
  }
  std::vector<std::size_t> order(eigenvalues.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return eigenvalues[a] < eigenvalues[b];
  });
  std::vector<double> sorted_values;
  std::vector<Amplitude> sorted_amplitudes;
  sorted_values.reserve(order.size());
  sorted_amplitudes.reserve(order.size());
  for (std::size_t k : order) {
    sorted_values.push_back(eigenvalues[k]);
    sorted_amplitudes.push_back(amplitudes[k]);
  }
  auto spectrum = std::make_shared<const Spectrum>(std::move(sorted_values));
  if (normalize) {
    return PureState::normalized(std::move(spectrum),
                                 std::move(sorted_amplitudes));
  }
  return PureState(std::move(spectrum), std::move(sorted_amplitudes));
}

PureState make_state_from_probabilities(std::vector<double> eigenvalues,
                                        std::vector<double> probabilities) {
  std::vector<Amplitude> amplitudes;
  amplitudes.reserve(probabilities.size());
  double total = 0.0;
  for (double w : probabilities) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError("probabilities must be finite and >= 0");
    }
    total += w;
    amplitudes.emplace_back(std::sqrt(w), 0.0);
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities must sum to 1, got " << total;
    throw ValidationError(msg.str());
  }
  return make_state(std::move(eigenvalues), std::move(amplitudes),
                    /*normalize=*/true);
}

OutcomeSequence::OutcomeSequence(std::vector<double> outcomes)
    : outcomes_(std::move(outcomes)), count_(outcomes_.size()) {
  // Summing in sorted order makes the total independent of outcome order.
  std::vector<double> sorted = outcomes_;
  std::sort(sorted.begin(), sorted.end());
  for (double p : sorted) sum_ += p;
}

OutcomeSequence OutcomeSequence::from_stats(std::uint64_t count, double sum) {
  OutcomeSequence seq;
  seq.count_ = count;
  seq.sum_ = sum;
  seq.retain_ = false;
  return seq;
}

void OutcomeSequence::push(double p) {
  ++count_;
  sum_ += p;
  if (retain_) outcomes_.push_back(p);
}

double OutcomeSequence::mean() const {
  if (count_ == 0) throw ValidationError("mean of an empty sequence");
  return sum_ / static_cast<double>(count_);
}

double min_hermitian_eigenvalue(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd hermitian = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      hermitian, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries)
    : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw ValidationError("density matrix must be square and non-empty");
  }
  double asym = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kHermitianTolerance) {
    throw ValidationError("density matrix is not Hermitian");
  }
  Amplitude tr = entries_.trace();
  if (std::abs(tr - Amplitude(1.0)) > kTraceTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "density matrix trace is " << tr.real() << ", expected 1";
    throw ValidationError(msg.str());
  }
  if (min_eigenvalue() < -kPositivityTolerance) {
    throw ValidationError("density matrix has a negative eigenvalue");
  }
}

double DensityMatrix::min_eigenvalue() const {
  return min_hermitian_eigenvalue(entries_);
}

DensityMatrix density_from_pure(const PureState& state) {
  const auto d = static_cast<Eigen::Index>(state.dimension());
  Eigen::VectorXcd psi(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    psi(i) = state[static_cast<std::size_t>(i)];
  }
  return DensityMatrix(psi * psi.adjoint());
}

double purity(const DensityMatrix& rho) { return overlap_trace(rho, rho); }

double overlap_trace(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dimension() != b.dimension()) {
    throw ValidationError("overlap_trace: dimension mismatch");
  }
  // tr(AB) = sum_ij A_ij B_ji
  return (a.entries().cwiseProduct(b.entries().transpose())).sum().real();
}

}  // namespace weakmeas
