#include <doctest.h>

#include <cmath>
#include <complex>

#include "helpers.hpp"
#include "weakmeas/state.hpp"

using namespace weakmeas;

TEST_CASE("spectrum is sorted and rejects degeneracy") {
  Spectrum s({3.0, -1.0, 0.5});
  CHECK(s[0] == -1.0);
  CHECK(s[2] == 3.0);
  CHECK(s.min_gap() == doctest::Approx(1.5));

  CHECK_THROWS_AS(Spectrum({1.0}), ValidationError);
  CHECK_THROWS_WITH_AS(Spectrum({1.0, 2.0, 1.0}),
                       doctest::Contains("non-degenerate"), ValidationError);
  CHECK_THROWS_AS(Spectrum({1.0, NAN}), ValidationError);
}

TEST_CASE("apparatus normalization constant") {
  ApparatusConfig app(1.0);
  CHECK(app.norm() == doctest::Approx(std::pow(M_PI, -0.25)).epsilon(1e-15));
  CHECK(app.norm_squared() * std::sqrt(M_PI * 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(ApparatusConfig(0.0), ValidationError);
  CHECK_THROWS_AS(ApparatusConfig(-2.0), ValidationError);
}

TEST_CASE("make_state keeps eigenvalue/amplitude pairs together") {
  auto state = weakmeas::testing::reference_state();
  CHECK(state.spectrum()[0] == -1.0);
  CHECK(std::norm(state[0]) == doctest::Approx(0.2));
  CHECK(std::norm(state[1]) == doctest::Approx(0.8));

  auto from_probs = make_state_from_probabilities({1.0, -1.0}, {0.8, 0.2});
  CHECK(weakmeas::testing::max_gap(state, from_probs) < 1e-15);
}

TEST_CASE("pure state validation") {
  auto spectrum = weakmeas::testing::qubit_spectrum();
  CHECK_THROWS_AS(PureState(spectrum, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(PureState(spectrum, {1.0}), ValidationError);
  CHECK_THROWS_AS(PureState::normalized(spectrum, {0.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(make_state_from_probabilities({1.0, -1.0}, {0.5, 0.6}),
                  ValidationError);

  auto s = PureState::normalized(spectrum, {Amplitude(3.0, 0.0), Amplitude(0.0, 4.0)});
  CHECK(std::norm(s[0]) == doctest::Approx(9.0 / 25.0));
  CHECK(std::arg(s[1]) == doctest::Approx(M_PI / 2));
}

TEST_CASE("outcome sequence statistics") {
  OutcomeSequence seq({1.0, 2.0, 4.0});
  CHECK(seq.count() == 3);
  CHECK(seq.sum() == 7.0);
  seq.push(1.0);
  CHECK(seq.count() == 4);
  CHECK(seq.outcomes().size() == 4);

  auto stats = OutcomeSequence::stats_only();
  stats.push(2.0);
  stats.push(3.0);
  CHECK(stats.count() == 2);
  CHECK(stats.mean() == 2.5);
  CHECK_FALSE(stats.retains_outcomes());
  CHECK(stats.outcomes().empty());
  CHECK_THROWS_AS(OutcomeSequence{}.mean(), ValidationError);
}

TEST_CASE("density matrices: purity and overlap") {
  auto psi = weakmeas::testing::reference_state();
  auto rho = density_from_pure(psi);
  CHECK(purity(rho) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(overlap_trace(rho, rho) - purity(rho)) < 1e-12);

  Eigen::MatrixXcd mixed = 0.5 * Eigen::MatrixXcd::Identity(2, 2);
  DensityMatrix half(mixed);
  CHECK(purity(half) == doctest::Approx(0.5));

  Eigen::MatrixXcd three = Eigen::MatrixXcd::Identity(3, 3) / 3.0;
  CHECK_THROWS_AS(overlap_trace(rho, DensityMatrix(three)), ValidationError);

  Eigen::MatrixXcd bad_trace = Eigen::MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix{bad_trace}, ValidationError);
  Eigen::MatrixXcd not_hermitian = mixed;
  not_hermitian(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix{not_hermitian}, ValidationError);
  Eigen::MatrixXcd negative(2, 2);
  negative << 1.2, 0.0, 0.0, -0.2;
  CHECK_THROWS_AS(DensityMatrix{negative}, ValidationError);
}

TEST_CASE("overlap_trace is real and symmetric for random pure states") {
  Stream stream(7);
  for (int k = 0; k < 50; ++k) {
    auto a = density_from_pure(weakmeas::testing::random_state(stream, 3));
    auto b = density_from_pure(weakmeas::testing::random_state(stream, 3));
    double ab = overlap_trace(a, b);
    CHECK(ab == doctest::Approx(overlap_trace(b, a)).epsilon(1e-14));
    CHECK(ab >= -1e-15);
    CHECK(ab <= 1.0 + 1e-15);
  }
}
