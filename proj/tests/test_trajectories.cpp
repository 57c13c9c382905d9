#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "weakmeas/analytics.hpp"
#include "weakmeas/measurement.hpp"
#include "weakmeas/trajectories.hpp"

using namespace weakmeas;
using weakmeas::testing::max_gap;
using weakmeas::testing::reference_state;
using weakmeas::testing::symmetric_qubit;

TEST_CASE("eigenstates terminate after one step") {
  auto spectrum = weakmeas::testing::qubit_spectrum();
  Stream stream(3);
  TrajectoryOptions opts;
  for (std::size_t k = 0; k < 2; ++k) {
    auto rec = run_trajectory(PureState::eigenstate(spectrum, k), ApparatusConfig(10.0), opts,
                              stream);
    CHECK(rec.steps_taken == 1);
    REQUIRE(rec.terminal_index.has_value());
    CHECK(*rec.terminal_index == k);
    CHECK(rec.first_converged_step == std::optional<std::uint64_t>(1));
  }
}

TEST_CASE("strong regime converges in one step") {
  Stream stream(8);
  TrajectoryOptions opts;
  for (int k = 0; k < 200; ++k) {
    auto rec = run_trajectory(reference_state(), ApparatusConfig(1e-3), opts, stream);
    CHECK(rec.steps_taken == 1);
    CHECK(rec.terminal_index.has_value());
  }
}

TEST_CASE("trajectory options are validated") {
  TrajectoryOptions opts;
  opts.max_steps = 0;
  CHECK_THROWS_AS(opts.validate(), ValidationError);
  opts.max_steps = 10;
  opts.convergence_tol = 0.0;
  CHECK_THROWS_AS(opts.validate(), ValidationError);
  opts.convergence_tol = 1.0;
  CHECK_THROWS_AS(opts.validate(), ValidationError);
}

TEST_CASE("trajectory bookkeeping") {
  Stream stream(12);
  TrajectoryOptions opts;
  opts.max_steps = 300;
  opts.stop_on_convergence = false;
  opts.retain_outcomes = true;
  auto rec = run_trajectory(reference_state(), ApparatusConfig(10.0), opts, stream);
  CHECK(rec.steps_taken == 300);
  REQUIRE(rec.outcomes.retains_outcomes());
  CHECK(rec.outcomes.outcomes().size() == 300);
  CHECK(rec.first_outcome == rec.outcomes.outcomes().front());
  CHECK(rec.running_average == doctest::Approx(rec.outcomes.mean()).epsilon(1e-14));

  // Folding single-step collapses over the retained outcomes reproduces the final state.
  PureState folded = reference_state();
  for (double p : rec.outcomes.outcomes()) folded = collapse(folded, ApparatusConfig(10.0), p);
  CHECK(max_gap(folded, rec.final_state) <= 1e-9);
}

TEST_CASE("same seed, same trajectory") {
  TrajectoryOptions opts;
  opts.retain_outcomes = true;
  Stream a = Stream::for_trajectory(42, 7);
  Stream b = Stream::for_trajectory(42, 7);
  auto ra = run_trajectory(reference_state(), ApparatusConfig(10.0), opts, a);
  auto rb = run_trajectory(reference_state(), ApparatusConfig(10.0), opts, b);
  CHECK(std::ranges::equal(ra.outcomes.outcomes(), rb.outcomes.outcomes()));
  CHECK(ra.steps_taken == rb.steps_taken);
  CHECK(max_gap(ra.final_state, rb.final_state) == 0.0);
}

TEST_CASE("one more step after convergence barely moves the Born weights") {
  Stream stream(5);
  ApparatusConfig app(10.0);
  TrajectoryOptions opts;
  opts.max_steps = 100000;
  for (int k = 0; k < 200; ++k) {
    auto rec = run_trajectory(reference_state(), app, opts, stream);
    REQUIRE(rec.terminal_index.has_value());
    CHECK(rec.terminal_fidelity >= 1.0 - opts.convergence_tol);
    auto before = rec.final_state.probabilities();
    auto after = collapse(rec.final_state, app, sample_outcome(rec.final_state, app, stream))
                     .probabilities();
    double change = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i) change += std::abs(after[i] - before[i]);
    CHECK(change < 10.0 * opts.convergence_tol);
  }
}

TEST_CASE("histogram") {
  auto h = Histogram::uniform(0.0, 1.0, 4);
  CHECK(h.bins() == 4);
  for (double y : {-0.1, 0.0, 0.2, 0.25, 0.99, 1.0, 3.0}) h.add(y);
  CHECK(h.underflow == 1);
  CHECK(h.overflow == 2);
  CHECK(h.counts == std::vector<std::uint64_t>{2, 1, 0, 1});
  CHECK(h.total() == 7);
  CHECK_THROWS_AS(Histogram(std::vector<double>{1.0}), ValidationError);
  CHECK_THROWS_AS(Histogram(std::vector<double>{0.0, 0.0}), ValidationError);
}

namespace {

EnsembleOptions fixed_m(std::uint64_t r, std::uint64_t m, std::uint64_t seed) {
  EnsembleOptions o;
  o.trajectories = r;
  o.master_seed = seed;
  o.trajectory.max_steps = m;
  o.trajectory.stop_on_convergence = false;
  return o;
}

}  // namespace

TEST_CASE("ensemble with one trajectory equals run_trajectory") {
  ApparatusConfig app(10.0);
  auto opts = fixed_m(1, 200, 77);
  opts.keep_records = true;
  auto stats = run_ensemble(reference_state(), app, opts);
  Stream stream = Stream::for_trajectory(77, 0);
  auto rec = run_trajectory(reference_state(), app, opts.trajectory, stream);
  REQUIRE(stats.records.size() == 1);
  CHECK(stats.records[0].running_average == rec.running_average);
  CHECK(stats.y_mean == rec.running_average);
  CHECK(max_gap(stats.records[0].final_state, rec.final_state) == 0.0);
}

TEST_CASE("ensemble is independent of thread count") {
  ApparatusConfig app(10.0);
  auto opts = fixed_m(300, 100, 1234);
  opts.threads = 1;
  auto one = run_ensemble(reference_state(), app, opts);
  for (unsigned t : {2u, 3u, 8u}) {
    opts.threads = t;
    auto many = run_ensemble(reference_state(), app, opts);
    CHECK(many.y_histogram.counts == one.y_histogram.counts);
    CHECK(many.y_mean == one.y_mean);
    CHECK(many.y_variance == one.y_variance);
    CHECK((many.mean_final_density.entries() - one.mean_final_density.entries())
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK(many.steps_taken == one.steps_taken);
  }
}

TEST_CASE("ensemble statistics") {
  ApparatusConfig app(10.0);
  auto stats = run_ensemble(reference_state(), app, fixed_m(2000, 50, 9));
  CHECK(stats.trajectory_count == 2000);
  CHECK(stats.common_steps == std::optional<std::uint64_t>(50));
  REQUIRE(stats.tv_distance.has_value());
  CHECK(*stats.tv_distance < 0.1);
  CHECK(stats.y_histogram.total() == 2000);

  // First outcome follows the single-step law.
  CHECK(std::abs(stats.first_outcome_mean - 0.6) <= 4.0 * std::sqrt(50.64 / 2000.0));

  auto& rho = stats.mean_final_density;
  CHECK(std::abs(rho.entries().trace().real() - 1.0) < 1e-12);
  CHECK(rho.min_eigenvalue() > -1e-12);
  auto expected = expected_reduced_density_after(reference_state(), app, 50.0);
  CHECK(std::abs(rho(0, 1) - expected(0, 1)) <= 5.0 * stats.density_standard_error(0, 1) + 1e-12);
}

TEST_CASE("empirical_vs_analytic") {
  ApparatusConfig app(10.0);
  auto stats = run_ensemble(reference_state(), app, fixed_m(10, 20, 1));
  auto& edges = stats.y_histogram.edges;

  auto analytic = average_distribution_binned(reference_state(), app, 20, edges);
  double tv = empirical_vs_analytic(stats, analytic);
  CHECK(tv >= 0.0);
  CHECK(tv <= 1.0);

  // Identical masses give zero; disjoint support gives one.
  AverageDistribution same;
  same.grid = edges;
  same.bin_masses.assign(edges.size() - 1, 0.0);
  for (std::size_t i = 0; i < same.bin_masses.size(); ++i) {
    same.bin_masses[i] = double(stats.y_histogram.counts[i]) / 10.0;
  }
  same.underflow = double(stats.y_histogram.underflow) / 10.0;
  same.overflow = double(stats.y_histogram.overflow) / 10.0;
  CHECK(empirical_vs_analytic(stats, same) == doctest::Approx(0.0).epsilon(1e-15));

  AverageDistribution disjoint = same;
  std::fill(disjoint.bin_masses.begin(), disjoint.bin_masses.end(), 0.0);
  disjoint.underflow = 0.0;
  disjoint.overflow = 0.0;
  if (stats.y_histogram.overflow == 0) {
    disjoint.overflow = 1.0;
  } else {
    disjoint.underflow = 1.0;
    REQUIRE(stats.y_histogram.underflow == 0);
  }
  CHECK(empirical_vs_analytic(stats, disjoint) == doctest::Approx(1.0).epsilon(1e-15));

  AverageDistribution wrong = same;
  wrong.bin_masses.pop_back();
  CHECK_THROWS_AS(empirical_vs_analytic(stats, wrong), ValidationError);
  AverageDistribution empty;
  CHECK_THROWS_AS(empirical_vs_analytic(stats, empty), ValidationError);
}

TEST_CASE("terminal frequencies") {
  ApparatusConfig app(10.0);

  SUBCASE("unconverged trajectories are rejected") {
    EnsembleOptions o;
    o.trajectories = 20;
    o.trajectory.max_steps = 2;
    auto stats = run_ensemble(reference_state(), app, o);
    REQUIRE(stats.unconverged > 0);
    CHECK_THROWS_WITH_AS(terminal_frequencies(stats), doctest::Contains("did not converge"),
                         ValidationError);
  }
  SUBCASE("eigenstate gives zero chi-square") {
    EnsembleOptions o;
    o.trajectories = 50;
    auto e = PureState::eigenstate(weakmeas::testing::qubit_spectrum(), 1);
    auto stats = run_ensemble(e, app, o);
    auto tf = terminal_frequencies(stats);
    CHECK(tf.frequencies == std::vector<double>{0.0, 1.0});
    CHECK(tf.chi_square == doctest::Approx(0.0));
  }
  SUBCASE("converged fraction is monotone") {
    EnsembleOptions o;
    o.trajectories = 200;
    o.trajectory.max_steps = 5000;
    o.master_seed = 3;
    auto stats = run_ensemble(symmetric_qubit(), app, o);
    CHECK(stats.unconverged == 0);
    double prev = 0.0;
    for (std::uint64_t m = 0; m <= 5000; m += 50) {
      double f = converged_fraction_by(stats, m);
      CHECK(f >= prev);
      prev = f;
    }
    CHECK(prev == 1.0);
    auto tf = terminal_frequencies(stats);
    CHECK(tf.degrees_of_freedom == 1);
    CHECK(tf.p_value > 1e-4);
  }
}
