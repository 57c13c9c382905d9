#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "weakmeas/config.hpp"

using namespace weakmeas;
using nlohmann::json;

TEST_CASE("config parsing") {
  auto cfg = ExperimentConfig::from_json(json::parse(R"({
    "spectrum": [1, -1],
    "amplitudes": [[0.8944271909999159, 0], 0.4472135954999579],
    "delta_p": 10,
    "steps": 500,
    "trajectories": 20,
    "master_seed": 7,
    "early_stop": false
  })"));
  auto exp = resolve(cfg);
  CHECK(exp.state.spectrum()[0] == -1.0);
  CHECK(std::norm(exp.state[1]) == doctest::Approx(0.8));
  CHECK(exp.app.delta_p() == 10.0);
  CHECK(exp.trajectory.max_steps == 500);
  CHECK_FALSE(exp.trajectory.stop_on_convergence);
  CHECK(exp.ensemble.trajectories == 20);
  CHECK(exp.ensemble.master_seed == 7);

  auto round = ExperimentConfig::from_json(cfg.to_json());
  CHECK(round.to_json() == cfg.to_json());
}

TEST_CASE("config errors") {
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_json(json::parse(R"({"spectra": [1]})")),
                       doctest::Contains("unknown field 'spectra'"), ValidationError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"({"steps": -3})")),
                  ValidationError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(json::parse(R"([1, 2])")), ValidationError);
  CHECK_THROWS_WITH_AS(resolve(ExperimentConfig{}), doctest::Contains("'spectrum' is required"),
                       ValidationError);

  auto degenerate = ExperimentConfig::from_json(
      json::parse(R"({"spectrum": [1, 1], "probabilities": [0.5, 0.5], "delta_p": 1})"));
  CHECK_THROWS_WITH_AS(resolve(degenerate),
                       doctest::Contains("non-degenerate (all eigenvalues distinct)"),
                       ValidationError);

  auto unnormalized = ExperimentConfig::from_json(
      json::parse(R"({"spectrum": [1, -1], "amplitudes": [1, 1], "delta_p": 1})"));
  CHECK_THROWS_WITH_AS(resolve(unnormalized), doctest::Contains("not normalized"),
                       ValidationError);

  auto bad_dp = ExperimentConfig::from_json(
      json::parse(R"({"spectrum": [1, -1], "probabilities": [0.5, 0.5], "delta_p": 0})"));
  CHECK_THROWS_AS(resolve(bad_dp), ValidationError);

  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/config.json"), ValidationError);
}

TEST_CASE("merge precedence") {
  auto base = ExperimentConfig::from_json(
      json::parse(R"({"spectrum": [1, -1], "probabilities": [0.5, 0.5], "delta_p": 1, "steps": 5})"));
  ExperimentConfig flags;
  flags.steps = 9;
  flags.amplitudes = std::vector<Amplitude>{1.0, 0.0};
  base.merge(flags);
  CHECK(base.steps == std::optional<std::uint64_t>(9));
  CHECK(base.delta_p == std::optional<double>(1.0));
  CHECK(base.amplitudes.has_value());
  CHECK_FALSE(base.probabilities.has_value());
}

TEST_CASE("seed defaults") {
  CHECK(parse_seed("42") == 42);
  CHECK(parse_seed("0x10") == 16);
  CHECK_THROWS_AS(parse_seed("-1"), ValidationError);
  CHECK_THROWS_AS(parse_seed("12abc"), ValidationError);

  ::setenv("SEED", "99", 1);
  ExperimentConfig a;
  a.apply_defaults();
  CHECK(a.master_seed == std::optional<std::uint64_t>(99));

  ExperimentConfig b;
  b.master_seed = 5;
  b.apply_defaults();
  CHECK(b.master_seed == std::optional<std::uint64_t>(5));

  ::unsetenv("SEED");
  ExperimentConfig c;
  c.apply_defaults();
  CHECK(c.master_seed == std::optional<std::uint64_t>(0));
}

TEST_CASE("config file load") {
  const std::string path = "weakmeas_test_config.json";
  {
    std::ofstream out(path);
    out << R"({"spectrum": [0, 1, 2], "probabilities": [0.2, 0.3, 0.5], "delta_p": 2.5})";
  }
  auto exp = resolve(ExperimentConfig::load(path));
  CHECK(exp.state.dimension() == 3);
  CHECK(std::norm(exp.state[2]) == doctest::Approx(0.5));
  std::remove(path.c_str());
}
