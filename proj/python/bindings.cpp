#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "weakmeas/acceptance.hpp"
#include "weakmeas/analytics.hpp"
#include "weakmeas/config.hpp"
#include "weakmeas/measurement.hpp"
#include "weakmeas/report.hpp"
#include "weakmeas/trajectories.hpp"

namespace py = pybind11;
using namespace weakmeas;

namespace {

OutcomeSequence sequence(std::vector<double> outcomes) {
  return OutcomeSequence(std::move(outcomes));
}

py::dict record_dict(const TrajectoryRecord& r) {
  py::dict d;
  d["seed_id"] = r.seed_id;
  d["steps_taken"] = r.steps_taken;
  d["running_average"] = r.running_average;
  d["final_state"] = r.final_state;
  d["terminal_index"] = r.terminal_index;
  d["terminal_fidelity"] = r.terminal_fidelity;
  d["first_outcome"] = r.first_outcome;
  d["first_converged_step"] = r.first_converged_step;
  std::vector<double> outcomes(r.outcomes.outcomes().begin(), r.outcomes.outcomes().end());
  d["outcomes"] = outcomes;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Repeated weak measurements of a finite-dimensional observable.";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::class_<ApparatusConfig>(m, "Apparatus")
      .def(py::init<double>(), py::arg("delta_p"))
      .def_property_readonly("delta_p", &ApparatusConfig::delta_p)
      .def_property_readonly("outcome_stddev", &ApparatusConfig::outcome_stddev);

  py::class_<PureState>(m, "PureState")
      .def_property_readonly("eigenvalues",
                             [](const PureState& s) {
                               auto v = s.spectrum().values();
                               return std::vector<double>(v.begin(), v.end());
                             })
      .def_property_readonly("amplitudes", [](const PureState& s) {
                               return std::vector<Amplitude>(s.amplitudes().begin(),
                                                             s.amplitudes().end());
                             })
      .def_property_readonly("probabilities", &PureState::probabilities)
      .def("__len__", &PureState::dimension)
      .def("density_matrix",
           [](const PureState& s) { return Eigen::MatrixXcd(density_from_pure(s).entries()); });

  m.def("make_state", &make_state, py::arg("eigenvalues"), py::arg("amplitudes"),
        py::arg("normalize") = false,
        "State from eigenvalues and complex amplitudes; both are sorted by eigenvalue.");
  m.def("make_state_from_probabilities", &make_state_from_probabilities, py::arg("eigenvalues"),
        py::arg("probabilities"));

  py::class_<Stream>(m, "Stream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def_static("for_trajectory", &Stream::for_trajectory, py::arg("master_seed"),
                  py::arg("index"))
      .def("uniform", &Stream::uniform)
      .def("normal", &Stream::normal, py::arg("mean"), py::arg("stddev"));

  m.def("outcome_density", &outcome_density, py::arg("state"), py::arg("apparatus"), py::arg("p"));
  m.def("sample_outcome",
        py::overload_cast<const PureState&, const ApparatusConfig&, Stream&>(&sample_outcome),
        py::arg("state"), py::arg("apparatus"), py::arg("stream"));
  m.def("collapse", &collapse, py::arg("state"), py::arg("apparatus"), py::arg("p"));
  m.def("povm_element", [](const PureState& s, const ApparatusConfig& a, double p) {
    return povm_element(s.spectrum(), a, p);
  }, py::arg("state"), py::arg("apparatus"), py::arg("p"));
  m.def("povm_completeness_deviation", [](const PureState& s, const ApparatusConfig& a) {
    return povm_completeness(s.spectrum(), a).max_abs_deviation;
  }, py::arg("state"), py::arg("apparatus"));
  m.def("joint_density", [](const PureState& s, const ApparatusConfig& a, std::vector<double> ps) {
    return joint_density(s, a, sequence(std::move(ps)));
  }, py::arg("state"), py::arg("apparatus"), py::arg("outcomes"));
  m.def("log_joint_density",
        [](const PureState& s, const ApparatusConfig& a, std::vector<double> ps) {
          return log_joint_density(s, a, sequence(std::move(ps)));
        },
        py::arg("state"), py::arg("apparatus"), py::arg("outcomes"));
  m.def("state_after_sequence",
        [](const PureState& s, const ApparatusConfig& a, std::vector<double> ps) {
          return state_after_sequence(s, a, sequence(std::move(ps)));
        },
        py::arg("state"), py::arg("apparatus"), py::arg("outcomes"));
  m.def("strong_sample", &strong_sample, py::arg("state"), py::arg("stream"));

  m.def("ensemble_mean", &ensemble_mean, py::arg("state"));
  m.def("outcome_variance", &outcome_variance, py::arg("state"), py::arg("apparatus"));
  m.def("required_weak_repetitions", &required_weak_repetitions, py::arg("delta_p"),
        py::arg("delta_s"), py::arg("strong_repetitions"));
  m.def("saturation_ratio", &saturation_ratio, py::arg("f"));
  m.def("single_step_reduced_density", [](const PureState& s, const ApparatusConfig& a) {
    return single_step_reduced_density(s, a).entries;
  }, py::arg("state"), py::arg("apparatus"));
  m.def("expected_reduced_density_after",
        [](const PureState& s, const ApparatusConfig& a, double m) {
          return Eigen::MatrixXcd(expected_reduced_density_after(s, a, m).entries());
        },
        py::arg("state"), py::arg("apparatus"), py::arg("repetitions"));
  m.def("statistical_error", &statistical_error, py::arg("apparatus"), py::arg("repetitions"));
  m.def("disturbance", &disturbance, py::arg("state"), py::arg("epsilon"));
  m.def("disturbance_limit", &disturbance_limit, py::arg("state"));
  m.def("average_density", &average_density, py::arg("state"), py::arg("apparatus"),
        py::arg("repetitions"), py::arg("y"));
  m.def("average_cdf", &average_cdf, py::arg("state"), py::arg("apparatus"),
        py::arg("repetitions"), py::arg("y"));

  m.def("run_trajectory",
        [](const PureState& s, const ApparatusConfig& a, std::uint64_t max_steps, double tol,
           bool early_stop, bool retain_outcomes, std::uint64_t seed) {
          TrajectoryOptions o;
          o.max_steps = max_steps;
          o.convergence_tol = tol;
          o.stop_on_convergence = early_stop;
          o.retain_outcomes = retain_outcomes;
          Stream stream = Stream::for_trajectory(seed, 0);
          return record_dict(run_trajectory(s, a, o, stream));
        },
        py::arg("state"), py::arg("apparatus"), py::arg("max_steps") = 1000,
        py::arg("convergence_tol") = kDefaultConvergenceTol, py::arg("early_stop") = true,
        py::arg("retain_outcomes") = false, py::arg("seed") = 0,
        "Same stream as trajectory 0 of an ensemble with master seed `seed`.");

  m.def("run_ensemble",
        [](const PureState& s, const ApparatusConfig& a, std::uint64_t trajectories,
           std::uint64_t max_steps, double tol, bool early_stop, std::uint64_t seed,
           std::size_t bins, unsigned threads) {
          EnsembleOptions o;
          o.trajectories = trajectories;
          o.master_seed = seed;
          o.trajectory.max_steps = max_steps;
          o.trajectory.convergence_tol = tol;
          o.trajectory.stop_on_convergence = early_stop;
          o.bins = bins;
          o.threads = threads;
          std::optional<EnsembleStats> stats;
          {
            py::gil_scoped_release release;
            stats.emplace(run_ensemble(s, a, o));
          }
          return py::module_::import("json").attr("loads")(ensemble_json(*stats).dump());
        },
        py::arg("state"), py::arg("apparatus"), py::arg("trajectories") = 1000,
        py::arg("max_steps") = 1000, py::arg("convergence_tol") = kDefaultConvergenceTol,
        py::arg("early_stop") = true, py::arg("seed") = 0, py::arg("bins") = 101,
        py::arg("threads") = 1, "Ensemble summary as a dict (same content as the CLI JSON).");

  m.def("run_acceptance",
        [](std::vector<int> only, std::uint64_t seed, unsigned threads) {
          acceptance::Options o;
          o.only = std::move(only);
          o.seed = seed;
          o.threads = threads;
          std::vector<acceptance::CriterionResult> results;
          {
            py::gil_scoped_release release;
            results = acceptance::run(o);
          }
          py::list out;
          for (const auto& r : results) {
            py::dict d;
            d["id"] = r.id;
            d["title"] = r.title;
            d["passed"] = r.passed;
            d["details"] = r.details;
            d["seconds"] = r.seconds;
            out.append(d);
          }
          return out;
        },
        py::arg("only") = std::vector<int>{}, py::arg("seed") = 20261018, py::arg("threads") = 0);
}
