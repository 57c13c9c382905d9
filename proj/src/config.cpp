#include "weakmeas/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace weakmeas {

namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "spectrum", "amplitudes",      "probabilities", "delta_p",
      "steps",    "trajectories",    "master_seed",   "convergence_tol",
      "bins",     "early_stop",      "threads",       "format"};
  return keys;
}

[[noreturn]] void bad_field(const std::string& key, const std::string& what) {
  throw ValidationError("config field '" + key + "': " + what);
}

std::vector<double> real_list(const json& value, const std::string& key) {
  if (!value.is_array()) bad_field(key, "expected a list of numbers");
  std::vector<double> out;
  for (const auto& v : value) {
    if (!v.is_number()) bad_field(key, "expected a list of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<Amplitude> complex_list(const json& value, const std::string& key) {
  if (!value.is_array()) bad_field(key, "expected a list of [re, im] pairs");
  std::vector<Amplitude> out;
  for (const auto& v : value) {
    if (v.is_number()) {
      out.emplace_back(v.get<double>(), 0.0);
      continue;
    }
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
        !v[1].is_number()) {
      bad_field(key, "expected a list of [re, im] pairs");
    }
    out.emplace_back(v[0].get<double>(), v[1].get<double>());
  }
  return out;
}

std::uint64_t count_field(const json& value, const std::string& key) {
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  if (value.is_number_integer() && value.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(value.get<std::int64_t>());
  }
  if (value.is_number_float()) {
    double d = value.get<double>();
    if (d >= 0.0 && d == static_cast<double>(static_cast<std::uint64_t>(d))) {
      return static_cast<std::uint64_t>(d);
    }
  }
  bad_field(key, "expected a non-negative integer");
}

double real_field(const json& value, const std::string& key) {
  if (!value.is_number()) bad_field(key, "expected a number");
  return value.get<double>();
}

}  // namespace

std::uint64_t parse_seed(const std::string& text) {
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    throw ValidationError("seed '" + text + "' is not a non-negative integer");
  }
  if (used != text.size() || text.starts_with('-')) {
    throw ValidationError("seed '" + text + "' is not a non-negative integer");
  }
  return value;
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!known_keys().contains(key)) {
      throw ValidationError("config: unknown field '" + key + "'");
    }
  }
  ExperimentConfig cfg;
  if (doc.contains("spectrum")) cfg.spectrum = real_list(doc["spectrum"], "spectrum");
  if (doc.contains("amplitudes")) {
    cfg.amplitudes = complex_list(doc["amplitudes"], "amplitudes");
  }
  if (doc.contains("probabilities")) {
    cfg.probabilities = real_list(doc["probabilities"], "probabilities");
  }
  if (doc.contains("delta_p")) cfg.delta_p = real_field(doc["delta_p"], "delta_p");
  if (doc.contains("steps")) cfg.steps = count_field(doc["steps"], "steps");
  if (doc.contains("trajectories")) {
    cfg.trajectories = count_field(doc["trajectories"], "trajectories");
  }
  if (doc.contains("master_seed")) {
    cfg.master_seed = count_field(doc["master_seed"], "master_seed");
  }
  if (doc.contains("convergence_tol")) {
    cfg.convergence_tol = real_field(doc["convergence_tol"], "convergence_tol");
  }
  if (doc.contains("bins")) cfg.bins = count_field(doc["bins"], "bins");
  if (doc.contains("early_stop")) {
    if (!doc["early_stop"].is_boolean()) bad_field("early_stop", "expected true/false");
    cfg.early_stop = doc["early_stop"].get<bool>();
  }
  if (doc.contains("threads")) {
    cfg.threads = static_cast<unsigned>(count_field(doc["threads"], "threads"));
  }
  if (doc.contains("format")) {
    if (!doc["format"].is_string()) bad_field("format", "expected \"csv\" or \"json\"");
    cfg.format = doc["format"].get<std::string>();
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " +
                          e.what());
  }
  return from_json(doc);
}

void ExperimentConfig::merge(const ExperimentConfig& o) {
  auto take = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  take(spectrum, o.spectrum);
  if (o.amplitudes) {
    amplitudes = o.amplitudes;
    probabilities.reset();
  }
  if (o.probabilities) {
    probabilities = o.probabilities;
    amplitudes.reset();
  }
  take(delta_p, o.delta_p);
  take(steps, o.steps);
  take(trajectories, o.trajectories);
  take(master_seed, o.master_seed);
  take(convergence_tol, o.convergence_tol);
  take(bins, o.bins);
  take(early_stop, o.early_stop);
  take(threads, o.threads);
  take(format, o.format);
}

void ExperimentConfig::apply_defaults() {
  if (!master_seed) {
    const char* env = std::getenv("SEED");
    master_seed = (env && *env) ? parse_seed(env) : 0;
  }
  if (!steps) steps = 1000;
  if (!trajectories) trajectories = 1000;
  if (!convergence_tol) convergence_tol = kDefaultConvergenceTol;
  if (!bins) bins = 101;
  if (!early_stop) early_stop = true;
  if (!threads) threads = 1;
  if (!format) format = "csv";
}

json ExperimentConfig::to_json() const {
  json doc = json::object();
  if (spectrum) doc["spectrum"] = *spectrum;
  if (amplitudes) {
    json list = json::array();
    for (const auto& a : *amplitudes) list.push_back({a.real(), a.imag()});
    doc["amplitudes"] = list;
  }
  if (probabilities) doc["probabilities"] = *probabilities;
  if (delta_p) doc["delta_p"] = *delta_p;
  if (steps) doc["steps"] = *steps;
  if (trajectories) doc["trajectories"] = *trajectories;
  if (master_seed) doc["master_seed"] = *master_seed;
  if (convergence_tol) doc["convergence_tol"] = *convergence_tol;
  if (bins) doc["bins"] = *bins;
  if (early_stop) doc["early_stop"] = *early_stop;
  if (threads) doc["threads"] = *threads;
  if (format) doc["format"] = *format;
  return doc;
}

Experiment resolve(const ExperimentConfig& c) {
  if (!c.spectrum) throw ValidationError("config: 'spectrum' is required");
  if (!c.delta_p) throw ValidationError("config: 'delta_p' is required");
  if (!c.amplitudes && !c.probabilities) {
    throw ValidationError("config: one of 'amplitudes' or 'probabilities' is required");
  }
  if (c.format && *c.format != "csv" && *c.format != "json") {
    throw ValidationError("config field 'format': expected \"csv\" or \"json\"");
  }
  PureState state = c.amplitudes
                        ? make_state(*c.spectrum, *c.amplitudes)
                        : make_state_from_probabilities(*c.spectrum, *c.probabilities);
  ApparatusConfig app(*c.delta_p);

  TrajectoryOptions trajectory;
  trajectory.max_steps = c.steps.value_or(1000);
  trajectory.convergence_tol = c.convergence_tol.value_or(kDefaultConvergenceTol);
  trajectory.stop_on_convergence = c.early_stop.value_or(true);
  trajectory.validate();

  EnsembleOptions ensemble;
  ensemble.trajectories = c.trajectories.value_or(1000);
  if (ensemble.trajectories < 1) {
    throw ValidationError("config field 'trajectories': must be >= 1");
  }
  ensemble.master_seed = c.master_seed.value_or(0);
  ensemble.trajectory = trajectory;
  ensemble.bins = c.bins.value_or(101);
  if (ensemble.bins < 1) throw ValidationError("config field 'bins': must be >= 1");
  ensemble.threads = c.threads.value_or(1);
  return Experiment{std::move(state), app, trajectory, ensemble};
}

}  // namespace weakmeas
