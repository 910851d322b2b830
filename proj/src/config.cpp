#include "qbt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace qbt {

using nlohmann::json;

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Steady:
      return "steady";
    case Mode::Curves:
      return "curves";
    case Mode::Validate:
      return "validate";
  }
  return "?";
}

State InitialState::build() const {
  switch (kind) {
    case Kind::Ground:
      return ground_state();
    case Kind::Excited:
      return excited_state();
    case Kind::PhiPlus:
      return phi_plus();
    case Kind::Custom: {
      Ket psi(4);
      for (int i = 0; i < 4; ++i) psi(i) = amplitudes[static_cast<std::size_t>(i)];
      return State::from_ket(psi);
    }
  }
  throw std::logic_error("unknown initial state");
}

ExperimentConfig::ExperimentConfig() {
  kappa_grid.reserve(1001);
  for (int i = 0; i <= 1000; ++i) kappa_grid.push_back(i / 100.0);
}

ModelParams ExperimentConfig::model(Coupling c, double k) const {
  ModelParams p;
  p.gamma = gamma;
  p.kappa = k;
  p.omega0 = omega0;
  p.beta_omega_B = beta_omega_B;
  p.beta_omega_F = beta_omega_F;
  p.coupling = c;
  return p;
}

MeasurementScheme ExperimentConfig::scheme(Unravelling u, double e) const {
  MeasurementScheme s;
  s.kind = u;
  s.eta = e;
  s.dt = dt;
  return s;
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void require(bool ok, const std::string& msg) {
  if (!ok) fail(msg);
}

double number(const json& v, const std::string& key) {
  require(v.is_number(), "'" + key + "' must be a number");
  const double x = v.get<double>();
  require(std::isfinite(x), "'" + key + "' must be finite");
  return x;
}

std::vector<double> numbers(const json& v, const std::string& key) {
  std::vector<double> out;
  if (v.is_array()) {
    require(!v.empty(), "'" + key + "' must not be empty");
    for (const json& e : v) out.push_back(number(e, key));
  } else {
    out.push_back(number(v, key));
  }
  return out;
}

std::uint64_t count(const json& v, const std::string& key) {
  require(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0),
          "'" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

template <typename E>
E parse_enum(const json& v, const std::string& key, std::initializer_list<std::pair<const char*, E>> names) {
  require(v.is_string(), "'" + key + "' must be a string");
  const std::string s = v.get<std::string>();
  for (const auto& [name, value] : names)
    if (s == name) return value;
  fail("'" + key + "': unknown value '" + s + "'");
}

template <typename E>
std::vector<E> parse_enums(const json& v, const std::string& key,
                           std::initializer_list<std::pair<const char*, E>> names) {
  std::vector<E> out;
  if (v.is_array()) {
    require(!v.empty(), "'" + key + "' must not be empty");
    for (const json& e : v) out.push_back(parse_enum(e, key, names));
  } else {
    out.push_back(parse_enum(v, key, names));
  }
  return out;
}

const std::initializer_list<std::pair<const char*, Coupling>> kCouplings = {
    {"sigma_minus", Coupling::SigmaMinus}, {"sigma_x_half", Coupling::SigmaXHalf}};
const std::initializer_list<std::pair<const char*, Unravelling>> kMeasurements = {
    {"photodetection", Unravelling::Photodetection}, {"homodyne", Unravelling::Homodyne}, {"none", Unravelling::None}};
const std::initializer_list<std::pair<const char*, Mode>> kModes = {
    {"steady", Mode::Steady}, {"curves", Mode::Curves}, {"validate", Mode::Validate}};

std::complex<double> amplitude(const json& v) {
  if (v.is_number()) return {number(v, "custom"), 0.0};
  require(v.is_array() && v.size() == 2, "'custom' amplitudes must be numbers or [re, im] pairs");
  return {number(v[0], "custom"), number(v[1], "custom")};
}

InitialState parse_initial(const json& v) {
  InitialState s;
  if (v.is_string()) {
    const std::string name = v.get<std::string>();
    if (name == "ground")
      s.kind = InitialState::Kind::Ground;
    else if (name == "excited")
      s.kind = InitialState::Kind::Excited;
    else if (name == "phi_plus")
      s.kind = InitialState::Kind::PhiPlus;
    else
      fail("'initial_state': unknown value '" + name + "'");
    return s;
  }
  require(v.is_object() && v.size() == 1 && v.contains("custom"),
          "'initial_state' must be a name or {\"custom\": [4 amplitudes]}");
  const json& a = v.at("custom");
  require(a.is_array() && a.size() == 4, "'custom' needs exactly 4 amplitudes");
  s.kind = InitialState::Kind::Custom;
  double norm = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    s.amplitudes[i] = amplitude(a[i]);
    norm += std::norm(s.amplitudes[i]);
  }
  require(norm > 0, "'custom' amplitudes must not all vanish");
  return s;
}

double temperature(const json& j, const std::string& suffix, double fallback) {
  const std::string beta_key = "beta_omega_" + suffix, n_key = "n_bose_" + suffix;
  require(!(j.contains(beta_key) && j.contains(n_key)), "give only one of '" + beta_key + "' and '" + n_key + "'");
  if (j.contains(beta_key)) {
    const double b = number(j.at(beta_key), beta_key);
    require(b > 0, "'" + beta_key + "' must be positive");
    return b;
  }
  if (j.contains(n_key)) {
    const double n = number(j.at(n_key), n_key);
    require(n > 0, "'" + n_key + "' must be positive");
    return beta_omega_for_bose(n);
  }
  return fallback;
}

}  // namespace

void ExperimentConfig::validate() const {
  require(gamma > 0, "'gamma' must be positive");
  require(omega0 >= 0, "'omega0' must be non-negative");
  for (double k : kappa) require(k >= 0, "'kappa' values must be non-negative");
  for (double e : eta) require(e >= 0 && e <= 1, "'eta' values must lie in [0, 1]");
  require(beta_omega_B > 0 && beta_omega_F > 0, "inverse temperatures must be positive");
  require(beta_omega_B >= 1e-9, "Bose bath temperature out of range");
  require(dt > 0, "'dt' must be positive");
  require(t_max > 0, "'t_max' must be positive");
  require(n_traj >= 2 && n_traj % 2 == 0, "'n_traj' must be even and at least 2");
  require(grid_points >= 2, "'grid_points' must be at least 2");
  require(noise_dt >= 0, "'noise_dt' must be non-negative");
  require(!kappa_grid.empty(), "'kappa_grid' must not be empty");
  for (double k : kappa_grid) require(k >= 0, "'kappa_grid' values must be non-negative");
  require(!output.empty(), "'output' must not be empty");
}

ExperimentConfig parse_config(const json& j) {
  require(j.is_object(), "config must be a JSON object");
  static const std::set<std::string> known = {
      "mode",        "gamma",         "kappa",         "omega0",      "beta_omega_B",      "beta_omega_F",
      "n_bose_B",    "n_bose_F",      "coupling",      "measurement", "eta",               "dt",
      "initial_state", "t_max",       "n_traj",        "seed",        "output",            "kappa_grid",
      "grid_points", "workers",       "noise_dt",      "dump_trajectories"};
  for (const auto& [key, value] : j.items()) require(known.count(key) > 0, "unknown config key '" + key + "'");

  ExperimentConfig c;
  if (j.contains("mode")) c.mode = parse_enum(j.at("mode"), "mode", kModes);
  if (j.contains("gamma")) c.gamma = number(j.at("gamma"), "gamma");
  if (j.contains("kappa")) c.kappa = numbers(j.at("kappa"), "kappa");
  if (j.contains("omega0")) c.omega0 = number(j.at("omega0"), "omega0");
  c.beta_omega_B = temperature(j, "B", c.beta_omega_B);
  c.beta_omega_F = temperature(j, "F", c.beta_omega_F);
  if (j.contains("coupling")) c.coupling = parse_enums(j.at("coupling"), "coupling", kCouplings);
  if (j.contains("measurement")) c.measurement = parse_enums(j.at("measurement"), "measurement", kMeasurements);
  if (j.contains("eta")) c.eta = numbers(j.at("eta"), "eta");
  if (j.contains("dt")) c.dt = number(j.at("dt"), "dt");
  if (j.contains("initial_state")) c.initial_state = parse_initial(j.at("initial_state"));
  if (j.contains("t_max")) c.t_max = number(j.at("t_max"), "t_max");
  if (j.contains("n_traj")) c.n_traj = count(j.at("n_traj"), "n_traj");
  if (j.contains("seed")) c.seed = count(j.at("seed"), "seed");
  if (j.contains("output")) {
    require(j.at("output").is_string(), "'output' must be a string");
    c.output = j.at("output").get<std::string>();
  }
  if (j.contains("kappa_grid")) {
    const json& g = j.at("kappa_grid");
    require(g.is_array(), "'kappa_grid' must be an array");
    c.kappa_grid.clear();
    for (const json& e : g) c.kappa_grid.push_back(number(e, "kappa_grid"));
  }
  if (j.contains("grid_points")) c.grid_points = count(j.at("grid_points"), "grid_points");
  if (j.contains("workers")) c.workers = static_cast<unsigned>(count(j.at("workers"), "workers"));
  if (j.contains("noise_dt")) c.noise_dt = number(j.at("noise_dt"), "noise_dt");
  if (j.contains("dump_trajectories")) {
    require(j.at("dump_trajectories").is_boolean(), "'dump_trajectories' must be a boolean");
    c.dump_trajectories = j.at("dump_trajectories").get<bool>();
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["gamma"] = c.gamma;
  j["kappa"] = c.kappa;
  j["omega0"] = c.omega0;
  j["beta_omega_B"] = c.beta_omega_B;
  j["beta_omega_F"] = c.beta_omega_F;
  j["coupling"] = json::array();
  for (Coupling x : c.coupling) j["coupling"].push_back(to_string(x));
  j["measurement"] = json::array();
  for (Unravelling x : c.measurement) j["measurement"].push_back(to_string(x));
  j["eta"] = c.eta;
  j["dt"] = c.dt;
  switch (c.initial_state.kind) {
    case InitialState::Kind::Ground:
      j["initial_state"] = "ground";
      break;
    case InitialState::Kind::Excited:
      j["initial_state"] = "excited";
      break;
    case InitialState::Kind::PhiPlus:
      j["initial_state"] = "phi_plus";
      break;
    case InitialState::Kind::Custom: {
      json a = json::array();
      for (const auto& z : c.initial_state.amplitudes) a.push_back({z.real(), z.imag()});
      j["initial_state"] = {{"custom", a}};
      break;
    }
  }
  j["t_max"] = c.t_max;
  j["n_traj"] = c.n_traj;
  j["seed"] = c.seed;
  j["output"] = c.output;
  j["kappa_grid"] = c.kappa_grid;
  j["grid_points"] = c.grid_points;
  j["workers"] = c.workers;
  j["noise_dt"] = c.noise_dt;
  j["dump_trajectories"] = c.dump_trajectories;
  return j;
}

}  // namespace qbt
