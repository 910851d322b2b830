// Experiment configuration: a single JSON document, validated strictly before
// anything runs. Command-line flags override individual keys.
#pragma once

#include "qbt/monitor.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace qbt {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Steady, Curves, Validate };
std::string_view to_string(Mode m);

struct InitialState {
  enum class Kind { Ground, Excited, PhiPlus, Custom };
  Kind kind = Kind::Ground;
  /// Probe-memory amplitudes in the basis |11>, |10>, |01>, |00> (Custom only).
  std::array<std::complex<double>, 4> amplitudes{};

  State build() const;
};

struct ExperimentConfig {
  Mode mode = Mode::Curves;
  double gamma = 1.0;
  std::vector<double> kappa{1.0};
  double omega0 = 0.0;
  double beta_omega_B = 1.0 / 5.5;
  double beta_omega_F = 1.0 / 5.5;
  std::vector<Coupling> coupling{Coupling::SigmaMinus};
  std::vector<Unravelling> measurement{Unravelling::Homodyne};
  std::vector<double> eta{1.0};
  double dt = 1e-3;
  InitialState initial_state;
  double t_max = 10.0;
  std::size_t n_traj = 1000;
  std::uint64_t seed = 1;
  std::string output = "out";
  /// kappa / gamma values for steady mode.
  std::vector<double> kappa_grid;
  std::size_t grid_points = 200;
  unsigned workers = 0;
  /// Coarse Wiener grid for coupled refinements; 0 uses dt.
  double noise_dt = 0.0;
  bool dump_trajectories = false;

  ExperimentConfig();

  ModelParams model(Coupling c, double kappa) const;
  MeasurementScheme scheme(Unravelling u, double eta) const;
  /// Throws ConfigError on any out-of-range value.
  void validate() const;
};

/// Parses and validates. Unknown keys, wrong types and out-of-range values throw ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Fully resolved form; parse_config(to_json(c)) reproduces c exactly.
nlohmann::json to_json(const ExperimentConfig& c);

}  // namespace qbt
