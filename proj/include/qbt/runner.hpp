// Batch runs behind the command-line tool. Each run writes its CSV files and a
// summary.json into the configured output directory.
#pragma once

#include "qbt/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace qbt {

/// Library version plus the git revision the build was configured from.
std::string version_string();

struct RunResult {
  std::vector<std::filesystem::path> files;
  nlohmann::json summary;
};

/// kappa_over_gamma,hep_infinity,heat_flow_B,heat_flow_F over kappa_grid, one
/// file per coupling. Heat flows are in units of omega0 kappa.
RunResult run_steady(const ExperimentConfig& c);

/// One DiscriminationReport CSV per (measurement, coupling, eta, kappa).
RunResult run_curves(const ExperimentConfig& c);

/// File name used by run_curves for one combination.
std::string curve_file_name(Unravelling u, Coupling coupling, double eta, double kappa);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Oracle checks on the configured model: guard, steady analytic vs numeric,
/// brute-force photodetection, unconditional consistency, dt halving.
std::vector<CheckResult> run_validate(const ExperimentConfig& c);

void print_checks(std::ostream& out, const std::vector<CheckResult>& checks);

}  // namespace qbt
