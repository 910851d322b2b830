// qbt: steady-state curves, monitored discrimination curves and the oracle
// validation suite, driven by a JSON config.
#include "qbt/runner.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  std::optional<double> dt;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--seed", f.seed, "Master seed (overrides config)");
  cmd->add_option("--out", f.out, "Output directory (overrides config)");
  cmd->add_option("--workers", f.workers, "Worker threads, 0 = all cores (overrides config)");
  cmd->add_option("--dt", f.dt, "Integration step (overrides config)");
}

qbt::ExperimentConfig resolve(const Flags& f, qbt::Mode mode) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw qbt::ConfigError("cannot open config file " + f.config);
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw qbt::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw qbt::ConfigError("config must be a JSON object");
  }
  const std::string name(qbt::to_string(mode));
  if (j.contains("mode") && j["mode"] != name)
    throw qbt::ConfigError("config mode '" + j["mode"].dump() + "' does not match subcommand '" + name + "'");
  j["mode"] = name;
  if (f.seed) j["seed"] = *f.seed;
  if (f.out) j["output"] = *f.out;
  if (f.workers) j["workers"] = *f.workers;
  if (f.dt) j["dt"] = *f.dt;
  return qbt::parse_config(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bose/Fermi bath tagging with a monitored qubit probe"};
  app.set_version_flag("--version", qbt::version_string());
  app.require_subcommand(1);
  Flags steady, curves, validate;
  add_flags(app.add_subcommand("steady", "Steady-state error probability and heat flows over kappa_grid"), steady);
  add_flags(app.add_subcommand("curves", "Monte Carlo discrimination curves"), curves);
  add_flags(app.add_subcommand("validate", "Run the oracle checks and print a pass/fail table"), validate);
  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("steady")) {
      const qbt::RunResult r = qbt::run_steady(resolve(steady, qbt::Mode::Steady));
      for (const auto& f : r.files) std::cout << f.string() << '\n';
      return 0;
    }
    if (app.got_subcommand("curves")) {
      const qbt::RunResult r = qbt::run_curves(resolve(curves, qbt::Mode::Curves));
      for (const auto& f : r.files) std::cout << f.string() << '\n';
      return 0;
    }
    const auto checks = qbt::run_validate(resolve(validate, qbt::Mode::Validate));
    qbt::print_checks(std::cout, checks);
    bool all = true;
    for (const auto& c : checks)
      if (!c.passed) {
        all = false;
        std::cerr << "failed check: " << c.name << '\n';
      }
    return all ? 0 : 1;
  } catch (const qbt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
