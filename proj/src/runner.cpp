#include "qbt/runner.hpp"

#include "qbt/csv.hpp"
#include "qbt/tagging.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#ifndef QBT_VERSION
#define QBT_VERSION "0.0.0"
#endif
#ifndef QBT_GIT_REVISION
#define QBT_GIT_REVISION "unknown"
#endif

namespace qbt {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version_string() { return std::string(QBT_VERSION) + "+g" + QBT_GIT_REVISION; }

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json summary_header(const ExperimentConfig& c) {
  json s;
  s["version"] = version_string();
  s["mode"] = to_string(c.mode);
  s["seed"] = c.seed;
  s["config"] = to_json(c);
  return s;
}

void finish(RunResult& r, const ExperimentConfig& c, std::chrono::steady_clock::time_point t0) {
  json files = json::array();
  for (const fs::path& f : r.files) files.push_back(f.filename().string());
  r.summary["files"] = files;
  r.summary["wall_time_s"] = seconds_since(t0);
  const fs::path path = fs::path(c.output) / "summary.json";
  write_file_atomic(path, r.summary.dump(2) + "\n");
  r.files.push_back(path);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

RunResult run_steady(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(c.output);
  RunResult r;
  r.summary = summary_header(c);
  json annotations = json::object();

  for (Coupling coupling : c.coupling) {
    const ModelParams base = c.model(coupling, 0.0);
    base.validate();
    std::ostringstream csv;
    csv << "kappa_over_gamma,hep_infinity,heat_flow_B,heat_flow_F\n";
    double best_grid = c.kappa_grid.front(), best_hep = 1.0;
    for (double k : c.kappa_grid) {
      ModelParams p = base;
      p.kappa = k * c.gamma;
      const SteadyStateReport rep = steady_report(p);
      csv << format_number(k) << ',' << format_number(rep.hep_infinity) << ',' << format_number(rep.heat_flow_B)
          << ',' << format_number(rep.heat_flow_F) << '\n';
      if (rep.hep_infinity < best_hep) {
        best_hep = rep.hep_infinity;
        best_grid = k;
      }
    }
    const fs::path path = fs::path(c.output) / ("steady_" + std::string(to_string(coupling)) + ".csv");
    write_file_atomic(path, csv.str());
    r.files.push_back(path);

    json a;
    a["grid_minimum_kappa_over_gamma"] = best_grid;
    a["grid_minimum_hep"] = best_hep;
    if (base.equal_temperatures()) {
      ModelParams at = base;
      at.kappa = kappa_best(base);
      a["kappa_best_over_gamma"] = at.kappa / c.gamma;
      a["hep_at_kappa_best"] = hep_infinity(at);
    } else {
      a["kappa_best_over_gamma"] = nullptr;
    }
    const std::optional<double> kc = kappa_critical(base);
    a["kappa_critical_over_gamma"] = optional_number(kc ? std::optional<double>(*kc / c.gamma) : std::nullopt);
    annotations[std::string(to_string(coupling))] = a;
  }
  r.summary["steady"] = annotations;
  finish(r, c, t0);
  return r;
}

std::string curve_file_name(Unravelling u, Coupling coupling, double eta, double kappa) {
  return "curve_" + std::string(to_string(u)) + "_" + std::string(to_string(coupling)) + "_eta" + format_number(eta) +
         "_kappa" + format_number(kappa) + ".csv";
}

RunResult run_curves(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const State rho0 = c.initial_state.build();

  struct Combo {
    Unravelling u;
    Coupling coupling;
    double eta;
    double kappa;
  };
  std::vector<Combo> combos;
  for (Unravelling u : c.measurement)
    for (Coupling coupling : c.coupling)
      for (double eta : c.eta)
        for (double kappa : c.kappa) {
          // Every combination is checked before any output is produced.
          c.scheme(u, eta).validate(c.model(coupling, kappa));
          combos.push_back({u, coupling, eta, kappa});
        }

  fs::create_directories(c.output);
  RunResult r;
  r.summary = summary_header(c);
  json runs = json::array();
  CampaignOptions o;
  o.t_max = c.t_max;
  o.n_traj = c.n_traj;
  o.seed = c.seed;
  o.grid_points = c.grid_points;
  o.workers = c.workers;
  o.noise_dt = c.noise_dt;

  for (const Combo& k : combos) {
    const ModelParams p = c.model(k.coupling, k.kappa);
    const MeasurementScheme s = c.scheme(k.u, k.eta);
    const DiscriminationReport rep = mc_campaign(p, s, rho0, o);
    const std::string name = curve_file_name(k.u, k.coupling, k.eta, k.kappa);
    const fs::path path = fs::path(c.output) / name;
    write_file_atomic(path, rep.to_csv());
    r.files.push_back(path);

    json run;
    run["file"] = name;
    run["measurement"] = to_string(k.u);
    run["coupling"] = to_string(k.coupling);
    run["eta"] = k.eta;
    run["kappa"] = k.kappa;
    run["n_traj"] = rep.n_traj;
    run["final_p_err_cont"] = rep.p_err_cont.back();
    run["final_p_err_cont_proj"] = rep.p_err_cont_proj.back();

    if (c.dump_trajectories) {
      const std::vector<std::size_t> steps = report_steps(c.t_max, c.dt, c.grid_points);
      std::ostringstream out;
      TrajectoryOptions topt;
      topt.snapshot_steps = steps;
      topt.keep_record = true;
      for (std::size_t i = 0; i < c.n_traj; ++i) {
        const Hypothesis truth = i < c.n_traj / 2 ? Hypothesis::Bose : Hypothesis::Fermi;
        NoiseStream noise(c.seed, i, c.dt, c.noise_dt);
        const TrajectoryResult tr = run_trajectory(p, truth, s, rho0, c.t_max, noise, topt);
        write_trajectory_csv(out, std::span(&tr, 1), i, i == 0);
      }
      const fs::path tpath = fs::path(c.output) / ("trajectories_" + name);
      write_file_atomic(tpath, out.str());
      r.files.push_back(tpath);
      run["trajectories"] = tpath.filename().string();
    }
    runs.push_back(run);
  }
  r.summary["runs"] = runs;
  finish(r, c, t0);
  return r;
}

}  // namespace qbt
