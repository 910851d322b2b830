#include "qbt/runner.hpp"

#include "qbt/tagging.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace qbt {

namespace {

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(3) << v;
  return o.str();
}

struct Checker {
  std::vector<CheckResult> results;

  void add(std::string name, bool ok, std::string detail) { results.push_back({std::move(name), ok, std::move(detail)}); }

  template <typename F>
  void run(const std::string& name, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      add(name, false, std::string("error: ") + e.what());
    }
  }
};

std::string tag(Coupling c) { return std::string(to_string(c)); }

}  // namespace

std::vector<CheckResult> run_validate(const ExperimentConfig& c) {
  c.validate();
  Checker ck;
  const State rho0 = c.initial_state.build();
  const double kappa = c.kappa.front();
  const double t_check = std::min(c.t_max, 2.0 / c.gamma);

  bool guard_ok = true;
  {
    std::string detail = "kappa*dt <= " + fmt(kMaxKappaDt) + " for all combinations";
    for (Unravelling u : c.measurement)
      for (Coupling coupling : c.coupling)
        for (double eta : c.eta)
          for (double k : c.kappa) {
            try {
              c.scheme(u, eta).validate(c.model(coupling, k));
            } catch (const std::exception& e) {
              if (guard_ok) detail = e.what();
              guard_ok = false;
            }
          }
    ck.add("stability_guard", guard_ok, detail);
  }

  for (Coupling coupling : c.coupling) {
    ck.run("steady_analytic/" + tag(coupling), [&] {
      double worst = 0;
      for (double k : c.kappa) {
        const ModelParams p = c.model(coupling, k);
        const State num = propagate(p, Hypothesis::Bose, ground_state(), 50.0 / c.gamma);
        const State numF = propagate(p, Hypothesis::Fermi, ground_state(), 50.0 / c.gamma);
        worst = std::max(worst, std::abs(num.excited_population() - steady_population(p, Hypothesis::Bose)));
        worst = std::max(worst, std::abs(numF.excited_population() - steady_population(p, Hypothesis::Fermi)));
        if (p.omega0 * p.kappa > 0)
          worst = std::max(worst, std::abs(hep_infinity(p) - hep_infinity_from_heat(p)));
      }
      ck.add("steady_analytic/" + tag(coupling), worst <= 1e-8, "max deviation " + fmt(worst));
    });
  }

  // Exhaustive photodetection records at the coarsest admissible step.
  for (Coupling coupling : c.coupling) {
    const std::string name = "brute_force_pd/" + tag(coupling);
    ck.run(name, [&] {
      const ModelParams p = c.model(coupling, kappa);
      MeasurementScheme s;
      s.kind = Unravelling::Photodetection;
      s.eta = 1.0;
      s.dt = kMaxKappaDt / std::max(kappa, c.gamma);
      const std::size_t n = 8;
      const BruteForceResult bf = brute_force_pd(p, s, rho0, n);
      const double budget = 10.0 * static_cast<double>(n) * s.dt * s.dt;
      const double total_dev =
          std::max(std::abs(bf.total_probability_B - 1.0), std::abs(bf.total_probability_F - 1.0));
      const double t = static_cast<double>(n) * s.dt;
      const double dist_B = trace_distance(bf.mean_state_B / bf.total_probability_B,
                                           propagate(p, Hypothesis::Bose, rho0, t).matrix());
      const double dist_F = trace_distance(bf.mean_state_F / bf.total_probability_F,
                                           propagate(p, Hypothesis::Fermi, rho0, t).matrix());
      CampaignOptions o;
      o.t_max = t;
      o.n_traj = 20000;
      o.seed = c.seed;
      o.grid_points = 2;
      o.workers = c.workers;
      const DiscriminationReport mc = mc_campaign(p, s, rho0, o);
      const double dc = std::abs(mc.p_err_cont.back() - bf.p_err_cont);
      const double dp = std::abs(mc.p_err_cont_proj.back() - bf.p_err_cont_proj);
      const bool ok = total_dev <= budget && std::max(dist_B, dist_F) <= 10.0 * s.dt &&
                      dc <= 3.0 * mc.se_cont.back() && dp <= 3.0 * mc.se_proj.back();
      ck.add(name, ok,
             "total dev " + fmt(total_dev) + ", mean-state dist " + fmt(std::max(dist_B, dist_F)) + ", |dP_cont| " +
                 fmt(dc) + " (se " + fmt(mc.se_cont.back()) + "), |dP_proj| " + fmt(dp) + " (se " +
                 fmt(mc.se_proj.back()) + ")");
    });
  }

  for (Coupling coupling : c.coupling) {
    const std::string name = "unconditional_consistency/" + tag(coupling);
    if (!guard_ok) {
      ck.add(name, false, "not run: stability guard failed");
      continue;
    }
    ck.run(name, [&] {
      const ModelParams p = c.model(coupling, kappa);
      const MeasurementScheme s = c.scheme(Unravelling::Homodyne, 1.0);
      const std::vector<std::size_t> steps = report_steps(t_check, s.dt, 10);
      double worst_ratio = 0;
      bool ok = true;
      for (Hypothesis q : {Hypothesis::Bose, Hypothesis::Fermi}) {
        const std::vector<MeanState> mean =
            ensemble_mean_state(p, q, s, rho0, steps, c.n_traj, c.seed, c.workers, c.noise_dt);
        for (std::size_t i = 0; i < steps.size(); ++i) {
          const double d =
              trace_distance(mean[i].mean, propagate(p, q, rho0, static_cast<double>(steps[i]) * s.dt).matrix());
          if (d > 3.0 * mean[i].std_err) ok = false;
          if (mean[i].std_err > 0) worst_ratio = std::max(worst_ratio, d / mean[i].std_err);
        }
      }
      ck.add(name, ok, "max distance / se " + fmt(worst_ratio));
    });
  }

  {
    const std::string name = "dt_halving";
    const Unravelling u =
        c.measurement.front() == Unravelling::None ? Unravelling::Homodyne : c.measurement.front();
    if (!guard_ok) {
      ck.add(name, false, "not run: stability guard failed");
      ck.add("state_invariants", false, "not run: stability guard failed");
    } else {
      ck.run(name, [&] {
        const ModelParams p = c.model(c.coupling.front(), kappa);
        CampaignOptions o;
        o.t_max = t_check;
        o.n_traj = c.n_traj;
        o.seed = c.seed;
        o.grid_points = 11;
        o.workers = c.workers;
        o.noise_dt = c.dt;
        o.check_states = true;
        MeasurementScheme s = c.scheme(u, c.eta.front());
        const DiscriminationReport coarse = mc_campaign(p, s, rho0, o);
        s.dt = c.dt / 2;
        const DiscriminationReport fine = mc_campaign(p, s, rho0, o);
        bool ok = true;
        double worst = 0;
        for (std::size_t i = 0; i < coarse.t_grid.size(); ++i) {
          const double d = std::abs(coarse.p_err_cont_proj[i] - fine.p_err_cont_proj[i]);
          if (d != 0 && !(d < coarse.se_proj[i])) ok = false;
          if (coarse.se_proj[i] > 0) worst = std::max(worst, d / coarse.se_proj[i]);
        }
        ck.add(name, ok, "max |change| / se " + fmt(worst));
        const double min_eig = std::min(coarse.min_eigenvalue, fine.min_eigenvalue);
        const double defect = std::max(coarse.max_trace_defect, fine.max_trace_defect);
        ck.add("state_invariants", min_eig >= -1e-10 && defect <= 1e-12,
               "min eigenvalue " + fmt(min_eig) + ", trace defect " + fmt(defect));
      });
    }
  }
  return ck.results;
}

void print_checks(std::ostream& out, const std::vector<CheckResult>& checks) {
  std::size_t width = 5;
  for (const CheckResult& r : checks) width = std::max(width, r.name.size());
  out << std::left << std::setw(static_cast<int>(width)) << "check" << "  status  detail\n";
  for (const CheckResult& r : checks)
    out << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << (r.passed ? "PASS  " : "FAIL  ")
        << "  " << r.detail << '\n';
}

}  // namespace qbt
