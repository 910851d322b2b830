#include "qbt/tagging.hpp"

#include "qbt/csv.hpp"
#include "qbt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace qbt {

double wrong_tag_weight(Hypothesis truth, double posterior_B) {
  if (posterior_B == 0.5) return 0.5;
  if (truth == Hypothesis::Bose) return posterior_B < 0.5 ? 1.0 : 0.0;
  return posterior_B > 0.5 ? 1.0 : 0.0;
}

double hep_conditional(const Op& cond_B, const Op& cond_F, double posterior_B) {
  if (!(posterior_B >= 0) || !(posterior_B <= 1)) throw std::invalid_argument("posterior must lie in [0, 1]");
  const Op weighted = (1.0 - posterior_B) * cond_F - posterior_B * cond_B;
  const double v = 0.5 * (1.0 - trace_norm(weighted));
  return std::clamp(v, 0.0, 0.5);
}

namespace {

void require_balanced(std::span<const TrajectoryResult> ensemble) {
  if (ensemble.empty()) throw std::invalid_argument("empty trajectory ensemble");
  const auto n_bose = std::count_if(ensemble.begin(), ensemble.end(),
                                    [](const TrajectoryResult& r) { return r.truth == Hypothesis::Bose; });
  if (2 * static_cast<std::size_t>(n_bose) != ensemble.size())
    throw std::invalid_argument("ensemble must be split evenly between the two hypotheses");
}

Estimate mean_with_error(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = xs.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return {mean, sd / std::sqrt(n)};
}

}  // namespace

Estimate p_err_cont(std::span<const TrajectoryResult> ensemble, double t) {
  require_balanced(ensemble);
  double wrong = 0;
  for (const TrajectoryResult& r : ensemble) wrong += wrong_tag_weight(r.truth, r.posterior_B[r.snapshot_at(t)]);
  const double n = static_cast<double>(ensemble.size());
  const double p = wrong / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

Estimate p_err_cont_proj(std::span<const TrajectoryResult> ensemble, double t) {
  require_balanced(ensemble);
  std::vector<double> values;
  values.reserve(ensemble.size());
  for (const TrajectoryResult& r : ensemble) {
    const std::size_t i = r.snapshot_at(t);
    values.push_back(hep_conditional(r.cond_B[i].matrix(), r.cond_F[i].matrix(), r.posterior_B[i]));
  }
  return mean_with_error(values);
}

BruteForceResult brute_force_pd(const ModelParams& p, const MeasurementScheme& s, const State& rho0,
                                std::size_t n_steps) {
  if (s.kind != Unravelling::Photodetection) throw std::invalid_argument("brute_force_pd requires photodetection");
  if (n_steps > kMaxBruteForceSteps) throw std::invalid_argument("brute_force_pd: at most 12 steps");
  const Eigen::Index d = rho0.dim();
  const Filter fb(p, Hypothesis::Bose, s, d);
  const Filter fF(p, Hypothesis::Fermi, s, d);

  BruteForceResult out;
  out.total_probability_B = out.total_probability_F = 0;
  out.p_err_cont = out.p_err_cont_proj = 0;
  out.mean_state_B = Op::Zero(d, d);
  out.mean_state_F = Op::Zero(d, d);

  // Depth-first walk; log-probabilities keep the posterior identical to the trajectory code.
  std::function<void(std::size_t, const Op&, const Op&, double, double)> walk =
      [&](std::size_t depth, const Op& rb, const Op& rf, double lb, double lf) {
        const double pb = std::exp(lb), pf = std::exp(lf);
        if (depth == n_steps) {
          const double post = posterior_bose(lb, lf);
          out.total_probability_B += pb;
          out.total_probability_F += pf;
          out.p_err_cont += 0.5 * (pb * wrong_tag_weight(Hypothesis::Bose, post) +
                                   pf * wrong_tag_weight(Hypothesis::Fermi, post));
          out.p_err_cont_proj += 0.5 * (pb + pf) * hep_conditional(rb, rf, post);
          out.mean_state_B += pb * rb;
          out.mean_state_F += pf * rf;
          return;
        }
        const Op eb = pb > 0 ? fb.evolve(rb) : rb;
        const Op ef = pf > 0 ? fF.evolve(rf) : rf;
        for (double x : {0.0, 1.0}) {
          Op nb = eb, nf = ef;
          const double qb = pb > 0 ? fb.measure(nb, x) : 0.0;
          const double qf = pf > 0 ? fF.measure(nf, x) : 0.0;
          if (!(qb > 0) && !(qf > 0)) continue;
          walk(depth + 1, nb, nf, qb > 0 ? lb + std::log(qb) : -INFINITY, qf > 0 ? lf + std::log(qf) : -INFINITY);
        }
      };
  walk(0, rho0.matrix(), rho0.matrix(), 0.0, 0.0);
  return out;
}

std::size_t DiscriminationReport::index_at(double t) const {
  if (t_grid.empty()) throw std::out_of_range("empty report");
  std::size_t best = 0;
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (std::abs(t_grid[i] - t) < std::abs(t_grid[best] - t)) best = i;
  return best;
}

std::string DiscriminationReport::to_csv() const {
  std::ostringstream out;
  out << "t,p_err_cont,se_cont,p_err_cont_proj,se_proj\n";
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    out << format_number(t_grid[i]) << ',' << format_number(p_err_cont[i]) << ',' << format_number(se_cont[i]) << ','
        << format_number(p_err_cont_proj[i]) << ',' << format_number(se_proj[i]) << '\n';
  return out.str();
}

std::vector<std::size_t> report_steps(double t_max, double dt, std::size_t grid_points) {
  if (grid_points < 2) throw std::invalid_argument("report grid needs at least two points");
  const std::size_t n = step_count(t_max, dt);
  std::vector<std::size_t> steps(grid_points);
  for (std::size_t k = 0; k < grid_points; ++k)
    steps[k] = static_cast<std::size_t>(std::llround(static_cast<double>(k) * static_cast<double>(n) /
                                                     static_cast<double>(grid_points - 1)));
  return steps;
}

DiscriminationReport mc_campaign(const ModelParams& p, const MeasurementScheme& s, const State& rho0,
                                 const CampaignOptions& o) {
  p.validate();
  s.validate(p);
  if (o.n_traj < 2 || o.n_traj % 2 != 0) throw std::invalid_argument("n_traj must be even and at least 2");
  if (!(o.t_max > 0)) throw std::invalid_argument("t_max must be positive");

  const std::vector<std::size_t> steps = report_steps(o.t_max, s.dt, o.grid_points);
  const std::size_t g = steps.size();
  const std::size_t n_steps = steps.back();
  std::vector<double> wrong(o.n_traj * g), hepc(o.n_traj * g);
  std::vector<StateCheck> checks(o.n_traj);

  parallel_for(o.n_traj, o.workers, [&](std::size_t i) {
    const Hypothesis truth = i < o.n_traj / 2 ? Hypothesis::Bose : Hypothesis::Fermi;
    NoiseStream noise(o.seed, i, s.dt, o.noise_dt);
    checks[i] = simulate(p, truth, s, rho0, n_steps, noise, steps, o.check_states, [&](const SnapshotView& v) {
      const double post = posterior_bose(v.loglik_B, v.loglik_F);
      wrong[i * g + v.index] = wrong_tag_weight(truth, post);
      hepc[i * g + v.index] = hep_conditional(v.rho_B, v.rho_F, post);
    });
  });

  DiscriminationReport r;
  r.n_traj = o.n_traj;
  const double n = static_cast<double>(o.n_traj);
  for (std::size_t k = 0; k < g; ++k) {
    double w = 0;
    std::vector<double> h(o.n_traj);
    for (std::size_t i = 0; i < o.n_traj; ++i) {
      w += wrong[i * g + k];
      h[i] = hepc[i * g + k];
    }
    const double pc = w / n;
    const Estimate proj = mean_with_error(h);
    r.t_grid.push_back(static_cast<double>(steps[k]) * s.dt);
    r.n_wrong.push_back(w);
    r.p_err_cont.push_back(pc);
    r.se_cont.push_back(std::sqrt(pc * (1.0 - pc) / n));
    r.p_err_cont_proj.push_back(proj.value);
    r.se_proj.push_back(proj.std_err);
  }
  for (const StateCheck& c : checks) {
    r.min_eigenvalue = std::min(r.min_eigenvalue, c.min_eigenvalue);
    r.max_trace_defect = std::max(r.max_trace_defect, c.max_trace_defect);
  }
  return r;
}

}  // namespace qbt
