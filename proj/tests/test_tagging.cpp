#include "doctest.h"
#include "generators.hpp"

#include "qbt/tagging.hpp"

using namespace qbt;

namespace {

MeasurementScheme scheme(Unravelling u, double eta, double dt) {
  MeasurementScheme s;
  s.kind = u;
  s.eta = eta;
  s.dt = dt;
  return s;
}

ModelParams informative(Coupling c = Coupling::SigmaMinus) {
  ModelParams p;
  p.kappa = 10.0;
  p.coupling = c;
  p.beta_omega_B = std::log(2.0);
  p.beta_omega_F = beta_omega_for_bose(0.2);
  return p;
}

}  // namespace

TEST_CASE("wrong-tag weights") {
  CHECK(wrong_tag_weight(Hypothesis::Bose, 0.2) == 1.0);
  CHECK(wrong_tag_weight(Hypothesis::Bose, 0.8) == 0.0);
  CHECK(wrong_tag_weight(Hypothesis::Fermi, 0.2) == 0.0);
  CHECK(wrong_tag_weight(Hypothesis::Fermi, 0.8) == 1.0);
  CHECK(wrong_tag_weight(Hypothesis::Bose, 0.5) == 0.5);
  CHECK(wrong_tag_weight(Hypothesis::Fermi, 0.5) == 0.5);
}

TEST_CASE("conditional Helstrom error") {
  gen::Rng r(41);
  for (int n = 0; n < 300; ++n) {
    const Eigen::Index d = gen::dim(r);
    const State a = gen::state(r, d), b = gen::state(r, d);
    const double post = gen::uniform(r, 0, 1);
    const double h = hep_conditional(a.matrix(), b.matrix(), post);
    CHECK(h >= 0.0);
    CHECK(h <= 0.5);
    CHECK(hep_conditional(a.matrix(), b.matrix(), 1.0) == doctest::Approx(0.0).scale(1));
    CHECK(hep_conditional(a.matrix(), b.matrix(), 0.0) == doctest::Approx(0.0).scale(1));
    CHECK(hep_conditional(a.matrix(), b.matrix(), 0.5) ==
          doctest::Approx(0.5 * (1 - trace_distance(a.matrix(), b.matrix()))).epsilon(1e-12));
    CHECK(hep_conditional(a.matrix(), a.matrix(), 0.5) == doctest::Approx(0.5));
  }
  CHECK_THROWS(hep_conditional(Op::Identity(2, 2) / 2.0, Op::Identity(2, 2) / 2.0, 1.5));
}

TEST_CASE("brute-force enumeration limits") {
  const ModelParams p = informative();
  const MeasurementScheme s = scheme(Unravelling::Photodetection, 1.0, 0.005);
  const BruteForceResult zero = brute_force_pd(p, s, ground_state(), 0);
  CHECK(zero.p_err_cont == 0.5);
  CHECK(zero.p_err_cont_proj == 0.5);
  CHECK_THROWS(brute_force_pd(p, s, ground_state(), 13));
  CHECK_THROWS(brute_force_pd(p, scheme(Unravelling::Homodyne, 1.0, 0.005), ground_state(), 4));

  const MeasurementScheme blind = scheme(Unravelling::Photodetection, 0.0, 0.005);
  for (std::size_t n : {1u, 5u, 10u}) {
    const BruteForceResult bf = brute_force_pd(p, blind, phi_plus(), n);
    CHECK(bf.p_err_cont == 0.5);
    CHECK(std::abs(bf.p_err_cont_proj - hep_at(p, phi_plus(), n * blind.dt)) <= blind.dt);
  }
}

TEST_CASE("brute-force record probabilities and averaged states") {
  gen::Rng r(42);
  for (int k = 0; k < 10; ++k) {
    ModelParams p = gen::params(r);
    p.kappa = gen::uniform(r, 1.0, 10.0);
    const MeasurementScheme s = scheme(Unravelling::Photodetection, gen::uniform(r, 0, 1), 0.05 / p.kappa);
    const State rho0 = gen::state(r, gen::dim(r));
    const std::size_t n = 8;
    const BruteForceResult bf = brute_force_pd(p, s, rho0, n);
    CHECK(std::abs(bf.total_probability_B - 1) <= 10 * n * s.dt * s.dt);
    CHECK(std::abs(bf.total_probability_F - 1) <= 10 * n * s.dt * s.dt);
    for (Hypothesis q : {Hypothesis::Bose, Hypothesis::Fermi}) {
      const Op avg = q == Hypothesis::Bose ? Op(bf.mean_state_B / bf.total_probability_B)
                                           : Op(bf.mean_state_F / bf.total_probability_F);
      CHECK(trace_distance(avg, propagate(p, q, rho0, n * s.dt).matrix()) <= 10 * s.dt);
    }
    CHECK(bf.p_err_cont >= 0.0);
    CHECK(bf.p_err_cont <= 0.5);
    CHECK(bf.p_err_cont_proj <= bf.p_err_cont + 1e-12);
  }
}

TEST_CASE("Monte Carlo converges to the exact enumeration") {
  for (Coupling c : {Coupling::SigmaMinus, Coupling::SigmaXHalf}) {
    const ModelParams p = informative(c);
    const MeasurementScheme s = scheme(Unravelling::Photodetection, 0.8, 0.005);
    const std::size_t n = 6;
    const BruteForceResult bf = brute_force_pd(p, s, excited_state(), n);
    CampaignOptions o;
    o.t_max = n * s.dt;
    o.n_traj = 10000;
    o.seed = 11;
    o.grid_points = 2;
    const DiscriminationReport mc = mc_campaign(p, s, excited_state(), o);
    CHECK(std::abs(mc.p_err_cont.back() - bf.p_err_cont) <= 3 * mc.se_cont.back() + 1e-15);
    CHECK(std::abs(mc.p_err_cont_proj.back() - bf.p_err_cont_proj) <= 3 * mc.se_proj.back() + 1e-15);
  }
}

TEST_CASE("uninformative photodetection ties at one half") {
  ModelParams p = informative(Coupling::SigmaXHalf);
  p.kappa = 1.0;
  CampaignOptions o;
  o.t_max = 3;
  o.n_traj = 200;
  o.grid_points = 31;
  const DiscriminationReport rep = mc_campaign(p, scheme(Unravelling::Photodetection, 1.0, 0.01), ground_state(), o);
  for (double v : rep.p_err_cont) CHECK(v == 0.5);
}

TEST_CASE("no auxiliary channel gives the unconditional error") {
  ModelParams p = informative();
  p.kappa = 0;
  CampaignOptions o;
  o.t_max = 2;
  o.n_traj = 20;
  o.grid_points = 5;
  for (Unravelling u : {Unravelling::Photodetection, Unravelling::Homodyne}) {
    const DiscriminationReport rep = mc_campaign(p, scheme(u, 1.0, 0.01), phi_plus(), o);
    for (std::size_t i = 0; i < rep.t_grid.size(); ++i) {
      CHECK(rep.p_err_cont[i] == 0.5);
      CHECK(std::abs(rep.p_err_cont_proj[i] - hep_at(p, phi_plus(), rep.t_grid[i])) <= 1e-10);
    }
  }
}

TEST_CASE("campaigns are reproducible for any worker count") {
  const ModelParams p = informative();
  CampaignOptions o;
  o.t_max = 1;
  o.n_traj = 40;
  o.grid_points = 11;
  o.seed = 5;
  o.workers = 1;
  const MeasurementScheme s = scheme(Unravelling::Homodyne, 0.7, 0.002);
  const DiscriminationReport a = mc_campaign(p, s, phi_plus(), o);
  o.workers = 3;
  const DiscriminationReport b = mc_campaign(p, s, phi_plus(), o);
  CHECK(a.to_csv() == b.to_csv());
  o.seed = 6;
  CHECK(mc_campaign(p, s, phi_plus(), o).to_csv() != a.to_csv());
}

TEST_CASE("ensemble estimators agree with the campaign driver") {
  const ModelParams p = informative();
  const MeasurementScheme s = scheme(Unravelling::Photodetection, 1.0, 0.002);
  CampaignOptions o;
  o.t_max = 0.5;
  o.n_traj = 30;
  o.grid_points = 6;
  o.seed = 9;
  const DiscriminationReport rep = mc_campaign(p, s, excited_state(), o);
  std::vector<TrajectoryResult> ensemble;
  TrajectoryOptions topt;
  topt.snapshot_steps = report_steps(o.t_max, s.dt, o.grid_points);
  for (std::size_t i = 0; i < o.n_traj; ++i) {
    NoiseStream noise(o.seed, i, s.dt);
    ensemble.push_back(run_trajectory(p, i < o.n_traj / 2 ? Hypothesis::Bose : Hypothesis::Fermi, s, excited_state(),
                                      o.t_max, noise, topt));
  }
  for (std::size_t k = 0; k < rep.t_grid.size(); ++k) {
    const Estimate c = p_err_cont(ensemble, rep.t_grid[k]);
    const Estimate pr = p_err_cont_proj(ensemble, rep.t_grid[k]);
    CHECK(c.value == doctest::Approx(rep.p_err_cont[k]).epsilon(1e-14));
    CHECK(c.std_err == doctest::Approx(rep.se_cont[k]).epsilon(1e-14));
    CHECK(pr.value == doctest::Approx(rep.p_err_cont_proj[k]).epsilon(1e-12));
    CHECK(pr.std_err == doctest::Approx(rep.se_proj[k]).epsilon(1e-9).scale(1e-12));
  }
  CHECK_THROWS(p_err_cont(std::span<const TrajectoryResult>(), 0.1));
  CHECK_THROWS(p_err_cont_proj(std::span(ensemble).first(3), 0.1));
}

TEST_CASE("campaign arguments and report layout") {
  const ModelParams p = informative();
  const MeasurementScheme s = scheme(Unravelling::Homodyne, 1.0, 0.001);
  CampaignOptions o;
  o.n_traj = 3;
  CHECK_THROWS(mc_campaign(p, s, ground_state(), o));
  o.n_traj = 4;
  o.t_max = 0;
  CHECK_THROWS(mc_campaign(p, s, ground_state(), o));

  const auto steps = report_steps(1.0, 0.001, 200);
  CHECK(steps.size() == 200);
  CHECK(steps.front() == 0);
  CHECK(steps.back() == 1000);
  CHECK(std::is_sorted(steps.begin(), steps.end()));

  o.t_max = 0.1;
  o.grid_points = 4;
  const DiscriminationReport rep = mc_campaign(p, s, ground_state(), o);
  const std::string csv = rep.to_csv();
  CHECK(csv.rfind("t,p_err_cont,se_cont,p_err_cont_proj,se_proj\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(rep.index_at(0.07) == 2);
  CHECK(rep.p_err_cont.front() == 0.5);
  CHECK(rep.p_err_cont_proj.front() == 0.5);
}
