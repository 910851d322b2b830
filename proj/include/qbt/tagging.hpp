// Figures of merit for telling the two bath hypotheses apart from monitored
// trajectories, and an exact enumeration oracle for short photodetection runs.
#pragma once

#include "qbt/monitor.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qbt {

struct Estimate {
  double value = 0;
  double std_err = 0;
};

/// Error weight of one tagging decision: 1 when the posterior of the true
/// hypothesis is below 1/2, 1/2 on an exact tie, 0 otherwise.
double wrong_tag_weight(Hypothesis truth, double posterior_B);

/// (1 - || P(F) rho_F - P(B) rho_B ||_1) / 2
double hep_conditional(const Op& cond_B, const Op& cond_F, double posterior_B);

/// Fraction of wrongly tagged trajectories at the snapshot nearest to t,
/// with binomial standard error. Ensemble must be split evenly between truths.
Estimate p_err_cont(std::span<const TrajectoryResult> ensemble, double t);

/// Mean of hep_conditional at the snapshot nearest to t, with sample standard error.
Estimate p_err_cont_proj(std::span<const TrajectoryResult> ensemble, double t);

struct BruteForceResult {
  double p_err_cont = 0.5;
  double p_err_cont_proj = 0.5;
  double total_probability_B = 1;
  double total_probability_F = 1;
  /// Probability-weighted average of the conditional state under each hypothesis.
  Op mean_state_B;
  Op mean_state_F;
};

inline constexpr std::size_t kMaxBruteForceSteps = 12;

/// Enumerates every photodetection record of length n_steps (<= 12) with its
/// exact probability under each hypothesis.
BruteForceResult brute_force_pd(const ModelParams& p, const MeasurementScheme& s, const State& rho0,
                                std::size_t n_steps);

struct CampaignOptions {
  double t_max = 1.0;
  std::size_t n_traj = 1000;
  std::uint64_t seed = 1;
  std::size_t grid_points = 200;
  unsigned workers = 0;
  /// Coarse Wiener grid; 0 means the integration step (see NoiseStream).
  double noise_dt = 0;
  bool check_states = false;
};

struct DiscriminationReport {
  std::vector<double> t_grid;
  std::vector<double> p_err_cont;
  std::vector<double> se_cont;
  std::vector<double> p_err_cont_proj;
  std::vector<double> se_proj;
  std::vector<double> n_wrong;  // tie-weighted count
  std::size_t n_traj = 0;
  double min_eigenvalue = 1.0;
  double max_trace_defect = 0.0;

  /// Grid index closest to t.
  std::size_t index_at(double t) const;
  std::string to_csv() const;
};

/// Evenly spaced report times in [0, t_max], snapped to integration steps.
std::vector<std::size_t> report_steps(double t_max, double dt, std::size_t grid_points);

/// Runs n_traj/2 trajectories per true hypothesis (trajectory i uses stream i;
/// the first half is Bose) and evaluates both error probabilities on the grid.
DiscriminationReport mc_campaign(const ModelParams& p, const MeasurementScheme& s, const State& rho0,
                                 const CampaignOptions& options);

}  // namespace qbt
