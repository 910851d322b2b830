// Continuously monitored trajectories of the probe, filtered in parallel under
// both bath hypotheses with a Kraus-operator integration scheme.
#pragma once

#include "qbt/lindblad.hpp"
#include "qbt/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace qbt {

enum class Unravelling { Photodetection, Homodyne, None };
std::string_view to_string(Unravelling u);

/// Largest admissible kappa * dt.
inline constexpr double kMaxKappaDt = 0.05;

struct MeasurementScheme {
  Unravelling kind = Unravelling::Homodyne;
  double eta = 1.0;
  double dt = 1e-3;

  /// Checks 0 <= eta <= 1, dt > 0 and the kappa * dt stability guard.
  void validate(const ModelParams& p) const;
};

/// Kraus operators grouped by measurement outcome: families[x] holds every
/// M_x^(k). Homodyne sets carry a single family for the given photocurrent.
struct KrausSet {
  std::vector<std::vector<Op>> families;
};

/// Outcome 0: {1 - (kappa/2) c^dag c dt, sqrt((1-eta) kappa dt) c}; outcome 1: {sqrt(eta kappa dt) c}.
KrausSet kraus_photodetection(const ModelParams& p, const MeasurementScheme& s, Eigen::Index dim = 2);

/// {1 - (kappa/2) c^dag c dt + sqrt(eta kappa) c dy, sqrt((1-eta) kappa dt) c}.
KrausSet kraus_homodyne(const ModelParams& p, const MeasurementScheme& s, double dy, Eigen::Index dim = 2);

/// Sum over every family of M^dagger M.
Op completeness(const KrausSet& k);

/// One filter step under hypothesis q for the integration step `s.dt`.
///
/// The bath generator is applied as the exact channel exp(L_q dt), which
/// agrees with rho + L_q rho dt to first order and keeps the state positive.
/// The Kraus family of `outcome` is then applied and the result normalized.
///
/// `log_likelihood` is the log of the outcome's probability under this
/// filter: for photodetection the probabilities of the two outcomes sum to
/// one, for homodyne it is the density relative to the Wiener measure
/// (the Gaussian average over dy integrates to one).
struct StepResult {
  State state;
  double log_likelihood;
};
StepResult step(const ModelParams& p, Hypothesis q, const MeasurementScheme& s, const State& rho, double outcome);

/// Draws the next record from the true-hypothesis state.
/// Photodetection: 1 with probability eta kappa Tr[rho c^dag c] dt, else 0.
/// Homodyne: dy = sqrt(eta kappa) Tr[rho (c + c^dag)] dt + dW.
/// None: always 0.
double sample_outcome(const ModelParams& p, Hypothesis true_q, const MeasurementScheme& s, const State& rho_true,
                      NoiseStream& noise);

/// Precomputed per-hypothesis filter for repeated stepping.
class Filter {
 public:
  Filter(const ModelParams& p, Hypothesis q, const MeasurementScheme& s, Eigen::Index dim);
  ~Filter();
  Filter(Filter&&) noexcept;
  Filter& operator=(Filter&&) noexcept;

  Eigen::Index dim() const;
  /// exp(L_q dt) rho, trace-normalized (kappa is included only for Unravelling::None).
  Op evolve(const Op& rho) const;
  /// Probability of outcome x under the evolved state `evolved` (0 marks an impossible outcome).
  double outcome_probability(const Op& evolved, double outcome) const;
  /// Applies the Kraus family in place and returns the outcome probability.
  double measure(Op& evolved, double outcome) const;

  struct Impl;
  const Impl& impl() const { return *impl_; }

 private:
  std::unique_ptr<Impl> impl_;
};

struct TrajectoryOptions {
  /// Steps (0 = initial state) at which states and likelihoods are stored;
  /// empty means every step.
  std::vector<std::size_t> snapshot_steps;
  bool keep_record = true;
  /// Track the minimum eigenvalue and trace defect of both filters at every step.
  bool check_states = false;
};

struct TrajectoryResult {
  Hypothesis truth = Hypothesis::Bose;
  double dt = 0;
  std::vector<double> record;
  std::vector<std::size_t> snapshot_steps;
  std::vector<State> cond_B;
  std::vector<State> cond_F;
  std::vector<double> loglik_B;
  std::vector<double> loglik_F;
  std::vector<double> posterior_B;
  double min_eigenvalue = 1.0;
  double max_trace_defect = 0.0;

  double posterior_F(std::size_t i) const { return 1.0 - posterior_B[i]; }
  double time(std::size_t i) const { return static_cast<double>(snapshot_steps[i]) * dt; }
  /// Snapshot index whose time is closest to t.
  std::size_t snapshot_at(double t) const;
};

/// 1/(1 + exp(loglik_F - loglik_B)) for flat priors.
double posterior_bose(double loglik_B, double loglik_F);

/// Number of integration steps covering [0, t].
std::size_t step_count(double t, double dt);

/// Samples records from the `true_q` filter and runs both hypothesis filters on them.
TrajectoryResult run_trajectory(const ModelParams& p, Hypothesis true_q, const MeasurementScheme& s, const State& rho0,
                                double t, NoiseStream& noise, const TrajectoryOptions& options = {});

/// Lightweight snapshot callback used by ensemble drivers.
struct SnapshotView {
  std::size_t index;
  std::size_t step;
  const Op& rho_B;
  const Op& rho_F;
  double loglik_B;
  double loglik_F;
};
struct StateCheck {
  double min_eigenvalue = 1.0;
  double max_trace_defect = 0.0;
};
StateCheck simulate(const ModelParams& p, Hypothesis true_q, const MeasurementScheme& s, const State& rho0,
                    std::size_t n_steps, NoiseStream& noise, std::span<const std::size_t> snapshot_steps,
                    bool check_states, const std::function<void(const SnapshotView&)>& on_snapshot,
                    std::vector<double>* record = nullptr);

/// Trajectory-averaged true-hypothesis conditional state at the given steps.
struct MeanState {
  Op mean;
  /// sqrt(sum_i ||rho_i - mean||_F^2 / (n (n - 1))).
  double std_err;
};
std::vector<MeanState> ensemble_mean_state(const ModelParams& p, Hypothesis true_q, const MeasurementScheme& s,
                                           const State& rho0, std::span<const std::size_t> steps, std::size_t n_traj,
                                           std::uint64_t seed, unsigned workers = 0, double noise_dt = 0);

/// CSV dump: trajectory_id,step,outcome,loglik_B,loglik_F,posterior_B (one row per snapshot).
void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryResult> trajectories,
                          std::size_t first_id = 0, bool header = true);

}  // namespace qbt
