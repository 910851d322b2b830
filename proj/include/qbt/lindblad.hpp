// Unconditional dynamics of the probe (plus memory) under the two bath
// hypotheses, and the closed-form steady-state analytics.
#pragma once

#include "qbt/qcore.hpp"

#include <optional>
#include <string_view>

namespace qbt {

/// Bath statistics under test. Bose carries sign +1, Fermi sign -1.
enum class Hypothesis { Bose, Fermi };

constexpr int sign(Hypothesis q) { return q == Hypothesis::Bose ? 1 : -1; }
constexpr Hypothesis other(Hypothesis q) {
  return q == Hypothesis::Bose ? Hypothesis::Fermi : Hypothesis::Bose;
}
std::string_view to_string(Hypothesis q);

/// Jump operator of the auxiliary (monitored) channel.
enum class Coupling { SigmaMinus, SigmaXHalf };
std::string_view to_string(Coupling c);

struct ModelParams {
  double gamma = 1.0;
  double kappa = 0.0;
  double omega0 = 0.0;
  double beta_omega_B = 1.0 / 5.5;
  double beta_omega_F = 1.0 / 5.5;
  Coupling coupling = Coupling::SigmaMinus;

  /// Throws std::invalid_argument when rates or temperatures are out of range.
  void validate() const;
  double beta_omega(Hypothesis q) const { return q == Hypothesis::Bose ? beta_omega_B : beta_omega_F; }
  bool equal_temperatures() const { return beta_omega_B == beta_omega_F; }
};

/// beta*omega0 whose Bose-Einstein occupation equals n (n > 0).
double beta_omega_for_bose(double n);

/// 1/(exp(beta_omega) - s_q). Bose requires beta_omega >= 1e-9.
double occupation(Hypothesis q, double beta_omega);
inline double occupation(const ModelParams& p, Hypothesis q) { return occupation(q, p.beta_omega(q)); }

/// Probe-space jump operator for the auxiliary channel (2x2).
Op jump_operator(Coupling c);

/// Decay, excitation and sigma_x/2 dephasing rates of the extended generator.
struct Rates {
  double minus = 0;
  double plus = 0;
  double x = 0;
};
Rates extended_rates(const ModelParams& p, Hypothesis q);

/// Thermal-bath part only: -i[H,rho] + gamma(1+sN)D[s-]rho + gamma N D[s+]rho.
Op bath_generator_apply(const ModelParams& p, Hypothesis q, const Op& rho);

/// Full unconditional generator, including kappa D[c]rho.
Op generator_apply(const ModelParams& p, Hypothesis q, const Op& rho);

/// Column-stacked superoperator matrix (dim^2 x dim^2) of the bath part, or of
/// the full generator when `with_auxiliary` is set.
Eigen::MatrixXcd generator_matrix(const ModelParams& p, Hypothesis q, Eigen::Index dim,
                                  bool with_auxiliary = true);

/// exp(L t) applied to a vectorized operator via scaling-and-squaring.
Eigen::MatrixXcd propagator_matrix(const ModelParams& p, Hypothesis q, Eigen::Index dim, double t,
                                   bool with_auxiliary = true);

Op apply_superoperator(const Eigen::MatrixXcd& s, const Op& rho);

State propagate(const ModelParams& p, Hypothesis q, const State& rho0, double t);

/// Steady excited population p_q from the rate formulas.
double steady_population(const ModelParams& p, Hypothesis q);
State steady_state(const ModelParams& p, Hypothesis q);

/// Heat flowing from the bath into the auxiliary channel at steady state,
/// -kappa Tr[H_S D[c] rho_ss].
double heat_flow(const ModelParams& p, Hypothesis q);

/// heat_flow / (omega0 kappa); finite at omega0 = 0 and kappa = 0.
double heat_flow_reduced(const ModelParams& p, Hypothesis q);

/// Steady-state Helstrom error probability (1 - |p_B - p_F|)/2.
double hep_infinity(const ModelParams& p);

/// Same quantity written through the heat flows (requires omega0 kappa > 0).
double hep_infinity_from_heat(const ModelParams& p);

/// Auxiliary rate minimizing hep_infinity; equal temperatures only.
double kappa_best(const ModelParams& p);

/// Smallest positive kappa where the steady populations coincide, if any.
std::optional<double> kappa_critical(const ModelParams& p);

/// Helstrom error probability between the two unconditional states at time t.
double hep_at(const ModelParams& p, const State& rho0, double t);

struct HepMinimum {
  double t = 0;
  double hep = 0.5;
};
/// Minimizes hep_at over [t_lo, t_hi] on a log grid followed by golden-section refinement.
HepMinimum hep_minimum(const ModelParams& p, const State& rho0, double t_lo, double t_hi,
                       int grid = 400);

struct SteadyStateReport {
  double p_B = 0;
  double p_F = 0;
  double heat_flow_B = 0;  // in units of omega0 kappa
  double heat_flow_F = 0;
  double hep_infinity = 0.5;
};
SteadyStateReport steady_report(const ModelParams& p);

}  // namespace qbt
