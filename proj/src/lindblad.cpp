#include "qbt/lindblad.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qbt {

namespace {

constexpr double kMinBoseBetaOmega = 1e-9;

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be finite");
}

Eigen::VectorXcd vec(const Op& m) {
  const Eigen::Index d = m.rows();
  Eigen::VectorXcd v(d * d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) v(i + j * d) = m(i, j);
  return v;
}

Op unvec(const Eigen::VectorXcd& v, Eigen::Index d) {
  Op m(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) m(i, j) = v(i + j * d);
  return m;
}

// Steady population written as (num0 + num1 kappa) / (den0 + den1 kappa).
struct PopulationFraction {
  double num0, num1, den0, den1;
};

PopulationFraction population_fraction(const ModelParams& p, Hypothesis q) {
  auto num = [](const Rates& r) { return r.plus + r.x / 4; };
  auto den = [](const Rates& r) { return r.plus + r.minus + r.x / 2; };
  ModelParams at0 = p;
  at0.kappa = 0;
  ModelParams at1 = p;
  at1.kappa = 1;
  const Rates r0 = extended_rates(at0, q);
  const Rates r1 = extended_rates(at1, q);
  return {num(r0), num(r1) - num(r0), den(r0), den(r1) - den(r0)};
}

}  // namespace

std::string_view to_string(Hypothesis q) { return q == Hypothesis::Bose ? "B" : "F"; }

std::string_view to_string(Coupling c) {
  return c == Coupling::SigmaMinus ? "sigma_minus" : "sigma_x_half";
}

void ModelParams::validate() const {
  require_finite(gamma, "gamma");
  require_finite(kappa, "kappa");
  require_finite(omega0, "omega0");
  require_finite(beta_omega_B, "beta_omega_B");
  require_finite(beta_omega_F, "beta_omega_F");
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
  if (kappa < 0) throw std::invalid_argument("kappa must be non-negative");
  if (omega0 < 0) throw std::invalid_argument("omega0 must be non-negative");
  if (beta_omega_B < kMinBoseBetaOmega)
    throw std::invalid_argument("beta_omega_B must be at least 1e-9 (Bose occupation diverges)");
  if (beta_omega_F < 0) throw std::invalid_argument("beta_omega_F must be non-negative");
  for (Hypothesis q : {Hypothesis::Bose, Hypothesis::Fermi}) {
    const double n = occupation(*this, q);
    if (!std::isfinite(n) || !(n > 0)) throw std::invalid_argument("bath occupation is not finite and positive");
  }
}

double beta_omega_for_bose(double n) {
  if (!(n > 0) || !std::isfinite(n)) throw std::invalid_argument("Bose occupation must be finite and positive");
  return std::log1p(1.0 / n);
}

double occupation(Hypothesis q, double beta_omega) {
  if (std::isnan(beta_omega)) throw std::invalid_argument("beta*omega0 is NaN");
  if (q == Hypothesis::Bose) {
    if (!(beta_omega >= kMinBoseBetaOmega))
      throw std::invalid_argument("Bose occupation requires beta*omega0 >= 1e-9");
    return 1.0 / std::expm1(beta_omega);
  }
  if (beta_omega < 0) throw std::invalid_argument("Fermi occupation requires beta*omega0 >= 0");
  return 1.0 / (std::exp(beta_omega) + 1.0);
}

Op jump_operator(Coupling c) {
  return c == Coupling::SigmaMinus ? sigma_minus() : Op(sigma_x() / 2.0);
}

Rates extended_rates(const ModelParams& p, Hypothesis q) {
  const double n = occupation(p, q);
  Rates r;
  r.minus = p.gamma * (1.0 + sign(q) * n);
  r.plus = p.gamma * n;
  if (p.coupling == Coupling::SigmaMinus)
    r.minus += p.kappa;
  else
    r.x = p.kappa;
  return r;
}

Op bath_generator_apply(const ModelParams& p, Hypothesis q, const Op& rho) {
  const Eigen::Index d = rho.rows();
  check_dim(d);
  const double n = occupation(p, q);
  const Op sm = lift(sigma_minus(), d);
  const Op sp = lift(sigma_plus(), d);
  const Op h = p.omega0 * (sp * sm);
  const std::complex<double> i(0, 1);
  return -i * (h * rho - rho * h) + p.gamma * (1.0 + sign(q) * n) * dissipator(sm, rho) +
         p.gamma * n * dissipator(sp, rho);
}

Op generator_apply(const ModelParams& p, Hypothesis q, const Op& rho) {
  Op out = bath_generator_apply(p, q, rho);
  if (p.kappa > 0) out += p.kappa * dissipator(lift(jump_operator(p.coupling), rho.rows()), rho);
  return out;
}

Eigen::MatrixXcd generator_matrix(const ModelParams& p, Hypothesis q, Eigen::Index dim, bool with_auxiliary) {
  check_dim(dim);
  Eigen::MatrixXcd s(dim * dim, dim * dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) {
      Op e = Op::Zero(dim, dim);
      e(i, j) = 1;
      const Op image = with_auxiliary ? generator_apply(p, q, e) : bath_generator_apply(p, q, e);
      s.col(i + j * dim) = vec(image);
    }
  return s;
}

Eigen::MatrixXcd propagator_matrix(const ModelParams& p, Hypothesis q, Eigen::Index dim, double t,
                                   bool with_auxiliary) {
  if (!(t >= 0) || !std::isfinite(t)) throw std::invalid_argument("propagation time must be finite and >= 0");
  if (t == 0) return Eigen::MatrixXcd::Identity(dim * dim, dim * dim);
  const Eigen::MatrixXcd lt = generator_matrix(p, q, dim, with_auxiliary) * t;
  return lt.exp();
}

Op apply_superoperator(const Eigen::MatrixXcd& s, const Op& rho) {
  const Eigen::Index d = rho.rows();
  if (s.rows() != d * d || s.cols() != d * d) throw DimensionError("superoperator and state dimensions differ");
  return unvec(s * vec(rho), d);
}

State propagate(const ModelParams& p, Hypothesis q, const State& rho0, double t) {
  p.validate();
  if (t == 0) return rho0;
  const Eigen::MatrixXcd s = propagator_matrix(p, q, rho0.dim(), t);
  return State::normalized(apply_superoperator(s, rho0.matrix()));
}

double steady_population(const ModelParams& p, Hypothesis q) {
  p.validate();
  const Rates r = extended_rates(p, q);
  return (r.plus + r.x / 4) / (r.plus + r.minus + r.x / 2);
}

State steady_state(const ModelParams& p, Hypothesis q) {
  const double pop = steady_population(p, q);
  Op m = Op::Zero(2, 2);
  m(basis::excited, basis::excited) = pop;
  m(basis::ground, basis::ground) = 1.0 - pop;
  return State(m);
}

double heat_flow(const ModelParams& p, Hypothesis q) {
  const State ss = steady_state(p, q);
  const Op h = p.omega0 * (sigma_plus() * sigma_minus());
  const Op d = dissipator(jump_operator(p.coupling), ss.matrix());
  return -p.kappa * (h * d).trace().real();
}

double heat_flow_reduced(const ModelParams& p, Hypothesis q) {
  const double pop = steady_population(p, q);
  if (p.coupling == Coupling::SigmaMinus) return pop;
  return -(1.0 - 2.0 * pop) / 4.0;
}

double hep_infinity(const ModelParams& p) {
  return 0.5 * (1.0 - std::abs(steady_population(p, Hypothesis::Bose) - steady_population(p, Hypothesis::Fermi)));
}

double hep_infinity_from_heat(const ModelParams& p) {
  const double scale = p.omega0 * p.kappa;
  if (!(scale > 0)) throw std::domain_error("heat-flow form needs omega0 * kappa > 0");
  const double dq = std::abs(heat_flow(p, Hypothesis::Bose) - heat_flow(p, Hypothesis::Fermi));
  if (p.coupling == Coupling::SigmaMinus) return 0.5 - dq / (2.0 * scale);
  return 0.5 * (1.0 - 2.0 * dq / scale);
}

double kappa_best(const ModelParams& p) {
  p.validate();
  if (!p.equal_temperatures()) throw std::domain_error("kappa_best is defined for equal bath temperatures only");
  const double root = std::sqrt(2.0 * occupation(Hypothesis::Bose, p.beta_omega_B) + 1.0);
  return (p.coupling == Coupling::SigmaMinus ? 1.0 : 2.0) * p.gamma * root;
}

std::optional<double> kappa_critical(const ModelParams& p) {
  p.validate();
  // p_B(k) = p_F(k) with p_q = (a + b k)/(c + d k) becomes A k^2 + B k + C = 0.
  const PopulationFraction fb = population_fraction(p, Hypothesis::Bose);
  const PopulationFraction ff = population_fraction(p, Hypothesis::Fermi);
  const double A = fb.num1 * ff.den1 - ff.num1 * fb.den1;
  const double B = fb.num0 * ff.den1 + fb.num1 * ff.den0 - ff.num0 * fb.den1 - ff.num1 * fb.den0;
  const double C = fb.num0 * ff.den0 - ff.num0 * fb.den0;

  std::vector<double> roots;
  const double scale = std::max({std::abs(A) * p.gamma * p.gamma, std::abs(B) * p.gamma, std::abs(C)});
  if (std::abs(A) * p.gamma * p.gamma <= 1e-14 * scale) {
    if (B != 0) roots.push_back(-C / B);
  } else {
    const double disc = B * B - 4 * A * C;
    if (disc >= 0) {
      const double s = std::sqrt(disc);
      const double q = -0.5 * (B + std::copysign(s, B));
      roots.push_back(q / A);
      if (q != 0) roots.push_back(C / q);
    }
  }

  std::optional<double> best;
  for (double k : roots) {
    if (!std::isfinite(k) || !(k > 1e-9 * p.gamma)) continue;
    if (!best || k < *best) best = k;
  }
  if (!best) return std::nullopt;

  ModelParams at = p;
  at.kappa = *best;
  if (!(std::abs(hep_infinity(at) - 0.5) <= 1e-10))
    throw std::logic_error("kappa_critical root does not equalize the steady populations");
  return best;
}

double hep_at(const ModelParams& p, const State& rho0, double t) {
  if (!(t >= 0)) throw std::invalid_argument("hep_at: time must be non-negative");
  const State rb = propagate(p, Hypothesis::Bose, rho0, t);
  const State rf = propagate(p, Hypothesis::Fermi, rho0, t);
  return 0.5 * (1.0 - trace_norm((rb.matrix() - rf.matrix()).eval()) / 2.0);
}

HepMinimum hep_minimum(const ModelParams& p, const State& rho0, double t_lo, double t_hi, int grid) {
  p.validate();
  if (!(t_lo > 0) || !(t_hi > t_lo) || grid < 3) throw std::invalid_argument("hep_minimum: bad search interval");
  const Eigen::Index d = rho0.dim();
  const Eigen::MatrixXcd lb = generator_matrix(p, Hypothesis::Bose, d);
  const Eigen::MatrixXcd lf = generator_matrix(p, Hypothesis::Fermi, d);
  auto hep = [&](double t) {
    const Eigen::MatrixXcd eb = (lb * t).exp();
    const Eigen::MatrixXcd ef = (lf * t).exp();
    const Op diff = apply_superoperator(eb, rho0.matrix()) - apply_superoperator(ef, rho0.matrix());
    return 0.5 * (1.0 - trace_norm(diff) / 2.0);
  };

  const double lo = std::log(t_lo), hi = std::log(t_hi);
  auto time_at = [&](int i) { return std::exp(lo + (hi - lo) * i / (grid - 1)); };
  int arg = 0;
  double best = hep(time_at(0));
  for (int i = 1; i < grid; ++i) {
    const double v = hep(time_at(i));
    if (v < best) {
      best = v;
      arg = i;
    }
  }

  // Golden-section search in log time between the neighbours of the grid minimum.
  double a = std::log(time_at(std::max(arg - 1, 0)));
  double b = std::log(time_at(std::min(arg + 1, grid - 1)));
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = hep(std::exp(x1)), f2 = hep(std::exp(x2));
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = hep(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = hep(std::exp(x2));
    }
  }
  HepMinimum out{time_at(arg), best};
  const double xm = 0.5 * (a + b);
  const double fm = hep(std::exp(xm));
  if (fm < out.hep) out = {std::exp(xm), fm};
  return out;
}

SteadyStateReport steady_report(const ModelParams& p) {
  SteadyStateReport r;
  r.p_B = steady_population(p, Hypothesis::Bose);
  r.p_F = steady_population(p, Hypothesis::Fermi);
  r.heat_flow_B = heat_flow_reduced(p, Hypothesis::Bose);
  r.heat_flow_F = heat_flow_reduced(p, Hypothesis::Fermi);
  r.hep_infinity = 0.5 * (1.0 - std::abs(r.p_B - r.p_F));
  return r;
}

}  // namespace qbt
