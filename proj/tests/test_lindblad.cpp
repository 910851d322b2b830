#include "doctest.h"
#include "generators.hpp"

#include <cmath>

using namespace qbt;

namespace {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Column-stacked superoperator from vec(A X B) = (B^T kron A) vec(X).
Eigen::MatrixXcd kron_generator(const ModelParams& p, Hypothesis q, Eigen::Index d) {
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
  auto lifted = [&](const Op& a) { return Eigen::MatrixXcd(d == 2 ? Eigen::MatrixXcd(a) : kron(a, Eigen::MatrixXcd::Identity(2, 2))); };
  auto dissipator_matrix = [&](const Eigen::MatrixXcd& c) {
    const Eigen::MatrixXcd cdc = c.adjoint() * c;
    return Eigen::MatrixXcd(kron(c.conjugate(), c) - 0.5 * kron(id, cdc) - 0.5 * kron(cdc.transpose(), id));
  };
  const double x = p.beta_omega(q);
  const double n = q == Hypothesis::Bose ? 1.0 / (std::exp(x) - 1.0) : 1.0 / (std::exp(x) + 1.0);
  const double s = q == Hypothesis::Bose ? 1.0 : -1.0;
  Op sm = Op::Zero(2, 2);
  sm(1, 0) = 1;  // |ground><excited|
  Op n_op = Op::Zero(2, 2);
  n_op(0, 0) = 1;
  Op c = p.coupling == Coupling::SigmaMinus ? sm : Op(0.5 * (sm + sm.adjoint()));
  const Eigen::MatrixXcd h = p.omega0 * lifted(n_op);
  const std::complex<double> i(0, 1);
  return -i * (kron(id, h) - kron(h.transpose(), id)) + p.gamma * (1 + s * n) * dissipator_matrix(lifted(sm)) +
         p.gamma * n * dissipator_matrix(lifted(sm.adjoint())) + p.kappa * dissipator_matrix(lifted(c));
}

Eigen::VectorXcd vec(const Op& m) { return Eigen::Map<const Eigen::VectorXcd>(Eigen::MatrixXcd(m).data(), m.size()); }

Op rk4(const ModelParams& p, Hypothesis q, Op rho, double t, int steps) {
  const double h = t / steps;
  for (int k = 0; k < steps; ++k) {
    const Op k1 = generator_apply(p, q, rho);
    const Op k2 = generator_apply(p, q, Op(rho + 0.5 * h * k1));
    const Op k3 = generator_apply(p, q, Op(rho + 0.5 * h * k2));
    const Op k4 = generator_apply(p, q, Op(rho + h * k3));
    rho += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return rho;
}

ModelParams sigma_minus_bose(double n_bose, double kappa) {
  ModelParams p;
  p.kappa = kappa;
  p.beta_omega_B = p.beta_omega_F = beta_omega_for_bose(n_bose);
  return p;
}

}  // namespace

TEST_CASE("occupation numbers") {
  CHECK(occupation(Hypothesis::Bose, std::log(2.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(occupation(Hypothesis::Fermi, std::log(2.0)) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(occupation(Hypothesis::Bose, 1.0 / 5.5) == doctest::Approx(5.015143173774454).epsilon(1e-14));
  CHECK(occupation(Hypothesis::Fermi, 0.0) == 0.5);
  CHECK_THROWS(occupation(Hypothesis::Bose, 0.0));
  CHECK_THROWS(occupation(Hypothesis::Bose, 1e-10));
  for (double n : {0.1, 0.5, 1.0, 2.0, 50.0}) CHECK(occupation(Hypothesis::Bose, beta_omega_for_bose(n)) == doctest::Approx(n).epsilon(1e-12));
}

TEST_CASE("hypothesis signs") {
  CHECK(sign(Hypothesis::Bose) == 1);
  CHECK(sign(Hypothesis::Fermi) == -1);
  CHECK(other(Hypothesis::Bose) == Hypothesis::Fermi);
}

TEST_CASE("generator matches the Kronecker-form superoperator") {
  gen::Rng r(21);
  for (int n = 0; n < 200; ++n) {
    const ModelParams p = gen::params(r);
    const Hypothesis q = n % 2 ? Hypothesis::Bose : Hypothesis::Fermi;
    const Eigen::Index d = gen::dim(r);
    const Eigen::MatrixXcd oracle = kron_generator(p, q, d);
    const State rho = gen::state(r, d);
    const Op out = generator_apply(p, q, rho.matrix());
    CHECK((vec(out) - oracle * vec(rho.matrix())).norm() <= 1e-12 * (1 + oracle.norm()));
    CHECK((generator_matrix(p, q, d) - oracle).norm() <= 1e-12 * (1 + oracle.norm()));
    CHECK(std::abs(out.trace()) <= 1e-12 * (1 + oracle.norm()));
  }
}

TEST_CASE("Gibbs state is a fixed point without the auxiliary channel") {
  gen::Rng r(22);
  for (int n = 0; n < 50; ++n) {
    ModelParams p = gen::params(r);
    p.kappa = 0;
    for (Hypothesis q : {Hypothesis::Bose, Hypothesis::Fermi}) {
      // Thermal excited population of the hypothesis q bath: N/(1 + (1 + s)N).
      const double occ = occupation(p, q);
      const double pop = occ / (1 + (1 + sign(q)) * occ);
      Op g = Op::Zero(2, 2);
      g(basis::excited, basis::excited) = pop;
      g(basis::ground, basis::ground) = 1 - pop;
      CHECK(generator_apply(p, q, g).norm() <= 1e-12 * (1 + p.gamma * occ));
    }
  }
}

TEST_CASE("propagation agrees with Runge-Kutta integration") {
  gen::Rng r(23);
  for (int n = 0; n < 20; ++n) {
    const ModelParams p = gen::params(r);
    const Hypothesis q = n % 2 ? Hypothesis::Bose : Hypothesis::Fermi;
    const State rho = gen::state(r, gen::dim(r));
    const double t = gen::uniform(r, 0.1, 1.5);
    const Op oracle = rk4(p, q, rho.matrix(), t, 4000);
    CHECK((propagate(p, q, rho, t).matrix() - oracle).norm() <= 1e-9);
  }
}

TEST_CASE("propagation basics") {
  gen::Rng r(24);
  const ModelParams p = gen::params(r);
  const State rho = gen::state(r, 4);
  CHECK((propagate(p, Hypothesis::Bose, rho, 0.0).matrix() - rho.matrix()).norm() <= 1e-15);
  CHECK_THROWS(propagate(p, Hypothesis::Bose, rho, -1.0));
  for (double t : {0.3, 1.0, 4.0}) {
    const State out = propagate(p, Hypothesis::Fermi, phi_plus(), t);
    CHECK((partial_trace_matrix(out.matrix(), Subsystem::Memory) - Op::Identity(2, 2) / 2.0).norm() <= 1e-12);
  }
}

TEST_CASE("long-time propagation reaches the steady populations") {
  gen::Rng r(25);
  for (int n = 0; n < 100; ++n) {
    const ModelParams p = gen::params(r);
    const Hypothesis q = n % 2 ? Hypothesis::Bose : Hypothesis::Fermi;
    const State out = propagate(p, q, gen::state(r, gen::dim(r)), 50.0 / p.gamma);
    const Op probe = out.dim() == 2 ? out.matrix() : partial_trace_matrix(out.matrix(), Subsystem::Probe);
    CHECK(std::abs(probe(basis::excited, basis::excited).real() - steady_population(p, q)) <= 1e-8);
    CHECK(std::abs(probe(0, 1)) <= 1e-8);
    CHECK(generator_apply(p, q, steady_state(p, q).matrix()).norm() <= 1e-12 * (1 + p.gamma + p.kappa));
  }
}

TEST_CASE("steady populations") {
  const ModelParams thermal = sigma_minus_bose(2.0, 0.0);
  CHECK(steady_population(thermal, Hypothesis::Bose) == doctest::Approx(2.0 / 5.0).epsilon(1e-14));
  CHECK(steady_population(sigma_minus_bose(2.0, std::sqrt(5.0)), Hypothesis::Bose) ==
        doctest::Approx(2.0 / (5.0 + std::sqrt(5.0))).epsilon(1e-14));
  CHECK(steady_population(sigma_minus_bose(2.0, 1.0), Hypothesis::Fermi) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(steady_population(sigma_minus_bose(2.0, std::sqrt(5.0)), Hypothesis::Bose) ==
        doctest::Approx(0.276393202250021).epsilon(1e-13));
}

TEST_CASE("heat flows") {
  ModelParams p = sigma_minus_bose(2.0, 1.0);
  p.omega0 = 1.0;
  CHECK(heat_flow(p, Hypothesis::Bose) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(heat_flow(p, Hypothesis::Fermi) == doctest::Approx(0.2).epsilon(1e-14));
  p.kappa = 0;
  CHECK(heat_flow(p, Hypothesis::Bose) == 0.0);

  gen::Rng r(26);
  for (int n = 0; n < 200; ++n) {
    ModelParams g = gen::params(r);
    for (Hypothesis q : {Hypothesis::Bose, Hypothesis::Fermi}) {
      const double pop = steady_population(g, q);
      const double expected = g.coupling == Coupling::SigmaMinus ? g.omega0 * g.kappa * pop
                                                                 : -g.omega0 * g.kappa * (1 - 2 * pop) / 4;
      CHECK(heat_flow(g, q) == doctest::Approx(expected).epsilon(1e-12).scale(1));
      CHECK(heat_flow_reduced(g, q) * g.omega0 * g.kappa == doctest::Approx(heat_flow(g, q)).epsilon(1e-12).scale(1));
    }
    if (g.omega0 * g.kappa > 0) CHECK(std::abs(hep_infinity(g) - hep_infinity_from_heat(g)) <= 1e-12);
  }
}

TEST_CASE("steady-state error probability") {
  CHECK(hep_infinity(sigma_minus_bose(2.0, 0.0)) == 0.5);
  CHECK(hep_infinity(sigma_minus_bose(2.0, std::sqrt(5.0))) == doctest::Approx(0.423606797749979).epsilon(1e-13));
  CHECK(std::abs(hep_infinity(sigma_minus_bose(2.0, 1e6)) - 0.5) <= 1e-5);
  gen::Rng r(27);
  for (int n = 0; n < 200; ++n) {
    const ModelParams p = gen::params(r);
    const double h = hep_infinity(p);
    CHECK(h >= 0.0);
    CHECK(h <= 0.5);
    CHECK(h == doctest::Approx(0.5 * (1 - std::abs(steady_population(p, Hypothesis::Bose) -
                                                    steady_population(p, Hypothesis::Fermi))))
                   .epsilon(1e-12));
    const SteadyStateReport rep = steady_report(p);
    CHECK(rep.hep_infinity == h);
    CHECK(rep.p_B == steady_population(p, Hypothesis::Bose));
  }
}

TEST_CASE("optimal auxiliary coupling") {
  CHECK(kappa_best(sigma_minus_bose(2.0, 0.0)) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
  ModelParams x = sigma_minus_bose(2.0, 0.0);
  x.coupling = Coupling::SigmaXHalf;
  CHECK(kappa_best(x) == doctest::Approx(2.0 * std::sqrt(5.0)).epsilon(1e-14));
  ModelParams unequal = sigma_minus_bose(2.0, 0.0);
  unequal.beta_omega_F = beta_omega_for_bose(1.0);
  CHECK_THROWS_AS(kappa_best(unequal), std::domain_error);

  // Grid minimum of hep_infinity within one step of the formula.
  gen::Rng r(28);
  for (int n = 0; n < 20; ++n) {
    ModelParams p = gen::params(r);
    p.beta_omega_F = p.beta_omega_B;
    const double best = kappa_best(p);
    const double step = 0.01 * p.gamma;
    double arg = 0, val = 1;
    for (int k = 0; k <= 4000; ++k) {
      ModelParams at = p;
      at.kappa = k * step;
      if (const double h = hep_infinity(at); h < val) {
        val = h;
        arg = at.kappa;
      }
    }
    CHECK(std::abs(arg - best) <= step);
  }
}

TEST_CASE("critical auxiliary coupling") {
  ModelParams p;
  p.beta_omega_B = beta_omega_for_bose(1.0);
  p.beta_omega_F = beta_omega_for_bose(2.0);
  const auto kc = kappa_critical(p);
  REQUIRE(kc.has_value());
  CHECK(*kc == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(hep_infinity(sigma_minus_bose(2.0, 0.0)) == 0.5);
  CHECK_FALSE(kappa_critical(sigma_minus_bose(2.0, 0.0)).has_value());

  ModelParams x = p;
  x.coupling = Coupling::SigmaXHalf;
  CHECK_FALSE(kappa_critical(x).has_value());

  gen::Rng r(29);
  for (int n = 0; n < 300; ++n) {
    ModelParams g = gen::params(r);
    const double nb = occupation(Hypothesis::Bose, g.beta_omega_B);
    const double nf = occupation(Hypothesis::Bose, g.beta_omega_F);
    const auto k = kappa_critical(g);
    std::optional<double> oracle;
    if (g.coupling == Coupling::SigmaMinus) {
      const double v = g.gamma * (nf - nb) / (nb * (1 + 2 * nf) - nf);
      if (std::isfinite(v) && v > 1e-9 * g.gamma) oracle = v;
    } else {
      // Linear in kappa once the x-dephasing rate is substituted.
      const double v = 2 * g.gamma * (nb - nf) / nf;
      if (v > 1e-9 * g.gamma) oracle = v;
    }
    REQUIRE(k.has_value() == oracle.has_value());
    if (k) {
      CHECK(*k == doctest::Approx(*oracle).epsilon(1e-9));
      ModelParams at = g;
      at.kappa = *k;
      CHECK(std::abs(hep_infinity(at) - 0.5) <= 1e-10);
    }
  }
}

TEST_CASE("time-dependent error probability") {
  gen::Rng r(30);
  const ModelParams p = gen::params(r);
  CHECK(hep_at(p, phi_plus(), 0.0) == 0.5);
  CHECK_THROWS(hep_at(p, phi_plus(), -0.1));

  ModelParams eq = sigma_minus_bose(2.0, 0.0);
  CHECK(std::abs(hep_at(eq, excited_state(), 50.0) - 0.5) <= 1e-6);

  for (int n = 0; n < 30; ++n) {
    const ModelParams g = gen::params(r);
    const double t = 50.0 / g.gamma;
    CHECK(std::abs(hep_at(g, gen::state(r, 2), t) - hep_at(g, gen::state(r, 2), t)) <= 1e-6);
    CHECK(std::abs(hep_at(g, gen::state(r, 2), t) - hep_infinity(g)) <= 1e-6);
  }
}

TEST_CASE("error-probability minimum search") {
  ModelParams p = sigma_minus_bose(2.0, 0.5);
  const HepMinimum m = hep_minimum(p, excited_state(), 1e-3, 20.0);
  for (int k = 1; k <= 2000; ++k) CHECK(hep_at(p, excited_state(), k * 0.01) >= m.hep - 1e-9);
  CHECK_THROWS(hep_minimum(p, excited_state(), 1.0, 0.5));
}
