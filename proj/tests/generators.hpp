// Small hand-rolled generators for property tests.
#pragma once

#include "qbt/lindblad.hpp"

#include <random>

namespace gen {

using Rng = std::mt19937_64;

inline double uniform(Rng& r, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(r); }

inline std::complex<double> complex_normal(Rng& r) {
  std::normal_distribution<double> n;
  return {n(r), n(r)};
}

inline qbt::Op matrix(Rng& r, Eigen::Index d) {
  qbt::Op m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = complex_normal(r);
  return m;
}

inline qbt::Op hermitian(Rng& r, Eigen::Index d) {
  const qbt::Op m = matrix(r, d);
  return (m + m.adjoint()) / 2.0;
}

/// Random full-rank density matrix (Ginibre construction), occasionally pure.
inline qbt::State state(Rng& r, Eigen::Index d) {
  if (std::uniform_int_distribution<int>(0, 4)(r) == 0) {
    qbt::Ket psi(d);
    for (Eigen::Index i = 0; i < d; ++i) psi(i) = complex_normal(r);
    return qbt::State::from_ket(psi);
  }
  const qbt::Op g = matrix(r, d);
  return qbt::State::normalized(g * g.adjoint());
}

inline Eigen::Index dim(Rng& r) { return std::uniform_int_distribution<int>(0, 1)(r) ? 4 : 2; }

inline qbt::ModelParams params(Rng& r) {
  qbt::ModelParams p;
  p.gamma = uniform(r, 0.2, 3.0);
  p.kappa = std::uniform_int_distribution<int>(0, 5)(r) == 0 ? 0.0 : uniform(r, 0.0, 5.0);
  p.omega0 = uniform(r, 0.0, 2.0);
  p.beta_omega_B = uniform(r, 0.05, 4.0);
  p.beta_omega_F = std::uniform_int_distribution<int>(0, 2)(r) == 0 ? p.beta_omega_B : uniform(r, 0.05, 4.0);
  p.coupling = std::uniform_int_distribution<int>(0, 1)(r) ? qbt::Coupling::SigmaXHalf : qbt::Coupling::SigmaMinus;
  return p;
}

}  // namespace gen
