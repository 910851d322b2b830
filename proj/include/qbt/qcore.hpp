// Small dense complex linear algebra for a qubit probe and an optional qubit
// memory. Everything here is header-only and templated on the real scalar.
//
// Basis conventions (used by every module):
//   single qubit: index 0 = |1> (excited), index 1 = |0> (ground)
//   two qubits:   probe is the first tensor factor, memory the second, so
//                 index = 2 * probe_index + memory_index.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace qbt {

template <typename Scalar>
using Operator = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic,
                               Eigen::ColMajor, 4, 4>;
template <typename Scalar>
using StateVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;

using Op = Operator<double>;
using Ket = StateVector<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Subsystem { Probe, Memory };

namespace basis {
inline constexpr int excited = 0;
inline constexpr int ground = 1;
}  // namespace basis

namespace tol {
inline constexpr double hermitian = 1e-12;
inline constexpr double trace = 1e-12;
inline constexpr double eigenvalue = 1e-10;
}  // namespace tol

inline void check_dim(Eigen::Index dim) {
  if (dim != 2 && dim != 4)
    throw DimensionError("operator dimension must be 2 or 4, got " + std::to_string(dim));
}

template <typename Derived>
using RealOf = typename Eigen::NumTraits<typename Derived::Scalar>::Real;

template <typename Scalar = double>
Operator<Scalar> identity(Eigen::Index dim) {
  check_dim(dim);
  return Operator<Scalar>::Identity(dim, dim);
}

/// |0><1|, lowers the probe from excited to ground.
template <typename Scalar = double>
Operator<Scalar> sigma_minus() {
  Operator<Scalar> s = Operator<Scalar>::Zero(2, 2);
  s(basis::ground, basis::excited) = 1;
  return s;
}

template <typename Scalar = double>
Operator<Scalar> sigma_plus() {
  return sigma_minus<Scalar>().adjoint();
}

template <typename Scalar = double>
Operator<Scalar> sigma_x() {
  Operator<Scalar> s = Operator<Scalar>::Zero(2, 2);
  s(0, 1) = 1;
  s(1, 0) = 1;
  return s;
}

template <typename Scalar = double>
Operator<Scalar> projector(const StateVector<Scalar>& psi) {
  return psi * psi.adjoint();
}

/// Largest |A - A^dagger| entry.
template <typename Derived>
RealOf<Derived> hermitian_defect(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// Returns (A + A^dagger)/2, rejecting inputs whose asymmetry exceeds the
/// round-off budget.
template <typename Derived>
Operator<RealOf<Derived>> hermitian_part(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) throw DimensionError("matrix is not square");
  const auto defect = hermitian_defect(a);
  if (!(defect <= tol::hermitian))
    throw std::domain_error("matrix is not Hermitian (defect " + std::to_string(defect) + ")");
  return (a + a.adjoint()) / RealOf<Derived>(2);
}

template <typename Derived>
Eigen::Matrix<RealOf<Derived>, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1> hermitian_eigenvalues(
    const Eigen::MatrixBase<Derived>& a) {
  const Operator<RealOf<Derived>> h = hermitian_part(a);
  Eigen::SelfAdjointEigenSolver<Operator<RealOf<Derived>>> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
template <typename Derived>
RealOf<Derived> trace_norm(const Eigen::MatrixBase<Derived>& a) {
  return hermitian_eigenvalues(a).cwiseAbs().sum();
}

template <typename DerivedA, typename DerivedB>
RealOf<DerivedA> trace_distance(const Eigen::MatrixBase<DerivedA>& a,
                                const Eigen::MatrixBase<DerivedB>& b) {
  return trace_norm((a - b).eval()) / RealOf<DerivedA>(2);
}

/// theta rho theta^dagger - {theta^dagger theta, rho}/2
template <typename DerivedT, typename DerivedR>
Operator<RealOf<DerivedT>> dissipator(const Eigen::MatrixBase<DerivedT>& theta,
                                      const Eigen::MatrixBase<DerivedR>& rho) {
  if (theta.rows() != rho.rows() || theta.cols() != rho.cols() || rho.rows() != rho.cols())
    throw DimensionError("dissipator: operator and state dimensions differ");
  using Real = RealOf<DerivedT>;
  const Operator<Real> t = theta;
  const Operator<Real> r = rho;
  const Operator<Real> tdt = t.adjoint() * t;
  return t * r * t.adjoint() - Real(0.5) * (tdt * r + r * tdt);
}

/// theta rho + rho theta^dagger - Tr[(theta^dagger + theta) rho] rho
template <typename DerivedT, typename DerivedR>
Operator<RealOf<DerivedT>> hsuperop(const Eigen::MatrixBase<DerivedT>& theta,
                                    const Eigen::MatrixBase<DerivedR>& rho) {
  if (theta.rows() != rho.rows() || theta.cols() != rho.cols() || rho.rows() != rho.cols())
    throw DimensionError("hsuperop: operator and state dimensions differ");
  using Real = RealOf<DerivedT>;
  const Operator<Real> t = theta;
  const Operator<Real> r = rho;
  const std::complex<Real> mean = ((t.adjoint() + t) * r).trace();
  return t * r + r * t.adjoint() - mean * r;
}

/// Kronecker product of two qubit operators, probe (a) first, memory (b) second.
template <typename DerivedA, typename DerivedB>
Operator<RealOf<DerivedA>> tensor(const Eigen::MatrixBase<DerivedA>& a,
                                  const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != 2 || a.cols() != 2 || b.rows() != 2 || b.cols() != 2)
    throw DimensionError("tensor: both factors must be 2x2");
  Operator<RealOf<DerivedA>> out(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

/// Embeds a probe operator into a space of dimension `dim` (acts trivially on
/// the memory when dim == 4).
template <typename Derived>
Operator<RealOf<Derived>> lift(const Eigen::MatrixBase<Derived>& probe_op, Eigen::Index dim) {
  check_dim(dim);
  if (probe_op.rows() != 2 || probe_op.cols() != 2) throw DimensionError("lift: expected a 2x2 operator");
  if (dim == 2) return probe_op;
  return tensor(probe_op, identity<RealOf<Derived>>(2));
}

template <typename Derived>
Operator<RealOf<Derived>> partial_trace_matrix(const Eigen::MatrixBase<Derived>& rho, Subsystem keep) {
  if (rho.rows() != 4 || rho.cols() != 4) throw DimensionError("partial_trace: expected a 4x4 operator");
  Operator<RealOf<Derived>> out = Operator<RealOf<Derived>>::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        if (keep == Subsystem::Probe)
          out(i, j) += rho(2 * i + k, 2 * j + k);
        else
          out(i, j) += rho(2 * k + i, 2 * k + j);
      }
  return out;
}

/// A validated density matrix: Hermitian, unit trace, positive (within
/// round-off), dimension 2 or 4. Immutable once built.
template <typename Scalar = double>
class DensityMatrix {
 public:
  using OperatorType = Operator<Scalar>;

  explicit DensityMatrix(const OperatorType& m) : m_(validated(m)) {}

  static DensityMatrix from_ket(const StateVector<Scalar>& psi) {
    check_dim(psi.size());
    const Scalar n = psi.norm();
    if (!(n > 0) || !std::isfinite(n)) throw std::domain_error("state vector has zero or non-finite norm");
    const StateVector<Scalar> u = psi / n;
    return DensityMatrix(OperatorType(u * u.adjoint()));
  }

  /// Divides by the trace and symmetrizes before validating. For states
  /// produced by a positive map that only need round-off cleanup.
  static DensityMatrix normalized(const OperatorType& m) {
    const Scalar tr = m.trace().real();
    if (!(tr > 0)) throw std::domain_error("cannot normalize an operator with non-positive trace");
    OperatorType h = (m + m.adjoint()) / (Scalar(2) * tr);
    return DensityMatrix(h);
  }

  const OperatorType& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  operator const OperatorType&() const { return m_; }

  Scalar min_eigenvalue() const { return hermitian_eigenvalues(m_).minCoeff(); }

  /// <1|rho|1> of the probe marginal.
  Scalar excited_population() const {
    if (dim() == 2) return m_(basis::excited, basis::excited).real();
    return partial_trace_matrix(m_, Subsystem::Probe)(basis::excited, basis::excited).real();
  }

 private:
  static OperatorType validated(const OperatorType& m) {
    if (m.rows() != m.cols()) throw DimensionError("density matrix must be square");
    check_dim(m.rows());
    if (!m.allFinite()) throw std::domain_error("density matrix has non-finite entries");
    OperatorType h = hermitian_part(m);
    const Scalar tr = h.trace().real();
    if (!(std::abs(tr - Scalar(1)) <= tol::trace))
      throw std::domain_error("density matrix trace " + std::to_string(tr) + " differs from 1");
    Eigen::SelfAdjointEigenSolver<OperatorType> solver(h, Eigen::EigenvaluesOnly);
    if (!(solver.eigenvalues().minCoeff() >= -tol::eigenvalue))
      throw std::domain_error("density matrix is not positive");
    return h;
  }

  OperatorType m_;
};

using State = DensityMatrix<double>;

template <typename Scalar>
DensityMatrix<Scalar> partial_trace(const DensityMatrix<Scalar>& rho, Subsystem keep) {
  return DensityMatrix<Scalar>::normalized(partial_trace_matrix(rho.matrix(), keep));
}

/// Thermal state of H = omega0 sigma_+ sigma_- at inverse temperature
/// beta_omega / omega0. Arguments above 700 are clamped (ground state to
/// double precision).
template <typename Scalar = double>
DensityMatrix<Scalar> gibbs_state(Scalar beta_omega) {
  if (std::isnan(beta_omega) || beta_omega < 0)
    throw std::invalid_argument("gibbs_state: beta*omega0 must be non-negative");
  const Scalar x = std::min(beta_omega, Scalar(700));
  const Scalar excited = Scalar(1) / (std::exp(x) + Scalar(1));
  Operator<Scalar> m = Operator<Scalar>::Zero(2, 2);
  m(basis::excited, basis::excited) = excited;
  m(basis::ground, basis::ground) = Scalar(1) - excited;
  return DensityMatrix<Scalar>(m);
}

template <typename Scalar = double>
DensityMatrix<Scalar> ground_state() {
  Operator<Scalar> m = Operator<Scalar>::Zero(2, 2);
  m(basis::ground, basis::ground) = 1;
  return DensityMatrix<Scalar>(m);
}

template <typename Scalar = double>
DensityMatrix<Scalar> excited_state() {
  Operator<Scalar> m = Operator<Scalar>::Zero(2, 2);
  m(basis::excited, basis::excited) = 1;
  return DensityMatrix<Scalar>(m);
}

/// (|11> + |00>)/sqrt(2) on probe x memory.
template <typename Scalar = double>
DensityMatrix<Scalar> phi_plus() {
  StateVector<Scalar> psi = StateVector<Scalar>::Zero(4);
  psi(2 * basis::excited + basis::excited) = 1;
  psi(2 * basis::ground + basis::ground) = 1;
  return DensityMatrix<Scalar>::from_ket(psi);
}

template <typename Scalar = double>
DensityMatrix<Scalar> maximally_mixed(Eigen::Index dim) {
  return DensityMatrix<Scalar>(identity<Scalar>(dim) / Scalar(dim));
}

}  // namespace qbt
