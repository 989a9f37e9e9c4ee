#include "qcr/density_matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace qcr {

DensityMatrix::DensityMatrix(Operator matrix, Validation validation) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
  }
  if (validation == Validation::none) return;
  if (hermiticity_error() >= kHermitianTolerance) {
    throw std::invalid_argument("DensityMatrix: not Hermitian (error " +
                                std::to_string(hermiticity_error()) + ")");
  }
  if (std::abs(trace() - 1.0) > kTraceTolerance) {
    throw std::invalid_argument("DensityMatrix: trace " + std::to_string(trace()) + " != 1");
  }
  if (min_eigenvalue() <= kEigenvalueFloor) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                std::to_string(min_eigenvalue()));
  }
}

DensityMatrix DensityMatrix::pure(std::size_t dim, std::size_t index) {
  if (index >= dim) throw std::out_of_range("DensityMatrix::pure: index out of range");
  Operator m = Operator::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
  return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return DensityMatrix(Operator::Identity(n, n) / static_cast<double>(dim));
}

double DensityMatrix::trace() const { return matrix_.trace().real(); }

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  const Operator herm = 0.5 * (matrix_ + matrix_.adjoint());
  return Eigen::SelfAdjointEigenSolver<Operator>(herm, Eigen::EigenvaluesOnly).eigenvalues();
}

double DensityMatrix::min_eigenvalue() const { return eigenvalues().minCoeff(); }

double DensityMatrix::hermiticity_error() const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

Operator hermitize_and_clip(const Operator& rho, double dust) {
  Operator herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> eig(herm);
  Eigen::VectorXd values = eig.eigenvalues();
  bool clipped = false;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values(k) < 0.0 && values(k) >= -dust) {
      values(k) = 0.0;
      clipped = true;
    }
  }
  if (!clipped) return herm;
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().adjoint();
}

namespace {

Operator psd_sqrt(const Operator& m) {
  Eigen::SelfAdjointEigenSolver<Operator> eig(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  const Operator root_a = psd_sqrt(a.matrix());
  const Operator inner = root_a * b.matrix() * root_a;
  const double tr = psd_sqrt(inner).trace().real();
  return tr * tr;
}

DensityMatrix thermal_state(const Ladder& ladder, double temperature) {
  if (!(temperature > 0.0)) throw std::domain_error("thermal_state: temperature must be > 0");
  const auto n = static_cast<Eigen::Index>(ladder.dim());
  Eigen::VectorXd weights(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Ground energy is zero, so weights lie in (0, 1] and cannot overflow.
    weights(i) = std::exp(-kHbar * ladder.energy(static_cast<std::size_t>(i)) /
                          (kBoltzmann * temperature));
  }
  weights /= weights.sum();
  Operator rho = Operator::Zero(n, n);
  rho.diagonal() = weights.cast<Complex>();
  return DensityMatrix(std::move(rho));
}

Operator pulse_unitary(const Ladder& ladder, Pulse pulse) {
  const TransmonLevel lower = pulse == Pulse::pi_ge ? TransmonLevel::g : TransmonLevel::e;
  const TransmonLevel upper = pulse == Pulse::pi_ge ? TransmonLevel::e : TransmonLevel::f;
  const auto n = static_cast<Eigen::Index>(ladder.dim());
  Operator u = Operator::Identity(n, n);
  for (const auto& level : ladder.levels()) {
    if (level.key.transmon != lower) continue;
    const auto partner = ladder.index_of(upper, level.key.photons);
    if (!partner) continue;
    const auto i = static_cast<Eigen::Index>(level.index);
    const auto j = static_cast<Eigen::Index>(*partner);
    u(i, i) = 0.0;
    u(j, j) = 0.0;
    u(i, j) = 1.0;
    u(j, i) = 1.0;
  }
  return u;
}

DensityMatrix prepare_initial_state(const DensityMatrix& thermal, const Ladder& ladder,
                                    std::span<const Pulse> pulses) {
  if (thermal.dim() != ladder.dim()) {
    throw std::invalid_argument("prepare_initial_state: state and ladder dimensions differ");
  }
  const bool allowed = pulses.empty() || (pulses.size() == 1 && pulses[0] == Pulse::pi_ge) ||
                       (pulses.size() == 2 && pulses[0] == Pulse::pi_ge && pulses[1] == Pulse::pi_ef);
  if (!allowed) {
    throw std::invalid_argument(
        "prepare_initial_state: pulse sequence must be [], [pi_ge] or [pi_ge, pi_ef]");
  }
  Operator rho = thermal.matrix();
  for (const Pulse p : pulses) {
    const Operator u = pulse_unitary(ladder, p);
    rho = u * rho * u.adjoint();
  }
  return DensityMatrix(std::move(rho));
}

}  // namespace qcr
