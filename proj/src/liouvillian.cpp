#include "qcr/liouvillian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "qcr/dynamics.hpp"

namespace qcr {

Superoperator::Superoperator(std::size_t dim, Eigen::MatrixXcd matrix)
    : dim_(dim), matrix_(std::move(matrix)) {
  const auto n = static_cast<Eigen::Index>(dim * dim);
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw std::invalid_argument("Superoperator: matrix must be d^2 x d^2");
  }
  re_.resize(static_cast<std::size_t>(n * n));
  im_.resize(static_cast<std::size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto k = static_cast<std::size_t>(i * n + j);
      re_[k] = matrix_(i, j).real();
      im_[k] = matrix_(i, j).imag();
    }
  }
}

Operator Superoperator::apply(const Operator& rho) const {
  return unvectorize(matrix_ * vectorize(rho), dim_);
}

double Superoperator::norm_max() const {
  return matrix_.size() == 0 ? 0.0 : matrix_.cwiseAbs().maxCoeff();
}

Eigen::VectorXcd vectorize(const Operator& rho) {
  return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

Operator unvectorize(const Eigen::VectorXcd& v, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  if (v.size() != d * d) throw std::invalid_argument("unvectorize: length is not d^2");
  return Eigen::Map<const Operator>(v.data(), d, d);
}

namespace {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace

Superoperator assemble_liouvillian(const Operator& hamiltonian,
                                   std::span<const std::pair<double, Operator>> dissipators) {
  if (hamiltonian.rows() != hamiltonian.cols()) {
    throw std::invalid_argument("assemble_liouvillian: Hamiltonian is not square");
  }
  const Eigen::Index d = hamiltonian.rows();
  const Operator id = Operator::Identity(d, d);
  const Complex minus_i(0.0, -1.0);
  Eigen::MatrixXcd L = minus_i * (kron(id, hamiltonian) - kron(hamiltonian.transpose(), id));
  for (const auto& [rate, jump] : dissipators) {
    if (jump.rows() != d || jump.cols() != d) {
      throw std::invalid_argument("assemble_liouvillian: jump operator dimension mismatch");
    }
    if (rate == 0.0) continue;
    const Operator n = jump.adjoint() * jump;
    L += rate * (kron(jump.conjugate(), jump) - 0.5 * kron(id, n) - 0.5 * kron(n.transpose(), id));
  }
  return Superoperator(static_cast<std::size_t>(d), std::move(L));
}

Superoperator assemble_liouvillian(const Operator& hamiltonian,
                                   std::span<const Dissipator> dissipators) {
  std::vector<std::pair<double, Operator>> pairs;
  pairs.reserve(dissipators.size());
  for (const auto& dis : dissipators) pairs.emplace_back(dis.rate, dis.jump);
  return assemble_liouvillian(hamiltonian, std::span<const std::pair<double, Operator>>(pairs));
}

Superoperator build_generator(const Ladder& ladder, const SystemParams& params, QcrState state,
                              const DriveParams& drive) {
  const auto dissipators = build_dissipators(ladder, params, state);
  return assemble_liouvillian(build_drive_hamiltonian(ladder, drive),
                              std::span<const Dissipator>(dissipators));
}

std::vector<double> LiouvillianSpectrum::nonzero_rates() const {
  std::vector<double> out;
  out.reserve(eigenvalues.size());
  for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
    if (k != zero_mode) out.push_back(std::abs(eigenvalues[k].real()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double LiouvillianSpectrum::slowest_rate() const {
  const auto rest = nonzero_rates();
  if (rest.empty()) throw SolverError("spectrum has no nonzero mode");
  return rest.front();
}

std::vector<std::complex<double>> liouvillian_eigenvalues(const Superoperator& L) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(L.matrix(), false);
  if (solver.info() != Eigen::Success) throw SolverError("eigendecomposition did not converge");
  const Eigen::VectorXcd& values = solver.eigenvalues();
  return {values.data(), values.data() + values.size()};
}

LiouvillianSpectrum spectrum(const Superoperator& L, std::optional<double> reference_rate) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(L.matrix(), true);
  if (solver.info() != Eigen::Success) throw SolverError("eigendecomposition did not converge");

  const Eigen::VectorXcd& values = solver.eigenvalues();
  const auto count = static_cast<std::size_t>(values.size());
  double radius = 0.0;
  for (std::size_t k = 0; k < count; ++k) radius = std::max(radius, std::abs(values(k)));
  const double scale = reference_rate.value_or(radius);
  const double threshold = 1e-6 * scale;

  std::vector<std::size_t> near_zero;
  std::size_t smallest = 0;
  for (std::size_t k = 0; k < count; ++k) {
    if (std::abs(values(k)) <= threshold) near_zero.push_back(k);
    if (std::abs(values(k)) < std::abs(values(smallest))) smallest = k;
  }
  if (near_zero.empty()) {
    throw SolverError("no zero eigenvalue: smallest |lambda| = " +
                      std::to_string(std::abs(values(smallest))) + " exceeds 1e-6 * " +
                      std::to_string(scale));
  }
  if (near_zero.size() > 1) {
    throw SolverError("steady state is not unique: " + std::to_string(near_zero.size()) +
                      " eigenvalues below 1e-6 * reference rate");
  }

  Operator rho = unvectorize(solver.eigenvectors().col(static_cast<Eigen::Index>(smallest)), L.dim());
  const Complex tr = rho.trace();
  if (std::abs(tr) == 0.0) throw SolverError("null eigenvector has zero trace");
  rho /= tr;
  rho = 0.5 * (rho + rho.adjoint());

  LiouvillianSpectrum out{{}, {}, smallest, scale, DensityMatrix(rho, Validation::none)};
  out.eigenvalues.assign(values.data(), values.data() + values.size());
  out.rates.reserve(count);
  for (const auto& v : out.eigenvalues) out.rates.push_back(std::abs(v.real()));
  std::sort(out.rates.begin(), out.rates.end());
  return out;
}

double steady_state_pexc(const Superoperator& L, const Ladder& ladder,
                         std::optional<double> reference_rate) {
  const LiouvillianSpectrum s = spectrum(L, reference_rate);
  return populations(s.steady_state, ladder).pexc();
}

}  // namespace qcr
