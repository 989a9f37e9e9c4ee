#pragma once
// Vectorized Lindblad generator and its spectrum.
//
// Column stacking: vec(A X B) = (B^T (x) A) vec(X), so
//   L = -i (1 (x) H - H^T (x) 1)
//       + sum_k r_k [ conj(O_k) (x) O_k - 1/2 1 (x) O_k^dag O_k - 1/2 (O_k^dag O_k)^T (x) 1 ].

#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qcr/density_matrix.hpp"
#include "qcr/dissipators.hpp"
#include "qcr/hamiltonian.hpp"

namespace qcr {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Superoperator {
 public:
  Superoperator(std::size_t dim, Eigen::MatrixXcd matrix);

  std::size_t dim() const { return dim_; }
  const Eigen::MatrixXcd& matrix() const { return matrix_; }

  // Row-major real/imaginary planes of the matrix for the SIMD mat-vec kernel.
  std::span<const double> real_plane() const { return re_; }
  std::span<const double> imag_plane() const { return im_; }

  // L(rho) for a d x d operator.
  Operator apply(const Operator& rho) const;

  // Largest |entry|; scale for relative checks.
  double norm_max() const;

 private:
  std::size_t dim_;
  Eigen::MatrixXcd matrix_;
  std::vector<double> re_;
  std::vector<double> im_;
};

Eigen::VectorXcd vectorize(const Operator& rho);
Operator unvectorize(const Eigen::VectorXcd& v, std::size_t dim);

// Throws std::invalid_argument on dimension mismatch.
Superoperator assemble_liouvillian(const Operator& hamiltonian,
                                   std::span<const std::pair<double, Operator>> dissipators);
Superoperator assemble_liouvillian(const Operator& hamiltonian,
                                   std::span<const Dissipator> dissipators);

// Drive Hamiltonian plus the thermal dissipators of `state`.
Superoperator build_generator(const Ladder& ladder, const SystemParams& params, QcrState state,
                              const DriveParams& drive);

struct LiouvillianSpectrum {
  std::vector<std::complex<double>> eigenvalues;  // solver order
  std::vector<double> rates;                       // |Re lambda| ascending, zero mode included
  std::size_t zero_mode = 0;                       // index into eigenvalues
  double rate_scale = 0.0;                         // reference rate used for thresholds
  DensityMatrix steady_state;

  // Ascending |Re lambda| with the zero mode removed.
  std::vector<double> nonzero_rates() const;
  double slowest_rate() const;
};

// Eigenvalues only; no zero-mode requirement.
std::vector<std::complex<double>> liouvillian_eigenvalues(const Superoperator& L);

// Full non-Hermitian eigendecomposition. The steady state is the eigenvector of
// the smallest-|lambda| eigenvalue, Hermitized and trace-normalized.
// `reference_rate` sets the zero-mode threshold 1e-6 * reference_rate; when
// absent the spectral radius is used. Throws SolverError when no eigenvalue is
// that small, or when more than one is (non-unique steady state).
LiouvillianSpectrum spectrum(const Superoperator& L,
                             std::optional<double> reference_rate = std::nullopt);

// 1 - p_g of the steady state.
double steady_state_pexc(const Superoperator& L, const Ladder& ladder,
                         std::optional<double> reference_rate = std::nullopt);

}  // namespace qcr
