#pragma once

#include <span>
#include <vector>

#include "qcr/operators.hpp"

namespace qcr {

enum class Validation { strict, none };

// Hermitian, positive-semidefinite, unit-trace state on the ladder basis.
class DensityMatrix {
 public:
  static constexpr double kHermitianTolerance = 1e-12;
  static constexpr double kTraceTolerance = 1e-10;
  static constexpr double kEigenvalueFloor = -1e-9;

  // Throws std::invalid_argument when strict validation fails.
  explicit DensityMatrix(Operator matrix, Validation validation = Validation::strict);

  static DensityMatrix pure(std::size_t dim, std::size_t index);
  static DensityMatrix maximally_mixed(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Operator& matrix() const { return matrix_; }
  Complex operator()(std::size_t i, std::size_t j) const {
    return matrix_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  double trace() const;
  double min_eigenvalue() const;
  Eigen::VectorXd eigenvalues() const;
  double hermiticity_error() const;

 private:
  Operator matrix_;
};

// (rho + rho^dagger) / 2, eigenvalues in [floor, 0) clipped to zero.
Operator hermitize_and_clip(const Operator& rho, double dust = 1e-12);

// Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2.
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

// exp(-H0 / kB T) / Z, diagonal in the dressed basis. T must be > 0.
DensityMatrix thermal_state(const Ladder& ladder, double temperature);

enum class Pulse { pi_ge, pi_ef };

// Unitary swap sigma_x^{jk} (x) 1 on every (j,n) <-> (k,n) pair in the
// truncation; unpaired boundary states are left alone. Accepts [], [pi_ge]
// and [pi_ge, pi_ef]; anything else throws std::invalid_argument.
DensityMatrix prepare_initial_state(const DensityMatrix& thermal, const Ladder& ladder,
                                    std::span<const Pulse> pulses);

Operator pulse_unitary(const Ladder& ladder, Pulse pulse);

}  // namespace qcr
