#pragma once
// Rotating-frame two-tone drive Hamiltonian H'/hbar = H/hbar + H_delta/hbar.

#include <map>

#include "qcr/operators.hpp"

namespace qcr {

struct DriveParams {
  double omega_ef = 0.0;    // Rabi angular frequency of the e-f tone (rad/s)
  double omega_f0g1 = 0.0;  // Rabi angular frequency of the f0-g1 tone (rad/s)
  std::map<LevelKey, double> deltas;  // level shifts (rad/s); absent levels are zero

  void validate() const;
};

// -i (Omega_ef / 2)(|e0><f0| + |e1><f1|) - i (Omega_f0g1 / 2)(|g1><f0| + sqrt2 |g2><f1|)
// plus the Hermitian conjugate, plus diag(delta). Terms touching levels outside
// the truncation are dropped.
Operator build_drive_hamiltonian(const Ladder& ladder, const DriveParams& drive);

}  // namespace qcr
