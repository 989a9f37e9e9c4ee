#include "qcr/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>

namespace qcr {

using enum TransmonLevel;

Operator assemble_operator(const Ladder& ladder, std::span<const Transition> terms,
                           std::size_t* kept) {
  Operator op = Operator::Zero(static_cast<Eigen::Index>(ladder.dim()),
                               static_cast<Eigen::Index>(ladder.dim()));
  std::size_t count = 0;
  for (const Transition& t : terms) {
    const auto row = ladder.index_of(t.to);
    const auto col = ladder.index_of(t.from);
    if (!row || !col) continue;
    op(static_cast<Eigen::Index>(*row), static_cast<Eigen::Index>(*col)) += t.amplitude;
    ++count;
  }
  if (kept != nullptr) *kept = count;
  return op;
}

bool is_hermitian(const Operator& op, double relative_tolerance) {
  const double scale = std::max(max_abs(op), 1.0e-300);
  return (op - op.adjoint()).cwiseAbs().maxCoeff() <= relative_tolerance * scale ||
         op.size() == 0;
}

double max_abs(const Operator& op) { return op.size() == 0 ? 0.0 : op.cwiseAbs().maxCoeff(); }

void DriveParams::validate() const {
  if (!(omega_ef >= 0.0) || !(omega_f0g1 >= 0.0)) {
    throw std::invalid_argument("DriveParams: Rabi frequencies must be >= 0");
  }
  for (const auto& [key, value] : deltas) {
    if (!std::isfinite(value)) {
      throw std::invalid_argument("DriveParams: non-finite delta for " + key.name());
    }
  }
}

Operator build_drive_hamiltonian(const Ladder& ladder, const DriveParams& drive) {
  drive.validate();
  const Transition ef_terms[] = {{{e, 0}, {f, 0}, 1.0}, {{e, 1}, {f, 1}, 1.0}};
  const Transition f0g1_terms[] = {{{g, 1}, {f, 0}, 1.0}, {{g, 2}, {f, 1}, std::sqrt(2.0)}};

  const Operator ef = assemble_operator(ladder, ef_terms);
  const Operator f0g1 = assemble_operator(ladder, f0g1_terms);
  const Complex minus_i(0.0, -1.0);
  Operator h = minus_i * (0.5 * drive.omega_ef) * ef + minus_i * (0.5 * drive.omega_f0g1) * f0g1;
  h += h.adjoint().eval();

  for (const auto& [key, delta] : drive.deltas) {
    if (auto idx = ladder.index_of(key)) {
      const auto i = static_cast<Eigen::Index>(*idx);
      h(i, i) += delta;
    }
  }
  return h;
}

}  // namespace qcr
