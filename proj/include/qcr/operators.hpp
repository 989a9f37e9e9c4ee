#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcr/ladder.hpp"

namespace qcr {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;

// One |bra><ket| term of an operator written in level labels.
struct Transition {
  LevelKey to;
  LevelKey from;
  double amplitude = 1.0;
};

// Sums amplitude * |to><from| over the terms whose levels both exist in the
// ladder; `kept` (if given) receives how many terms survived.
Operator assemble_operator(const Ladder& ladder, std::span<const Transition> terms,
                           std::size_t* kept = nullptr);

bool is_hermitian(const Operator& op, double relative_tolerance = 1e-12);

// Largest-magnitude entry, used as a scale for relative tolerances.
double max_abs(const Operator& op);

}  // namespace qcr
