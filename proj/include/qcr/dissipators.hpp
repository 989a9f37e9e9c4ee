#pragma once
// Collective jump operators for thermal emission, absorption and pure dephasing
// up to the three-excitation subspace. Each rate multiplies one operator that is
// the coherent sum of its single-excitation transitions.

#include <string>
#include <vector>

#include "qcr/operators.hpp"

namespace qcr {

enum class Channel { emission, absorption, dephasing };

struct Dissipator {
  std::string name;  // "emission_eg", "absorption_r", "dephasing_fe", ...
  Channel channel = Channel::emission;
  double rate = 0.0;  // 1/s
  Operator jump;
};

// Operators with no surviving term in the truncation are omitted; zero-rate
// channels are kept. Dephasing operators are projector differences with
// effective rate gamma_phi / 2.
std::vector<Dissipator> build_dissipators(const Ladder& ladder, const SystemParams& params,
                                          QcrState state);

const Dissipator* find_dissipator(const std::vector<Dissipator>& list, const std::string& name);

}  // namespace qcr
