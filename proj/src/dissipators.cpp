#include "qcr/dissipators.hpp"

#include <cmath>

namespace qcr {

using enum TransmonLevel;

namespace {

std::vector<Transition> conjugate(const std::vector<Transition>& terms) {
  std::vector<Transition> out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back({t.from, t.to, t.amplitude});
  return out;
}

std::vector<Transition> projector_difference(const std::vector<LevelKey>& plus,
                                             const std::vector<LevelKey>& minus) {
  std::vector<Transition> out;
  for (const auto& k : plus) out.push_back({k, k, 1.0});
  for (const auto& k : minus) out.push_back({k, k, -1.0});
  return out;
}

}  // namespace

std::vector<Dissipator> build_dissipators(const Ladder& ladder, const SystemParams& params,
                                          QcrState state) {
  params.validate();
  const DecayRates& gamma = params.decay[state];
  const DephasingRates& phi = params.dephasing[state];
  const Occupations& n = params.occupations;
  const double r2 = std::sqrt(2.0);
  const double r3 = std::sqrt(3.0);

  struct Exchange {
    const char* tag;
    double gamma;
    double occupation;
    std::vector<Transition> lowering;
  };
  const Exchange ways[] = {
      {"eg", gamma.eg, n.eg, {{{g, 0}, {e, 0}}, {{g, 1}, {e, 1}}, {{g, 2}, {e, 2}}}},
      {"fe", gamma.fe, n.fe, {{{e, 0}, {f, 0}}, {{e, 1}, {f, 1}}}},
      {"hf", gamma.hf, n.hf, {{{f, 0}, {h, 0}}}},
      {"r",
       gamma.kappa,
       n.resonator,
       {{{g, 0}, {g, 1}},
        {{e, 0}, {e, 1}},
        {{f, 0}, {f, 1}},
        {{g, 1}, {g, 2}, r2},
        {{e, 1}, {e, 2}, r2},
        {{g, 2}, {g, 3}, r3}}},
  };

  std::vector<Dissipator> out;
  auto push = [&](std::string name, Channel channel, double rate,
                  const std::vector<Transition>& terms) {
    std::size_t kept = 0;
    Operator op = assemble_operator(ladder, terms, &kept);
    if (kept == 0) return;
    out.push_back({std::move(name), channel, rate, std::move(op)});
  };

  for (const auto& w : ways) {
    const RatePair rates = thermal_rates(w.gamma, w.occupation, params.convention);
    push(std::string("emission_") + w.tag, Channel::emission, rates.down, w.lowering);
  }
  for (const auto& w : ways) {
    const RatePair rates = thermal_rates(w.gamma, w.occupation, params.convention);
    push(std::string("absorption_") + w.tag, Channel::absorption, rates.up, conjugate(w.lowering));
  }

  push("dephasing_eg", Channel::dephasing, 0.5 * phi.eg,
       projector_difference({{e, 0}, {e, 1}, {e, 2}}, {{g, 0}, {g, 1}, {g, 2}, {g, 3}}));
  push("dephasing_fe", Channel::dephasing, 0.5 * phi.fe,
       projector_difference({{f, 0}, {f, 1}}, {{e, 0}, {e, 1}, {e, 2}}));
  push("dephasing_hf", Channel::dephasing, 0.5 * phi.hf,
       projector_difference({{h, 0}}, {{f, 0}, {f, 1}}));
  return out;
}

const Dissipator* find_dissipator(const std::vector<Dissipator>& list, const std::string& name) {
  for (const auto& d : list) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

}  // namespace qcr
