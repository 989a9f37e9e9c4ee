#include "qcr/params.hpp"

#include <cmath>
#include <string>

namespace qcr {

namespace {

void require_nonnegative(double value, const std::string& field) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(field + " must be finite and >= 0 (got " + std::to_string(value) +
                                ")");
  }
}

void require_positive(double value, const std::string& field) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(field + " must be finite and > 0 (got " + std::to_string(value) +
                                ")");
  }
}

}  // namespace

void SystemParams::validate() const {
  for (const QcrState s : {QcrState::off, QcrState::on}) {
    const std::string tag = s == QcrState::on ? "on" : "off";
    const auto& f = frequencies[s];
    require_nonnegative(f.ge, "frequencies." + tag + ".ge");
    require_nonnegative(f.ef, "frequencies." + tag + ".ef");
    require_nonnegative(f.fh, "frequencies." + tag + ".fh");
    require_nonnegative(f.resonator, "frequencies." + tag + ".resonator");
    require_nonnegative(f.f0g1, "frequencies." + tag + ".f0g1");
    const auto& d = decay[s];
    require_nonnegative(d.eg, "decay." + tag + ".eg");
    require_nonnegative(d.fe, "decay." + tag + ".fe");
    require_nonnegative(d.hf, "decay." + tag + ".hf");
    require_nonnegative(d.kappa, "decay." + tag + ".kappa");
    const auto& p = dephasing[s];
    require_nonnegative(p.eg, "dephasing." + tag + ".eg");
    require_nonnegative(p.fe, "dephasing." + tag + ".fe");
    require_nonnegative(p.hf, "dephasing." + tag + ".hf");
  }
  require_nonnegative(occupations.eg, "occupations.eg");
  require_nonnegative(occupations.fe, "occupations.fe");
  require_nonnegative(occupations.hf, "occupations.hf");
  require_nonnegative(occupations.resonator, "occupations.resonator");
  require_positive(temperature, "temperature");
}

SystemParams SystemParams::table1() {
  SystemParams p;
  p.frequencies.off = {hz_to_angular(4.089e9), hz_to_angular(3.816e9), hz_to_angular(3.486e9),
                       hz_to_angular(4.671e9), hz_to_angular(3.230e9)};
  p.frequencies.on = p.frequencies.off;
  p.frequencies.on.resonator = hz_to_angular(4.670e9);
  p.frequencies.on.f0g1 = hz_to_angular(3.231e9);

  auto transmon = [](double t_eg, double t_kappa) {
    const double eg = 1.0 / t_eg;
    return DecayRates{eg, 2.0 * eg, 3.0 * eg, 1.0 / t_kappa};
  };
  p.decay.off = transmon(6.6e-6, 221e-9);
  p.decay.on = transmon(4.9e-6, 120e-9);
  for (const QcrState s : {QcrState::off, QcrState::on}) {
    const auto& d = p.decay[s];
    p.dephasing[s] = {4.0 * d.eg, 4.0 * d.fe, 4.0 * d.hf};
  }

  p.occupations = {0.20, 0.23, 0.28, 0.15};
  p.temperature = 0.110;
  p.convention = RateConvention::emission_fixed;
  p.metadata = {2.3e-3, 13.8e3, hz_to_angular(7.437e9), 0.215e-3};
  return p;
}

SystemParams with_cold_bath(SystemParams params) {
  params.occupations = {};
  return params;
}

double bose_occupation(double omega, double temperature) {
  if (!(omega > 0.0)) throw std::domain_error("bose_occupation: omega must be > 0");
  if (!(temperature > 0.0)) throw std::domain_error("bose_occupation: temperature must be > 0");
  const double x = kHbar * omega / (kBoltzmann * temperature);
  return 1.0 / std::expm1(x);
}

Occupations thermal_occupations(const TransitionFrequencies& freqs, double temperature) {
  return {bose_occupation(freqs.ge, temperature), bose_occupation(freqs.ef, temperature),
          bose_occupation(freqs.fh, temperature), bose_occupation(freqs.resonator, temperature)};
}

RatePair thermal_rates(double gamma, double occupation, RateConvention convention) {
  if (convention == RateConvention::occupation_scaled) {
    return {gamma * (occupation + 1.0), gamma * occupation};
  }
  return {gamma, gamma * occupation / (occupation + 1.0)};
}

}  // namespace qcr
