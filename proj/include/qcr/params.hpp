#pragma once
// System parameters for the transmon--auxiliary-resonator model.
//
// All frequencies are angular (rad/s) and all rates are in 1/s. Quantities the
// refrigerator (QCR) changes are stored once per switch state.

#include <numbers>
#include <stdexcept>

namespace qcr {

inline constexpr double kHbar = 1.054571817e-34;     // J s
inline constexpr double kBoltzmann = 1.380649e-23;   // J / K
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double hz_to_angular(double hz) { return kTwoPi * hz; }
inline constexpr double angular_to_hz(double omega) { return omega / kTwoPi; }

enum class QcrState { off, on };

template <typename T>
struct PerQcr {
  T off{};
  T on{};

  const T& operator[](QcrState s) const { return s == QcrState::on ? on : off; }
  T& operator[](QcrState s) { return s == QcrState::on ? on : off; }
};

// How the tabulated decay rates enter the thermal emission/absorption pair.
//
// emission_fixed:    down = gamma,          up = gamma * n / (n + 1)
// occupation_scaled: down = gamma (n + 1),  up = gamma * n
//
// Both satisfy detailed balance up/down = n / (n + 1).
enum class RateConvention { emission_fixed, occupation_scaled };

struct TransitionFrequencies {
  double ge = 0.0;
  double ef = 0.0;
  double fh = 0.0;
  double resonator = 0.0;
  double f0g1 = 0.0;  // measured; not used to build level energies
};

struct DecayRates {
  double eg = 0.0;
  double fe = 0.0;
  double hf = 0.0;
  double kappa = 0.0;
};

struct DephasingRates {
  double eg = 0.0;
  double fe = 0.0;
  double hf = 0.0;
};

struct Occupations {
  double eg = 0.0;
  double fe = 0.0;
  double hf = 0.0;
  double resonator = 0.0;
};

// Recorded for completeness; no solver path reads these.
struct DeviceMetadata {
  double dynes_parameter = 0.0;
  double tunneling_resistance_ohm = 0.0;
  double readout_frequency = 0.0;  // rad/s
  double gap_energy_ev = 0.0;
};

struct SystemParams {
  PerQcr<TransitionFrequencies> frequencies;
  PerQcr<DecayRates> decay;
  PerQcr<DephasingRates> dephasing;
  Occupations occupations;
  double temperature = 0.110;  // K
  RateConvention convention = RateConvention::emission_fixed;
  DeviceMetadata metadata;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  // Device values: decay times 6.6(4.9) us etc., occupations 0.20/0.23/0.28/0.15,
  // gamma_fe = 2 gamma_eg, gamma_hf = 3 gamma_eg and gamma_phi = 4 gamma.
  static SystemParams table1();
};

// Copy with every thermal occupation set to zero.
SystemParams with_cold_bath(SystemParams params);

// Bose-Einstein occupation 1 / (exp(hbar omega / kB T) - 1).
// Throws std::domain_error for nonpositive omega or temperature.
double bose_occupation(double omega, double temperature);

Occupations thermal_occupations(const TransitionFrequencies& freqs, double temperature);

struct RatePair {
  double down = 0.0;
  double up = 0.0;
};

RatePair thermal_rates(double gamma, double occupation, RateConvention convention);

}  // namespace qcr
