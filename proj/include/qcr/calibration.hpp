#pragma once
// Least-squares fits of time traces, Rabi-vs-voltage maps and temperatures.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcr/dynamics.hpp"

namespace qcr {

struct SignalTrace {
  std::vector<double> times;   // s, strictly increasing
  std::vector<double> values;  // arbitrary units
  std::vector<double> sigma;   // optional per-point noise; empty for unweighted fits

  // Throws std::invalid_argument.
  void validate() const;
  bool weighted() const { return !sigma.empty(); }
};

struct FitParameter {
  double value = 0.0;
  double uncertainty = 0.0;  // one standard error; NaN when not estimable
};

struct FitResult {
  std::map<std::string, FitParameter> parameters;
  double residual_norm = 0.0;
  Eigen::MatrixXd covariance;
  std::vector<std::string> covariance_labels;
  bool converged = false;
  std::vector<std::string> flags;
  std::size_t evaluations = 0;

  double value(const std::string& name) const;
  double uncertainty(const std::string& name) const;
  bool has_flag(std::string_view flag) const;
};

// Omega(V) = slope * V + intercept, angular frequency per volt.
struct RabiVoltageMap {
  double slope = 0.0;
  double intercept = 0.0;
  QcrState qcr_state = QcrState::off;
  double slope_uncertainty = 0.0;
  double intercept_uncertainty = 0.0;

  double omega(double voltage) const { return slope * voltage + intercept; }
  double voltage(double omega) const { return (omega - intercept) / slope; }
};

// p_f(t) of the four-level model from |f0> with only the f0-g1 tone on.
std::vector<double> f0g1_model_trace(std::span<const double> times, const SystemParams& params,
                                     QcrState state, double omega_f0g1, double kappa);

// p_e(t) of the four-level model from |e0> with only the e-f tone on, QCR off.
std::vector<double> ef_model_trace(std::span<const double> times, const SystemParams& params,
                                   double omega_ef);

// a * model + b plus Gaussian noise of standard deviation `noise`.
SignalTrace synthesize_trace(std::span<const double> times, std::span<const double> model,
                             double a, double b, double noise, std::uint64_t seed);

// Parameters a, b, omega_f0g1, kappa. The kappa of `params` for `state` only
// centers the search.
FitResult fit_f0g1_trace(const SignalTrace& trace, const SystemParams& params, QcrState state);

// Parameters a, b, omega_ef.
FitResult fit_ef_trace(const SignalTrace& trace, const SystemParams& params);

// A exp(-t / T_d) + C; parameters A, T_d, C.
FitResult fit_exponential(const SignalTrace& trace);

// Ordinary least squares over (voltage, omega) pairs. Throws
// std::invalid_argument for fewer than two points or a degenerate abscissa and
// std::domain_error for a nonpositive slope.
RabiVoltageMap fit_linear_rabi(std::span<const std::pair<double, double>> points,
                               QcrState state = QcrState::off);

// ladder:   weights exp(-E_{j,n} / kB T) summed over the photon numbers in the ladder
// transmon: weights exp(-E_j / kB T) of the bare levels |j, 0>
enum class BoltzmannModel { ladder, transmon };

std::array<double, kTransmonLevels> boltzmann_populations(const Ladder& ladder, double temperature,
                                                          BoltzmannModel model);

// Parameter T (kelvin) minimizing the squared population distance.
FitResult fit_boltzmann_temperature(const Populations& populations, const Ladder& ladder,
                                    BoltzmannModel model = BoltzmannModel::ladder);

// 1 - exp(-gamma_eg t).
double readout_decay_error(double gamma_eg, double t);

}  // namespace qcr
