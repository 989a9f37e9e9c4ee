#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "qcr/calibration.hpp"

using namespace qcr;
using enum TransmonLevel;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> exponential(std::span<const double> times, double a, double td, double c) {
  std::vector<double> out;
  for (const double t : times) out.push_back(a * std::exp(-t / td) + c);
  return out;
}

SignalTrace plain(std::vector<double> times, std::vector<double> values) {
  return SignalTrace{std::move(times), std::move(values), {}};
}

}  // namespace

TEST_CASE("trace validation") {
  CHECK_THROWS_AS(plain({0.0, 1.0}, {1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(plain({0.0, 0.0}, {1.0, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(plain({0.0, 1.0}, {1.0, std::nan("")}).validate(), std::invalid_argument);
  SignalTrace t = plain({0.0, 1.0}, {1.0, 2.0});
  t.sigma = {0.1};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("noiseless f0g1 trace is recovered") {
  const SystemParams p = SystemParams::table1();
  const auto times = uniform_grid(1.5e-6, 151);
  const double omega = hz_to_angular(1.73e6);
  const double kappa = 1.0 / 120e-9;
  const auto model = f0g1_model_trace(times, p, QcrState::on, omega, kappa);
  const SignalTrace trace = synthesize_trace(times, model, 0.8, 0.1, 0.0, 1);
  const FitResult fit = fit_f0g1_trace(trace, p, QcrState::on);
  CHECK(fit.converged);
  CHECK_THAT(fit.value("omega_f0g1"), WithinRel(omega, 1e-3));
  CHECK_THAT(fit.value("kappa"), WithinRel(kappa, 1e-3));
  CHECK_THAT(fit.value("a"), WithinRel(0.8, 1e-3));
  CHECK_THAT(fit.value("b"), WithinAbs(0.1, 1e-3));
  // strong-drive requirement for the cooling configuration
  CHECK(fit.value("omega_f0g1") >= 2.0 * std::sqrt(2.0 / 27.0) * p.decay.on.kappa);
}

TEST_CASE("noisy f0g1 trace in the off state") {
  const SystemParams p = SystemParams::table1();
  const auto times = uniform_grid(1.5e-6, 301);
  const double omega = hz_to_angular(1.16e6);
  const double kappa = 1.0 / 221e-9;
  const auto model = f0g1_model_trace(times, p, QcrState::off, omega, kappa);
  const FitResult fit =
      fit_f0g1_trace(synthesize_trace(times, model, 1.0, 0.0, 0.01, 5), p, QcrState::off);
  CHECK_THAT(fit.value("omega_f0g1"), WithinRel(omega, 0.02));
  CHECK_THAT(fit.value("kappa"), WithinRel(kappa, 0.05));
  // standard errors are on the scale of the actual error
  for (const auto& [name, truth] : {std::pair{"omega_f0g1", omega}, {"kappa", kappa}}) {
    const double sigma = fit.uncertainty(name);
    CHECK(sigma > 1e-4 * truth);
    CHECK(std::abs(fit.value(name) - truth) <= 4.0 * sigma);
  }
}

TEST_CASE("constant f0g1 trace is flagged") {
  const SystemParams p = SystemParams::table1();
  const auto times = uniform_grid(1.5e-6, 101);
  const FitResult fit = fit_f0g1_trace(plain(times, std::vector<double>(times.size(), 0.3)), p,
                                       QcrState::on);
  CHECK(fit.has_flag("constant_trace"));
  CHECK(fit.has_flag("a_unidentifiable"));
  CHECK_THAT(fit.value("b"), WithinAbs(0.3, 1e-12));
}

TEST_CASE("e-f trace round trips") {
  const SystemParams p = SystemParams::table1();
  const auto times = uniform_grid(1.5e-6, 151);
  for (const double mhz : {1.43, 2.29}) {
    const double omega = hz_to_angular(mhz * 1e6);
    const auto model = ef_model_trace(times, p, omega);
    const FitResult exact = fit_ef_trace(synthesize_trace(times, model, 1.0, 0.0, 0.0, 1), p);
    CHECK_THAT(exact.value("omega_ef"), WithinRel(omega, 1e-3));
    const FitResult noisy = fit_ef_trace(synthesize_trace(times, model, 1.0, 0.0, 0.01, 2), p);
    CHECK_THAT(noisy.value("omega_ef"), WithinRel(omega, 0.02));
  }
}

TEST_CASE("undriven e-f trace leaves the Rabi frequency unidentifiable") {
  const SystemParams p = SystemParams::table1();
  const auto times = uniform_grid(1.5e-6, 151);
  const auto model = ef_model_trace(times, p, 0.0);
  const FitResult fit = fit_ef_trace(synthesize_trace(times, model, 1.0, 0.0, 0.0, 1), p);
  CHECK(fit.has_flag("omega_ef_unidentifiable"));
}

TEST_CASE("exponential fits") {
  const auto times = uniform_grid(40e-6, 201);
  const FitResult exact = fit_exponential(plain(times, exponential(times, 0.8, 6.6e-6, 0.05)));
  CHECK_THAT(exact.value("T_d"), WithinRel(6.6e-6, 1e-3));
  CHECK_THAT(exact.value("A"), WithinRel(0.8, 1e-3));
  CHECK_THAT(exact.value("C"), WithinAbs(0.05, 1e-4));

  const auto noisy_fit = [&](double td, std::uint64_t seed) {
    const auto model = exponential(times, 1.0, td, 0.0);
    return fit_exponential(synthesize_trace(times, model, 1.0, 0.0, 0.01, seed)).value("T_d");
  };
  CHECK_THAT(noisy_fit(6.6e-6, 3), WithinRel(6.6e-6, 0.02));
  CHECK_THAT(noisy_fit(10.4e-6, 4) / noisy_fit(5.4e-6, 5), WithinAbs(1.93, 0.05));
}

TEST_CASE("exponential fit is invariant under affine rescaling") {
  const auto times = uniform_grid(30e-6, 151);
  const auto model = exponential(times, 1.0, 4.9e-6, 0.0);
  const SignalTrace base = synthesize_trace(times, model, 1.0, 0.0, 0.01, 9);
  SignalTrace moved = base;
  for (auto& v : moved.values) v = 3.5 * v - 0.7;
  const double t0 = fit_exponential(base).value("T_d");
  const double t1 = fit_exponential(moved).value("T_d");
  CHECK_THAT(t1, WithinRel(t0, 1e-10));
}

TEST_CASE("degenerate exponential inputs") {
  const auto times = uniform_grid(10e-6, 21);
  const FitResult flat = fit_exponential(plain(times, std::vector<double>(times.size(), 2.0)));
  CHECK(flat.has_flag("T_d_unidentifiable"));
  CHECK_THAT(flat.value("A"), WithinAbs(0.0, 1e-12));
  const FitResult growing = fit_exponential(plain(times, exponential(times, -1.0, -5e-6, 0.0)));
  CHECK(growing.value("T_d") > 0.0);
  CHECK((growing.has_flag("negative_decay_time_rejected") || growing.has_flag("T_d_at_search_bound")));
  CHECK_THROWS_AS(fit_exponential(plain({0.0, 1.0, 2.0}, {1.0, 0.5, 0.2})), std::invalid_argument);
}

TEST_CASE("linear Rabi maps") {
  const std::pair<double, double> two[] = {{1.0, 3.0}, {3.0, 7.0}};
  const RabiVoltageMap exact = fit_linear_rabi(two);
  CHECK_THAT(exact.slope, WithinAbs(2.0, 1e-14));
  CHECK_THAT(exact.intercept, WithinAbs(1.0, 1e-14));
  CHECK_THAT(exact.voltage(exact.omega(2.5)), WithinAbs(2.5, 1e-14));

  const std::pair<double, double> bd[] = {{169.1e-6, hz_to_angular(1.16e6)},
                                          {253.6e-6, hz_to_angular(1.73e6)}};
  const RabiVoltageMap m = fit_linear_rabi(bd, QcrState::on);
  CHECK_THAT(angular_to_hz(m.slope) * 1e-6 / 1e3, WithinAbs(6.7, 0.1));  // kHz per uV
  CHECK(m.qcr_state == QcrState::on);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, hz_to_angular(5e3));
  std::vector<std::pair<double, double>> line;
  const double slope = hz_to_angular(6.7e3) / 1e-6;
  for (int k = 0; k < 25; ++k) {
    const double v = 100e-6 + 10e-6 * k;
    line.emplace_back(v, slope * v + hz_to_angular(2e3) + noise(rng));
  }
  const RabiVoltageMap fit = fit_linear_rabi(line);
  CHECK(std::abs(fit.slope - slope) <= 3.0 * fit.slope_uncertainty);
  CHECK(fit.slope_uncertainty > 0.0);

  const std::pair<double, double> one[] = {{1.0, 1.0}};
  CHECK_THROWS_AS(fit_linear_rabi(one), std::invalid_argument);
  const std::pair<double, double> same_v[] = {{1.0, 1.0}, {1.0, 2.0}};
  CHECK_THROWS_AS(fit_linear_rabi(same_v), std::invalid_argument);
  const std::pair<double, double> falling[] = {{1.0, 2.0}, {2.0, 1.0}};
  CHECK_THROWS_AS(fit_linear_rabi(falling), std::domain_error);
}

TEST_CASE("Boltzmann temperature fits") {
  const SystemParams p = SystemParams::table1();
  const Ladder l = build_ladder(Truncation::ten, p);
  const FitResult at110 = fit_boltzmann_temperature(populations(thermal_state(l, 0.110), l), l);
  CHECK_THAT(at110.value("T"), WithinAbs(0.110, 1e-4));
  for (const double t : {0.020, 0.050, 0.110, 0.200, 0.300}) {
    const FitResult fit = fit_boltzmann_temperature(populations(thermal_state(l, t), l), l);
    CHECK_THAT(fit.value("T"), WithinRel(t, 0.005));
  }
  Populations ground;
  ground[g] = 1.0;
  CHECK(fit_boltzmann_temperature(ground, l).has_flag("zero_temperature_limit"));
  Populations uniform;
  uniform.p = {0.25, 0.25, 0.25, 0.25};
  CHECK(fit_boltzmann_temperature(uniform, l, BoltzmannModel::transmon)
            .has_flag("infinite_temperature_limit"));
  Populations inverted;
  inverted.p = {0.3, 0.6, 0.05, 0.05};
  CHECK(fit_boltzmann_temperature(inverted, l).has_flag("non_thermal"));

  const auto w = boltzmann_populations(l, 0.110, BoltzmannModel::transmon);
  CHECK_THAT(w[1] / w[0], WithinRel(std::exp(-kHbar * hz_to_angular(4.089e9) / (kBoltzmann * 0.110)), 1e-12));
}

TEST_CASE("decay-induced readout error") {
  const double gamma = 1.0 / 6.6e-6;
  CHECK_THAT(readout_decay_error(gamma, 0.4e-6), WithinAbs(0.0588, 1e-4));
  CHECK_THAT(readout_decay_error(gamma, 1.0e-6), WithinAbs(0.1405, 1e-4));
  CHECK(readout_decay_error(gamma, 0.0) == 0.0);
}
