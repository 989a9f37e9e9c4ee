#include <catch_amalgamated.hpp>

#include <filesystem>

#include "qcr/config.hpp"

using namespace qcr;
using enum TransmonLevel;
using Catch::Matchers::WithinRel;
using Catch::Matchers::ContainsSubstring;

namespace {

const std::filesystem::path kPresets = QCR_PRESETS_DIR;

std::string error_path(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("empty document gives defaults") {
  const ExperimentConfig cfg = parse_config("");
  CHECK(cfg.drive.name == "A");
  CHECK(cfg.truncation == Truncation::ten);
  CHECK(cfg.seed == 1);
  CHECK(cfg.workers == 1);
  CHECK(cfg.times.size() == 201);
}

TEST_CASE("bundled preset reproduces the built-in device parameters") {
  const ExperimentConfig cfg = load_config(kPresets / "table1.yaml");
  const SystemParams want = SystemParams::table1();
  CHECK_THAT(cfg.system.decay.off.eg, WithinRel(want.decay.off.eg, 1e-12));
  CHECK_THAT(cfg.system.decay.on.kappa, WithinRel(want.decay.on.kappa, 1e-12));
  CHECK_THAT(cfg.system.decay.on.hf, WithinRel(want.decay.on.hf, 1e-12));
  CHECK_THAT(cfg.system.dephasing.on.fe, WithinRel(want.dephasing.on.fe, 1e-12));
  CHECK_THAT(cfg.system.frequencies.on.resonator, WithinRel(want.frequencies.on.resonator, 1e-12));
  CHECK(cfg.system.occupations.resonator == 0.15);
  CHECK(cfg.drive.name == "D");
  CHECK(cfg.pulses == std::vector<Pulse>{Pulse::pi_ge, Pulse::pi_ef});
  CHECK(cfg.workers == 4);
}

TEST_CASE("every example preset loads") {
  for (const auto& entry : std::filesystem::directory_iterator(kPresets / "examples")) {
    INFO(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()).validate());
  }
}

TEST_CASE("custom drives in Hz and volts") {
  const ExperimentConfig hz = parse_config(R"(
experiment:
  drive:
    qcr: on
    rabi_hz: {ef: 2.0e6, f0g1: 1.5e6}
    deltas_hz: {e0: -2.0e6, f0: 1.0e5}
)");
  CHECK(hz.drive.qcr == QcrState::on);
  CHECK_THAT(hz.drive.drive.omega_ef, WithinRel(hz_to_angular(2.0e6), 1e-15));
  CHECK_THAT(hz.drive.drive.deltas.at({f, 0}), WithinRel(hz_to_angular(1e5), 1e-15));

  const ExperimentConfig volts = parse_config(R"(
experiment:
  drive:
    qcr: on
    voltages_v: {ef: 16.9e-6, f0g1: 253.6e-6}
)");
  CHECK_THAT(volts.drive.drive.omega_f0g1, WithinRel(hz_to_angular(1.73e6), 1e-9));
  CHECK_THAT(volts.drive.drive.omega_ef, WithinRel(hz_to_angular(2.29e6), 1e-9));
}

TEST_CASE("system overrides") {
  const ExperimentConfig cfg = parse_config(R"(
system:
  temperature_k: 0.05
  rate_convention: occupation_scaled
  occupations: bose
  decay_times_s:
    off: {eg: 10.0e-6}
experiment:
  truncation: four
  bath: cold
  prepare: e
  time_grid: {t_end_s: 1.0e-6, samples: 11}
  thresholds: [0.01]
seed: 9
workers: 3
)");
  CHECK(cfg.system.convention == RateConvention::occupation_scaled);
  CHECK_THAT(cfg.system.decay.off.eg, WithinRel(1e5, 1e-12));
  CHECK_THAT(cfg.system.dephasing.off.eg, WithinRel(4e5, 1e-12));
  CHECK_THAT(cfg.system.occupations.eg,
             WithinRel(bose_occupation(hz_to_angular(4.089e9), 0.05), 1e-12));
  CHECK(cfg.truncation == Truncation::four);
  CHECK(cfg.bath == Bath::cold);
  CHECK(cfg.effective_params().occupations.resonator == 0.0);
  CHECK(cfg.pulses == std::vector<Pulse>{Pulse::pi_ge});
  CHECK(cfg.times.size() == 11);
  CHECK(cfg.times.back() == 1.0e-6);
  CHECK(cfg.thresholds == std::vector<double>{0.01});
  CHECK(cfg.seed == 9);
  CHECK(cfg.workers == 3);
}

TEST_CASE("sweep and readout sections") {
  const ExperimentConfig cfg = parse_config(R"(
sweep:
  omega_ef_hz: {min: 0.0, max: 4.0e6, points: 5}
  omega_f0g1_hz: {min: 1.0e6, max: 2.0e6, points: 3}
readout:
  shots: 100
  mixture: {separation: 5.0, sigma: 0.5}
)");
  REQUIRE(cfg.sweep.has_value());
  CHECK(cfg.sweep->cells() == 15);
  CHECK_THAT(cfg.sweep->ef_at(4), WithinRel(hz_to_angular(4e6), 1e-15));
  CHECK_THAT(cfg.sweep->f0g1_at(1), WithinRel(hz_to_angular(1.5e6), 1e-15));
  CHECK(cfg.readout.shots == 100);
  CHECK(cfg.readout.model.components[1].mean.x() == 5.0);
  CHECK(cfg.readout.model.components[1].covariance(0, 0) == 0.25);
}

TEST_CASE("errors carry the offending path") {
  CHECK(error_path("bogus: 1") == "bogus");
  CHECK(error_path("system: {temperature: 1}") == "system.temperature");
  CHECK(error_path("system: {decay_times_s: {on: {kappa: -1}}}") == "system.decay_times_s.on.kappa");
  CHECK(error_path("experiment: {drive: Z}") == "experiment.drive");
  CHECK(error_path("experiment: {prepare: [pi_ef]}") == "experiment.prepare");
  CHECK(error_path("experiment: {time_grid: {t_end_s: 0}}") == "experiment.time_grid.t_end_s");
  CHECK(error_path("experiment: {thresholds: [2.0]}") == "experiment.thresholds[0]");
  CHECK(error_path("readout: {shots: 0}") == "readout.shots");
  CHECK(error_path("calibration: {kind: magic}") == "calibration.kind");
  CHECK(error_path("workers: 0") == "workers");
  CHECK(error_path("seed: abc") == "seed");
  CHECK(error_path(R"(sweep:
  omega_ef_hz: {min: 0, max: 1, points: 200}
  omega_f0g1_hz: {min: 0, max: 1, points: 200}
)") == "sweep");
  CHECK_THROWS_WITH(parse_config("system: [1, 2"), ContainsSubstring("YAML"));
  CHECK_THROWS_AS(load_config(kPresets / "missing.yaml"), ConfigError);
}
