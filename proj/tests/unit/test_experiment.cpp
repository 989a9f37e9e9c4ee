#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qcr/config.hpp"
#include "qcr/io.hpp"

using namespace qcr;
using enum TransmonLevel;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace fs = std::filesystem;

namespace {

const fs::path kPresets = QCR_PRESETS_DIR;
const std::string kCli = QCR_CLI_PATH;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qcr_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = "\"" + kCli + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig small_sweep(double ef_max, double f0g1_max, std::size_t points) {
  ExperimentConfig cfg;
  cfg.drive = named_drive("D");
  cfg.drive.drive.omega_ef = cfg.drive.drive.omega_f0g1 = 0.0;
  cfg.sweep = SweepSpec{0.0, ef_max, points, 0.0, f0g1_max, points};
  return cfg;
}

}  // namespace

TEST_CASE("named configurations") {
  const DriveSetting a = named_drive("A");
  CHECK(a.qcr == QcrState::off);
  CHECK(a.drive.omega_ef == 0.0);
  CHECK(a.drive.deltas.empty());
  const DriveSetting b = named_drive("B");
  CHECK(b.qcr == QcrState::off);
  CHECK_THAT(b.drive.omega_f0g1, WithinRel(hz_to_angular(1.16e6), 1e-15));
  CHECK_THAT(b.drive.omega_ef, WithinRel(hz_to_angular(1.43e6), 1e-15));
  CHECK(named_drive("C").qcr == QcrState::on);
  const DriveSetting d = named_drive("D");
  CHECK(d.qcr == QcrState::on);
  CHECK_THAT(d.drive.omega_f0g1, WithinRel(hz_to_angular(1.73e6), 1e-15));
  CHECK_THAT(d.drive.omega_ef, WithinRel(hz_to_angular(2.29e6), 1e-15));
  CHECK_THROWS_AS(named_drive("E"), std::invalid_argument);

  // the voltage maps pass through the named amplitudes
  for (const char* name : {"B", "D"}) {
    const DriveVoltages v = named_voltages(name);
    const DriveParams want = named_drive(name).drive;
    CHECK_THAT(default_f0g1_map().omega(v.f0g1), WithinRel(want.omega_f0g1, 1e-12));
    CHECK_THAT(default_ef_map().omega(v.ef), WithinRel(want.omega_ef, 1e-12));
  }
  CHECK(named_voltages("C").qcr == 160e-6);
  CHECK(named_voltages("A").f0g1 == 0.0);
}

TEST_CASE("seed derivation gives distinct streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(5, 3) == derive_seed(5, 3));
}

TEST_CASE("config A from the thermal state stays flat") {
  ExperimentConfig cfg;
  cfg.system.occupations = thermal_occupations(cfg.system.frequencies.off, cfg.system.temperature);
  cfg.times = uniform_grid(20e-6, 41);
  const TrajectoryRun run = run_trajectory(cfg);
  const double start = run.trajectory.pexc.front();
  for (const double p : run.trajectory.pexc) CHECK_THAT(p, WithinAbs(start, 1e-3));
  CHECK_THAT(run.pexc_ss, WithinAbs(start, 1e-3));
}

TEST_CASE("degenerate start is reported, not thrown") {
  ExperimentConfig cfg;
  cfg.bath = Bath::cold;
  cfg.times = uniform_grid(1e-6, 11);
  const TrajectoryRun run = run_trajectory(cfg);
  CHECK(std::find(run.flags.begin(), run.flags.end(), "degenerate_start") != run.flags.end());
  CHECK(run.delta.empty());
}

TEST_CASE("QCR on-state shortens the undriven decay time") {
  double td[2];
  for (const char* name : {"A", "C"}) {
    ExperimentConfig cfg;
    cfg.drive = named_drive(name);
    cfg.pulses = {Pulse::pi_ge};
    cfg.times = uniform_grid(40e-6, 201);
    const TrajectoryRun run = run_trajectory(cfg);
    const FitResult fit = fit_exponential(SignalTrace{cfg.times, run.trajectory.pexc, {}});
    td[cfg.drive.qcr == QcrState::on] = fit.value("T_d");
  }
  CHECK_THAT(td[0] / td[1], WithinRel(6.6 / 4.9, 0.05));
}

TEST_CASE("config D resets at least ten times faster than undriven decay") {
  double t[2];
  for (const char* name : {"A", "D"}) {
    ExperimentConfig cfg;
    cfg.drive = named_drive(name);
    cfg.pulses = {Pulse::pi_ge, Pulse::pi_ef};
    cfg.times = uniform_grid(60e-6, 6001);
    cfg.thresholds = {0.05};
    const TrajectoryRun run = run_trajectory(cfg);
    REQUIRE(run.crossings.front().first.has_value());
    t[name[0] == 'D'] = *run.crossings.front().first;
  }
  CHECK(t[0] >= 10.0 * t[1]);
}

TEST_CASE("sweep cells are independent of the worker count") {
  ExperimentConfig cfg = small_sweep(hz_to_angular(3e6), hz_to_angular(3e6), 4);
  cfg.workers = 1;
  const SweepResult serial = run_sweep(cfg);
  cfg.workers = 3;
  const SweepResult parallel = run_sweep(cfg);
  REQUIRE(serial.cells.size() == 16);
  for (std::size_t k = 0; k < serial.cells.size(); ++k) {
    CHECK(serial.cells[k].pexc_ss == parallel.cells[k].pexc_ss);
    CHECK(serial.cells[k].rates == parallel.cells[k].rates);
    CHECK(serial.cells[k].status == "ok");
  }
  CHECK(sweep_csv(serial) == sweep_csv(parallel));
  // f0g1-major ordering
  CHECK(serial.cells[1].omega_ef > serial.cells[0].omega_ef);
  CHECK(serial.cells[1].omega_f0g1 == serial.cells[0].omega_f0g1);
  CHECK(serial.cells[4].omega_f0g1 > serial.cells[0].omega_f0g1);
}

TEST_CASE("single zero-drive cell equals the undriven steady state") {
  const ExperimentConfig cfg = small_sweep(0.0, 0.0, 1);
  const SweepResult r = run_sweep(cfg);
  REQUIRE(r.cells.size() == 1);
  ExperimentConfig undriven;
  undriven.drive = named_drive("C");
  const LiouvillianSpectrum s = run_spectrum(undriven);
  const Ladder l = experiment_ladder(undriven);
  CHECK_THAT(r.cells[0].pexc_ss, WithinAbs(populations(s.steady_state, l).pexc(), 1e-12));
  CHECK(r.cells[0].rates.size() == 10);
}

TEST_CASE("hot-bath driving raises the steady-state excitation") {
  ExperimentConfig cfg = load_config(kPresets / "examples" / "sweep_hot.yaml");
  cfg.sweep->ef_points = cfg.sweep->f0g1_points = 5;
  cfg.workers = 2;
  const SweepResult r = run_sweep(cfg);
  CHECK(r.cells.back().pexc_ss > r.cells.front().pexc_ss);
}

TEST_CASE("cold-bath sweep reaches a very low floor") {
  const ExperimentConfig cfg = load_config(kPresets / "examples" / "sweep_cold.yaml");
  const SweepResult r = run_sweep(cfg);
  double lowest = 1.0;
  for (const auto& c : r.cells) lowest = std::min(lowest, c.pexc_ss);
  CHECK(lowest <= 1e-7);
}

TEST_CASE("readout pipeline tracks the simulated excitation") {
  ExperimentConfig cfg;
  cfg.drive = named_drive("D");
  cfg.pulses = {Pulse::pi_ge, Pulse::pi_ef};
  cfg.times = uniform_grid(2e-6, 201);
  cfg.readout.time_points = 6;
  cfg.seed = 3;
  const ReadoutRun run = run_readout_pipeline(cfg);
  REQUIRE(run.points.size() == 6);
  for (const auto& p : run.points) {
    CHECK(p.status == "ok");
    CHECK_THAT(p.pexc_estimate, WithinAbs(p.pexc_true, 0.03));
  }
  CHECK(run.points.front().time == 0.0);
  CHECK(run.points.back().time == cfg.times.back());
}

TEST_CASE("zero shots is a validation error") {
  ExperimentConfig cfg;
  cfg.readout.shots = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_THROWS_AS(run_readout_pipeline(cfg), std::invalid_argument);
}

TEST_CASE("calibration entry points") {
  ExperimentConfig cfg;
  cfg.drive = named_drive("D");
  cfg.calibration.kind = CalibrationKind::ef;
  cfg.calibration.samples = 151;
  const SignalTrace trace = synthesize_calibration_trace(cfg);
  CHECK(trace.times.size() == 151);
  const FitResult fit = calibrate_trace(cfg, trace);
  CHECK_THAT(fit.value("omega_ef"), WithinRel(cfg.drive.drive.omega_ef, 0.02));
}

TEST_CASE("CLI writes byte-identical outputs for identical runs") {
  const fs::path dir = scratch("cli_repeat");
  const fs::path cfg = dir / "run.yaml";
  write_text(cfg, R"(experiment:
  drive: D
  prepare: f
  time_grid: {t_end_s: 1.0e-6, samples: 21}
readout: {shots: 500, calibration_shots: 500, time_points: 3}
sweep:
  omega_ef_hz: {min: 0.0, max: 2.0e6, points: 2}
  omega_f0g1_hz: {min: 0.0, max: 2.0e6, points: 2}
)");
  for (const char* verb : {"trajectory", "spectrum", "sweep", "readout"}) {
    INFO(verb);
    const fs::path a = dir / (std::string(verb) + "_a");
    const fs::path b = dir / (std::string(verb) + "_b");
    REQUIRE(run_cli(std::string(verb) + " -c " + cfg.string() + " -o " + a.string() + " -s 7 -w 2") == 0);
    REQUIRE(run_cli(std::string(verb) + " -c " + cfg.string() + " -o " + b.string() + " -s 7 -w 1") == 0);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      ++files;
      CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    }
    CHECK(files > 0);
  }
  CHECK(fs::exists(dir / "trajectory_a" / "trajectory.csv"));
  CHECK(slurp(dir / "trajectory_a" / "trajectory.csv").rfind("t,p_g,p_e,p_f,p_h,P_exc,dP_exc", 0) == 0);
}

TEST_CASE("CLI exit codes") {
  const fs::path dir = scratch("cli_errors");
  const fs::path bad = dir / "bad.yaml";
  write_text(bad, "experiment: {drive: Z}\n");
  CHECK(run_cli("trajectory -c " + bad.string() + " -o " + (dir / "out").string()) == 2);
  const fs::path unknown = dir / "unknown.yaml";
  write_text(unknown, "experimnt: {}\n");
  CHECK(run_cli("spectrum -c " + unknown.string()) == 2);
  CHECK(run_cli("frobnicate") != 0);
  CHECK(run_cli("sweep -c " + (kPresets / "table1.yaml").string() + " -o " + (dir / "s").string()) != 0);
}
