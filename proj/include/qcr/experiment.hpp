#pragma once
// Named drive configurations, experiment descriptions and the batch runs
// behind the command-line verbs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qcr/calibration.hpp"
#include "qcr/readout.hpp"

namespace qcr {

enum class Bath { hot, cold };

struct DriveSetting {
  std::string name;  // "A".."D", "custom" or "voltages"
  QcrState qcr = QcrState::off;
  DriveParams drive;
};

// A: QCR off, no drive. B: QCR off, (Omega_f0g1, Omega_ef)/2pi = (1.16, 1.43) MHz.
// C: QCR on, no drive.  D: QCR on, (1.73, 2.29) MHz. Throws std::invalid_argument.
DriveSetting named_drive(const std::string& name);

// Drive amplitudes of the named configurations, volts.
struct DriveVoltages {
  double qcr = 0.0;
  double f0g1 = 0.0;
  double ef = 0.0;
};
DriveVoltages named_voltages(const std::string& name);

// Two-point maps through the B and D amplitudes and their quoted Rabi frequencies.
RabiVoltageMap default_f0g1_map();
RabiVoltageMap default_ef_map();

struct SweepSpec {
  double ef_min = 0.0;  // rad/s
  double ef_max = 0.0;
  std::size_t ef_points = 1;
  double f0g1_min = 0.0;
  double f0g1_max = 0.0;
  std::size_t f0g1_points = 1;
  std::size_t cell_cap = 10'000;

  std::size_t cells() const { return ef_points * f0g1_points; }
  double ef_at(std::size_t k) const;
  double f0g1_at(std::size_t k) const;
};

struct ReadoutSpec {
  MixtureModel model = MixtureModel::square();
  std::size_t shots = 8000;              // per reset time
  std::size_t calibration_shots = 8000;  // per prepared state at t = 0
  std::size_t time_points = 11;
};

enum class CalibrationKind { f0g1, ef, exponential };

struct CalibrationSpec {
  CalibrationKind kind = CalibrationKind::f0g1;
  std::optional<std::filesystem::path> trace;  // synthesized from the drive when absent
  double noise = 0.01;
  double t_end = 1.5e-6;
  std::size_t samples = 301;
};

struct ExperimentConfig {
  SystemParams system = SystemParams::table1();
  Truncation truncation = Truncation::ten;
  DriveSetting drive = named_drive("A");
  std::vector<Pulse> pulses;
  Bath bath = Bath::hot;
  std::vector<double> times = uniform_grid(2e-6);
  std::vector<double> thresholds{1e-3, 0.05};
  std::optional<SweepSpec> sweep;
  ReadoutSpec readout;
  CalibrationSpec calibration;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  // System parameters with the bath mode applied.
  SystemParams effective_params() const;
};

// Independent stream seeds from one base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

Ladder experiment_ladder(const ExperimentConfig& config);
Superoperator experiment_generator(const ExperimentConfig& config, const Ladder& ladder);
// Thermal state of the ladder (|g0> for a cold bath) with the pulses applied.
DensityMatrix experiment_initial_state(const ExperimentConfig& config, const Ladder& ladder,
                                       std::span<const Pulse> pulses);

struct Crossing {
  double threshold = 0.0;
  std::optional<double> first;
  std::optional<double> settled;
};

struct TrajectoryRun {
  Ladder ladder;
  Trajectory trajectory;
  LiouvillianSpectrum spectrum;
  double pexc_ss = 0.0;
  std::vector<double> delta;  // empty when the start is degenerate
  std::vector<Crossing> crossings;
  std::vector<std::string> flags;
};

TrajectoryRun run_trajectory(const ExperimentConfig& config);

LiouvillianSpectrum run_spectrum(const ExperimentConfig& config);

struct SweepCell {
  double omega_ef = 0.0;
  double omega_f0g1 = 0.0;
  double pexc_ss = 0.0;
  std::vector<double> rates;  // ten slowest nonzero rates
  std::string status = "ok";
};

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepCell> cells;  // f0g1-major: index = i_f0g1 * ef_points + i_ef
};

// Per-cell failures are recorded in `status`; the sweep always completes.
SweepResult run_sweep(const ExperimentConfig& config);

struct ReadoutPoint {
  double time = 0.0;
  LevelProbabilities truth{};
  LevelProbabilities estimate{};
  double pexc_true = 0.0;
  double pexc_estimate = 0.0;
  double inside_fraction = 0.0;
  std::string status = "ok";
};

struct ReadoutRun {
  ShotSet calibration_shots;
  MixtureFit calibration;
  std::vector<ReadoutPoint> points;
};

ReadoutRun run_readout_pipeline(const ExperimentConfig& config);

// Fits `trace` with the model selected by config.calibration.kind.
FitResult calibrate_trace(const ExperimentConfig& config, const SignalTrace& trace);

// Synthetic trace from the configured drive, noise and seed.
SignalTrace synthesize_calibration_trace(const ExperimentConfig& config);

}  // namespace qcr
