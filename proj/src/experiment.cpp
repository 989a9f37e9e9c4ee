#include "qcr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

namespace qcr {

namespace {

constexpr double kMHz = 1e6;

std::map<LevelKey, double> deltas_mhz(double e0, double g1, double f0) {
  return {{{TransmonLevel::e, 0}, hz_to_angular(e0 * kMHz)},
          {{TransmonLevel::g, 1}, hz_to_angular(g1 * kMHz)},
          {{TransmonLevel::f, 0}, hz_to_angular(f0 * kMHz)}};
}

// Runs body(k) for k in [0, count) on `workers` threads; results are stored
// by index so the order of completion does not matter.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) body(k);
    });
  }
  for (auto& t : pool) t.join();
}

std::string csv_safe(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

double linspace_at(double lo, double hi, std::size_t points, std::size_t k) {
  if (points <= 1) return lo;
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
}

double reference_rate(const ExperimentConfig& config) {
  return config.system.decay[config.drive.qcr].kappa;
}

}  // namespace

DriveSetting named_drive(const std::string& name) {
  DriveSetting s;
  s.name = name;
  if (name == "A") {
    s.qcr = QcrState::off;
  } else if (name == "B") {
    s.qcr = QcrState::off;
    s.drive.omega_f0g1 = hz_to_angular(1.16 * kMHz);
    s.drive.omega_ef = hz_to_angular(1.43 * kMHz);
    s.drive.deltas = deltas_mhz(-2.0, 0.8, -1.2);
  } else if (name == "C") {
    s.qcr = QcrState::on;
  } else if (name == "D") {
    s.qcr = QcrState::on;
    s.drive.omega_f0g1 = hz_to_angular(1.73 * kMHz);
    s.drive.omega_ef = hz_to_angular(2.29 * kMHz);
    s.drive.deltas = deltas_mhz(-2.0, 0.8, -1.6);
  } else {
    throw std::invalid_argument("unknown drive configuration '" + name + "' (expected A, B, C or D)");
  }
  return s;
}

DriveVoltages named_voltages(const std::string& name) {
  if (name == "A") return {0.0, 0.0, 0.0};
  if (name == "B") return {0.0, 169.1e-6, 10.6e-6};
  if (name == "C") return {160e-6, 0.0, 0.0};
  if (name == "D") return {160e-6, 253.6e-6, 16.9e-6};
  throw std::invalid_argument("unknown drive configuration '" + name + "'");
}

RabiVoltageMap default_f0g1_map() {
  const std::pair<double, double> pts[] = {
      {named_voltages("B").f0g1, named_drive("B").drive.omega_f0g1},
      {named_voltages("D").f0g1, named_drive("D").drive.omega_f0g1}};
  return fit_linear_rabi(pts);
}

RabiVoltageMap default_ef_map() {
  const std::pair<double, double> pts[] = {
      {named_voltages("B").ef, named_drive("B").drive.omega_ef},
      {named_voltages("D").ef, named_drive("D").drive.omega_ef}};
  return fit_linear_rabi(pts);
}

double SweepSpec::ef_at(std::size_t k) const { return linspace_at(ef_min, ef_max, ef_points, k); }
double SweepSpec::f0g1_at(std::size_t k) const {
  return linspace_at(f0g1_min, f0g1_max, f0g1_points, k);
}

void ExperimentConfig::validate() const {
  system.validate();
  drive.drive.validate();
  if (times.empty() || times.front() != 0.0) {
    throw std::invalid_argument("experiment.time_grid: must start at 0");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw std::invalid_argument("experiment.time_grid: must be increasing");
  }
  for (const double t : thresholds) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("experiment.thresholds: values must lie in (0, 1)");
  }
  if (sweep) {
    if (sweep->ef_points == 0 || sweep->f0g1_points == 0) {
      throw std::invalid_argument("sweep: points must be >= 1");
    }
    if (sweep->ef_min < 0.0 || sweep->f0g1_min < 0.0 || sweep->ef_max < sweep->ef_min ||
        sweep->f0g1_max < sweep->f0g1_min) {
      throw std::invalid_argument("sweep: ranges must satisfy 0 <= min <= max");
    }
    if (sweep->cells() > sweep->cell_cap) {
      throw std::invalid_argument("sweep: " + std::to_string(sweep->cells()) +
                                  " cells exceed cell_cap " + std::to_string(sweep->cell_cap));
    }
  }
  if (readout.shots == 0) throw std::invalid_argument("readout.shots: must be >= 1");
  if (readout.calibration_shots < 4 * kTransmonLevels) {
    throw std::invalid_argument("readout.calibration_shots: must be >= 16");
  }
  if (readout.time_points == 0) throw std::invalid_argument("readout.time_points: must be >= 1");
  readout.model.validate();
  if (calibration.samples < 8) throw std::invalid_argument("calibration.samples: must be >= 8");
  if (!(calibration.t_end > 0.0)) throw std::invalid_argument("calibration.t_end_s: must be > 0");
  if (!(calibration.noise >= 0.0)) throw std::invalid_argument("calibration.noise: must be >= 0");
  if (workers == 0) throw std::invalid_argument("workers: must be >= 1");
}

SystemParams ExperimentConfig::effective_params() const {
  return bath == Bath::cold ? with_cold_bath(system) : system;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined word
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Ladder experiment_ladder(const ExperimentConfig& config) {
  return build_ladder(config.truncation, config.system, config.drive.qcr);
}

Superoperator experiment_generator(const ExperimentConfig& config, const Ladder& ladder) {
  return build_generator(ladder, config.effective_params(), config.drive.qcr, config.drive.drive);
}

DensityMatrix experiment_initial_state(const ExperimentConfig& config, const Ladder& ladder,
                                       std::span<const Pulse> pulses) {
  const DensityMatrix base = config.bath == Bath::cold
                                 ? DensityMatrix::pure(ladder.dim(), *ladder.index_of(TransmonLevel::g, 0))
                                 : thermal_state(ladder, config.system.temperature);
  return prepare_initial_state(base, ladder, pulses);
}

TrajectoryRun run_trajectory(const ExperimentConfig& config) {
  config.validate();
  Ladder ladder = experiment_ladder(config);
  const Superoperator L = experiment_generator(config, ladder);
  LiouvillianSpectrum spec = spectrum(L, reference_rate(config));
  const double pss = populations(spec.steady_state, ladder).pexc();
  const DensityMatrix rho0 = experiment_initial_state(config, ladder, config.pulses);
  Trajectory traj = evolve(L, rho0, ladder, config.times);

  TrajectoryRun run{std::move(ladder), std::move(traj), std::move(spec), pss, {}, {}, {}};
  try {
    run.delta = delta_pexc(run.trajectory, pss);
  } catch (const std::domain_error&) {
    run.flags.push_back("degenerate_start");
  }
  if (run.trajectory.used_oracle_fallback) run.flags.push_back("oracle_fallback");
  for (const double thr : config.thresholds) {
    Crossing c{thr, std::nullopt, std::nullopt};
    if (!run.delta.empty()) {
      c.first = first_crossing(run.trajectory.times, run.delta, thr);
      c.settled = settling_time(run.trajectory.times, run.delta, thr);
    }
    run.crossings.push_back(c);
  }
  return run;
}

LiouvillianSpectrum run_spectrum(const ExperimentConfig& config) {
  config.validate();
  const Ladder ladder = experiment_ladder(config);
  return spectrum(experiment_generator(config, ladder), reference_rate(config));
}

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  if (!config.sweep) throw std::invalid_argument("sweep: section missing");
  const SweepSpec& spec = *config.sweep;
  const Ladder ladder = experiment_ladder(config);
  const SystemParams params = config.effective_params();
  const auto dissipators = build_dissipators(ladder, params, config.drive.qcr);
  const double ref = reference_rate(config);

  SweepResult result{spec, std::vector<SweepCell>(spec.cells())};
  parallel_for(spec.cells(), config.workers, [&](std::size_t k) {
    SweepCell& cell = result.cells[k];
    cell.omega_f0g1 = spec.f0g1_at(k / spec.ef_points);
    cell.omega_ef = spec.ef_at(k % spec.ef_points);
    try {
      DriveParams drive = config.drive.drive;
      drive.omega_ef = cell.omega_ef;
      drive.omega_f0g1 = cell.omega_f0g1;
      const Superoperator L = assemble_liouvillian(build_drive_hamiltonian(ladder, drive),
                                                   std::span<const Dissipator>(dissipators));
      const LiouvillianSpectrum s = spectrum(L, ref);
      cell.pexc_ss = populations(s.steady_state, ladder).pexc();
      auto rates = s.nonzero_rates();
      rates.resize(std::min<std::size_t>(rates.size(), 10));
      cell.rates = std::move(rates);
    } catch (const std::exception& e) {
      cell.pexc_ss = std::numeric_limits<double>::quiet_NaN();
      cell.status = csv_safe(std::string("error: ") + e.what());
    }
  });
  return result;
}

ReadoutRun run_readout_pipeline(const ExperimentConfig& config) {
  config.validate();
  const ReadoutSpec& spec = config.readout;
  const Ladder ladder = experiment_ladder(config);
  const Superoperator L = experiment_generator(config, ladder);
  const DensityMatrix rho0 = experiment_initial_state(config, ladder, config.pulses);
  const Trajectory traj = evolve(L, rho0, ladder, config.times);

  // Calibration at t = 0 from the thermal, pi_ge and pi_ge + pi_ef preparations.
  ReadoutRun run;
  const std::vector<std::vector<Pulse>> preparations{{}, {Pulse::pi_ge}, {Pulse::pi_ge, Pulse::pi_ef}};
  for (std::size_t p = 0; p < preparations.size(); ++p) {
    const DensityMatrix prepared = experiment_initial_state(config, ladder, preparations[p]);
    const ShotSet part = synthesize_shots(spec.model, to_probabilities(populations(prepared, ladder)),
                                          spec.calibration_shots, derive_seed(config.seed, 1'000'000 + p));
    run.calibration_shots.i.insert(run.calibration_shots.i.end(), part.i.begin(), part.i.end());
    run.calibration_shots.q.insert(run.calibration_shots.q.end(), part.q.begin(), part.q.end());
    run.calibration_shots.labels.insert(run.calibration_shots.labels.end(), part.labels.begin(),
                                        part.labels.end());
  }
  std::array<Eigen::Vector2d, kTransmonLevels> init;
  for (std::size_t j = 0; j < init.size(); ++j) init[j] = spec.model.components[j].mean;
  MixtureFitOptions options;
  options.seed = derive_seed(config.seed, 2'000'000);
  run.calibration = fit_mixture(run.calibration_shots, init, options);

  const std::size_t samples = traj.times.size();
  const std::size_t count = std::min(spec.time_points, samples);
  run.points.resize(count);
  parallel_for(count, config.workers, [&](std::size_t k) {
    const std::size_t idx =
        count == 1 ? 0 : static_cast<std::size_t>(std::llround(static_cast<double>(k) * (samples - 1) / (count - 1)));
    ReadoutPoint& pt = run.points[k];
    pt.time = traj.times[idx];
    pt.truth = to_probabilities(traj.populations[idx]);
    pt.pexc_true = traj.pexc[idx];
    try {
      const ShotSet shots = synthesize_shots(spec.model, pt.truth, spec.shots, derive_seed(config.seed, idx));
      const ReadoutEstimate est = classify_and_estimate(shots, run.calibration.model);
      pt.estimate = est.probabilities;
      pt.pexc_estimate = pexc_from_shots(est.probabilities);
      pt.inside_fraction = est.inside_fraction;
    } catch (const std::exception& e) {
      pt.pexc_estimate = std::numeric_limits<double>::quiet_NaN();
      pt.status = csv_safe(std::string("error: ") + e.what());
    }
  });
  return run;
}

SignalTrace synthesize_calibration_trace(const ExperimentConfig& config) {
  config.validate();
  const CalibrationSpec& spec = config.calibration;
  const SystemParams params = config.effective_params();
  const QcrState state = config.drive.qcr;
  const std::uint64_t seed = derive_seed(config.seed, 3);
  if (spec.kind == CalibrationKind::exponential) {
    const TrajectoryRun run = run_trajectory(config);
    return synthesize_trace(run.trajectory.times, run.trajectory.pexc, 1.0, 0.0, spec.noise, seed);
  }
  const std::vector<double> times = uniform_grid(spec.t_end, spec.samples);
  const std::vector<double> model =
      spec.kind == CalibrationKind::f0g1
          ? f0g1_model_trace(times, params, state, config.drive.drive.omega_f0g1, params.decay[state].kappa)
          : ef_model_trace(times, params, config.drive.drive.omega_ef);
  return synthesize_trace(times, model, 1.0, 0.0, spec.noise, seed);
}

FitResult calibrate_trace(const ExperimentConfig& config, const SignalTrace& trace) {
  const SystemParams params = config.effective_params();
  switch (config.calibration.kind) {
    case CalibrationKind::f0g1:
      return fit_f0g1_trace(trace, params, config.drive.qcr);
    case CalibrationKind::ef:
      return fit_ef_trace(trace, params);
    case CalibrationKind::exponential:
      return fit_exponential(trace);
  }
  throw std::invalid_argument("calibration.kind: unknown");
}

}  // namespace qcr
