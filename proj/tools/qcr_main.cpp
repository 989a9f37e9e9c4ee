// Batch driver: qcr <verb> --config FILE [--output DIR] [--seed N] [--workers N]

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qcr/config.hpp"
#include "qcr/io.hpp"
#include "qcr/simd/kernels.hpp"

namespace {

enum ExitCode { kOk = 0, kRunFailure = 1, kConfigFailure = 2, kPartialFailure = 3 };

struct CommonFlags {
  std::string config;
  std::optional<std::string> output;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("-c,--config", flags.config, "experiment YAML file")->check(CLI::ExistingFile);
  cmd->add_option("-o,--output", flags.output, "output directory (overrides output.dir)");
  cmd->add_option("-s,--seed", flags.seed, "random seed (overrides seed)");
  cmd->add_option("-w,--workers", flags.workers, "worker threads (overrides workers)")
      ->check(CLI::PositiveNumber);
}

qcr::ExperimentConfig resolve(const CommonFlags& flags) {
  qcr::ExperimentConfig cfg = flags.config.empty() ? qcr::ExperimentConfig{} : qcr::load_config(flags.config);
  if (flags.output) cfg.output_dir = *flags.output;
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.workers) cfg.workers = *flags.workers;
  cfg.validate();
  return cfg;
}

void report(const std::filesystem::path& path) { std::cout << "wrote " << path.string() << '\n'; }

int run_trajectory_verb(const qcr::ExperimentConfig& cfg) {
  const qcr::TrajectoryRun run = qcr::run_trajectory(cfg);
  const auto dir = cfg.output_dir;
  qcr::write_text(dir / "trajectory.csv", qcr::trajectory_csv(run));
  qcr::write_json(dir / "crossings.json", qcr::crossings_json(run));
  qcr::write_json(dir / "spectrum.json", qcr::spectrum_json(run.spectrum, run.ladder));
  report(dir / "trajectory.csv");
  report(dir / "crossings.json");
  report(dir / "spectrum.json");
  for (const auto& c : run.crossings) {
    std::cout << "dP_exc < " << c.threshold << ": "
              << (c.first ? qcr::format_double(*c.first) + " s" : std::string("not reached")) << '\n';
  }
  return kOk;
}

int run_spectrum_verb(const qcr::ExperimentConfig& cfg) {
  const qcr::LiouvillianSpectrum s = qcr::run_spectrum(cfg);
  const auto path = cfg.output_dir / "spectrum.json";
  qcr::write_json(path, qcr::spectrum_json(s, qcr::experiment_ladder(cfg)));
  report(path);
  return kOk;
}

int run_sweep_verb(const qcr::ExperimentConfig& cfg) {
  const qcr::SweepResult result = qcr::run_sweep(cfg);
  const auto path = cfg.output_dir / "sweep.csv";
  qcr::write_text(path, qcr::sweep_csv(result));
  report(path);
  std::size_t failed = 0;
  for (const auto& cell : result.cells) failed += cell.status != "ok";
  if (failed > 0) {
    std::cerr << failed << " of " << result.cells.size() << " cells failed; see status column\n";
    return kPartialFailure;
  }
  return kOk;
}

int run_readout_verb(const qcr::ExperimentConfig& cfg) {
  const qcr::ReadoutRun run = qcr::run_readout_pipeline(cfg);
  const auto dir = cfg.output_dir;
  qcr::write_text(dir / "calibration_shots.csv", qcr::shots_csv(run.calibration_shots));
  qcr::write_json(dir / "mixture.json", qcr::mixture_fit_json(run.calibration));
  qcr::write_text(dir / "readout.csv", qcr::readout_csv(run));
  report(dir / "calibration_shots.csv");
  report(dir / "mixture.json");
  report(dir / "readout.csv");
  std::size_t failed = 0;
  for (const auto& pt : run.points) failed += pt.status != "ok";
  if (failed > 0) {
    std::cerr << failed << " of " << run.points.size() << " time points failed; see status column\n";
    return kPartialFailure;
  }
  return kOk;
}

int run_calibrate_verb(const qcr::ExperimentConfig& cfg) {
  const auto dir = cfg.output_dir;
  qcr::SignalTrace trace;
  if (cfg.calibration.trace) {
    trace = qcr::read_trace_csv(*cfg.calibration.trace);
  } else {
    trace = qcr::synthesize_calibration_trace(cfg);
    qcr::write_text(dir / "trace.csv", qcr::trace_csv(trace));
    report(dir / "trace.csv");
  }
  const qcr::FitResult fit = qcr::calibrate_trace(cfg, trace);
  qcr::write_json(dir / "fit.json", qcr::fit_to_json(fit));
  report(dir / "fit.json");
  for (const auto& [name, p] : fit.parameters) {
    std::cout << name << " = " << qcr::format_double(p.value) << " +- " << qcr::format_double(p.uncertainty)
              << '\n';
  }
  return fit.converged ? kOk : kRunFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmon reset simulator: dynamics, spectra, sweeps, readout and fits"};
  app.require_subcommand(1);
  bool show_isa = false;
  app.add_flag("--isa", show_isa, "print the selected SIMD kernel set");

  CommonFlags flags;
  struct Verb {
    const char* name;
    const char* help;
    int (*run)(const qcr::ExperimentConfig&);
  };
  const Verb verbs[] = {
      {"trajectory", "evolve the configured reset and write populations, dP_exc and crossings",
       &run_trajectory_verb},
      {"spectrum", "write the Liouvillian spectrum and steady state", &run_spectrum_verb},
      {"sweep", "steady-state P_exc and slow rates over a Rabi-frequency grid", &run_sweep_verb},
      {"readout", "synthetic single-shot readout with mixture calibration", &run_readout_verb},
      {"calibrate", "fit a time trace (file or synthesized)", &run_calibrate_verb},
  };
  std::vector<CLI::App*> commands;
  for (const auto& v : verbs) {
    CLI::App* cmd = app.add_subcommand(v.name, v.help);
    add_common(cmd, flags);
    commands.push_back(cmd);
  }

  CLI11_PARSE(app, argc, argv);
  if (show_isa) std::cout << "simd: " << qcr::simd::isa_name(qcr::simd::active().isa) << '\n';

  for (std::size_t k = 0; k < commands.size(); ++k) {
    if (!commands[k]->parsed()) continue;
    qcr::ExperimentConfig cfg;
    try {
      cfg = resolve(flags);
    } catch (const std::invalid_argument& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kConfigFailure;
    }
    try {
      return verbs[k].run(cfg);
    } catch (const std::exception& e) {
      std::cerr << verbs[k].name << " failed: " << e.what() << '\n';
      return kRunFailure;
    }
  }
  return kRunFailure;
}
