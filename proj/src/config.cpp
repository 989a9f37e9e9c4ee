#include "qcr/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace qcr {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw ConfigError(path.empty() ? "<root>" : path, "expected a mapping");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!ok.count(key)) throw ConfigError(join(path, key), "unknown key");
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) throw ConfigError(path, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path, "cannot parse '" + node.Scalar() + "'");
  }
}

template <typename T>
void read(const YAML::Node& parent, const std::string& path, const char* key, T& out) {
  if (const YAML::Node n = parent[key]) out = scalar<T>(n, join(path, key));
}

// Reads a positive time and stores its inverse as a rate.
void read_rate_from_time(const YAML::Node& parent, const std::string& path, const char* key, double& rate) {
  if (const YAML::Node n = parent[key]) {
    const double t = scalar<double>(n, join(path, key));
    if (!(t > 0.0)) throw ConfigError(join(path, key), "time must be > 0");
    rate = 1.0 / t;
  }
}

void read_hz(const YAML::Node& parent, const std::string& path, const char* key, double& omega) {
  if (const YAML::Node n = parent[key]) omega = hz_to_angular(scalar<double>(n, join(path, key)));
}

QcrState parse_qcr(const YAML::Node& n, const std::string& path) {
  const auto s = scalar<std::string>(n, path);
  if (s == "on") return QcrState::on;
  if (s == "off") return QcrState::off;
  throw ConfigError(path, "expected 'on' or 'off'");
}

template <typename F>
void per_qcr(const YAML::Node& node, const std::string& path, F&& body) {
  check_keys(node, path, {"off", "on"});
  if (node["off"]) body(node["off"], join(path, "off"), QcrState::off);
  if (node["on"]) body(node["on"], join(path, "on"), QcrState::on);
}

void parse_system(const YAML::Node& node, const std::string& path, SystemParams& sys) {
  check_keys(node, path, {"temperature_k", "rate_convention", "frequencies_hz", "decay_times_s",
                          "dephasing_times_s", "occupations", "metadata"});
  read(node, path, "temperature_k", sys.temperature);
  if (const YAML::Node n = node["rate_convention"]) {
    const auto s = scalar<std::string>(n, join(path, "rate_convention"));
    if (s == "emission_fixed") {
      sys.convention = RateConvention::emission_fixed;
    } else if (s == "occupation_scaled") {
      sys.convention = RateConvention::occupation_scaled;
    } else {
      throw ConfigError(join(path, "rate_convention"), "expected emission_fixed or occupation_scaled");
    }
  }
  if (const YAML::Node n = node["frequencies_hz"]) {
    per_qcr(n, join(path, "frequencies_hz"), [&](const YAML::Node& f, const std::string& p, QcrState s) {
      check_keys(f, p, {"ge", "ef", "fh", "resonator", "f0g1"});
      auto& out = sys.frequencies[s];
      read_hz(f, p, "ge", out.ge);
      read_hz(f, p, "ef", out.ef);
      read_hz(f, p, "fh", out.fh);
      read_hz(f, p, "resonator", out.resonator);
      read_hz(f, p, "f0g1", out.f0g1);
    });
  }
  bool dephasing_given = false;
  if (const YAML::Node n = node["decay_times_s"]) {
    per_qcr(n, join(path, "decay_times_s"), [&](const YAML::Node& f, const std::string& p, QcrState s) {
      check_keys(f, p, {"eg", "fe", "hf", "kappa"});
      auto& out = sys.decay[s];
      read_rate_from_time(f, p, "eg", out.eg);
      read_rate_from_time(f, p, "fe", out.fe);
      read_rate_from_time(f, p, "hf", out.hf);
      read_rate_from_time(f, p, "kappa", out.kappa);
    });
  }
  if (const YAML::Node n = node["dephasing_times_s"]) {
    dephasing_given = true;
    per_qcr(n, join(path, "dephasing_times_s"), [&](const YAML::Node& f, const std::string& p, QcrState s) {
      check_keys(f, p, {"eg", "fe", "hf"});
      auto& out = sys.dephasing[s];
      read_rate_from_time(f, p, "eg", out.eg);
      read_rate_from_time(f, p, "fe", out.fe);
      read_rate_from_time(f, p, "hf", out.hf);
    });
  }
  if (!dephasing_given && node["decay_times_s"]) {
    for (const QcrState s : {QcrState::off, QcrState::on}) {
      const auto& d = sys.decay[s];
      sys.dephasing[s] = {4.0 * d.eg, 4.0 * d.fe, 4.0 * d.hf};
    }
  }
  if (const YAML::Node n = node["occupations"]) {
    const std::string p = join(path, "occupations");
    if (n.IsScalar() && n.Scalar() == "bose") {
      sys.occupations = thermal_occupations(sys.frequencies.off, sys.temperature);
    } else {
      check_keys(n, p, {"eg", "fe", "hf", "resonator"});
      read(n, p, "eg", sys.occupations.eg);
      read(n, p, "fe", sys.occupations.fe);
      read(n, p, "hf", sys.occupations.hf);
      read(n, p, "resonator", sys.occupations.resonator);
    }
  }
  if (const YAML::Node n = node["metadata"]) {
    const std::string p = join(path, "metadata");
    check_keys(n, p, {"dynes_parameter", "tunneling_resistance_ohm", "readout_frequency_hz", "gap_energy_ev"});
    read(n, p, "dynes_parameter", sys.metadata.dynes_parameter);
    read(n, p, "tunneling_resistance_ohm", sys.metadata.tunneling_resistance_ohm);
    read_hz(n, p, "readout_frequency_hz", sys.metadata.readout_frequency);
    read(n, p, "gap_energy_ev", sys.metadata.gap_energy_ev);
  }
  try {
    sys.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

std::map<LevelKey, double> parse_deltas(const YAML::Node& node, const std::string& path) {
  if (!node.IsMap()) throw ConfigError(path, "expected a mapping of level -> Hz");
  std::map<LevelKey, double> out;
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    LevelKey level;
    try {
      level = parse_level(key);
    } catch (const std::invalid_argument&) {
      throw ConfigError(join(path, key), "not a level name");
    }
    out[level] = hz_to_angular(scalar<double>(kv.second, join(path, key)));
  }
  return out;
}

DriveSetting parse_drive(const YAML::Node& node, const std::string& path) {
  if (node.IsScalar()) {
    try {
      return named_drive(node.Scalar());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, e.what());
    }
  }
  check_keys(node, path, {"qcr", "rabi_hz", "voltages_v", "deltas_hz"});
  DriveSetting s;
  if (!node["qcr"]) throw ConfigError(join(path, "qcr"), "required");
  s.qcr = parse_qcr(node["qcr"], join(path, "qcr"));
  if (node["rabi_hz"] && node["voltages_v"]) throw ConfigError(path, "give rabi_hz or voltages_v, not both");
  if (const YAML::Node n = node["rabi_hz"]) {
    const std::string p = join(path, "rabi_hz");
    check_keys(n, p, {"ef", "f0g1"});
    s.name = "custom";
    read_hz(n, p, "ef", s.drive.omega_ef);
    read_hz(n, p, "f0g1", s.drive.omega_f0g1);
  } else if (const YAML::Node n = node["voltages_v"]) {
    const std::string p = join(path, "voltages_v");
    check_keys(n, p, {"ef", "f0g1"});
    s.name = "voltages";
    double v_ef = 0.0;
    double v_f0g1 = 0.0;
    read(n, p, "ef", v_ef);
    read(n, p, "f0g1", v_f0g1);
    s.drive.omega_ef = v_ef > 0.0 ? std::max(0.0, default_ef_map().omega(v_ef)) : 0.0;
    s.drive.omega_f0g1 = v_f0g1 > 0.0 ? std::max(0.0, default_f0g1_map().omega(v_f0g1)) : 0.0;
  } else {
    s.name = "custom";
  }
  if (const YAML::Node n = node["deltas_hz"]) s.drive.deltas = parse_deltas(n, join(path, "deltas_hz"));
  try {
    s.drive.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return s;
}

std::vector<Pulse> parse_pulses(const YAML::Node& node, const std::string& path) {
  if (node.IsScalar()) {
    const auto s = node.Scalar();
    if (s == "thermal") return {};
    if (s == "e") return {Pulse::pi_ge};
    if (s == "f") return {Pulse::pi_ge, Pulse::pi_ef};
    throw ConfigError(path, "expected thermal, e, f or a pulse list");
  }
  if (!node.IsSequence()) throw ConfigError(path, "expected a pulse list");
  std::vector<Pulse> out;
  for (std::size_t k = 0; k < node.size(); ++k) {
    const auto s = scalar<std::string>(node[k], path + "[" + std::to_string(k) + "]");
    if (s == "pi_ge") {
      out.push_back(Pulse::pi_ge);
    } else if (s == "pi_ef") {
      out.push_back(Pulse::pi_ef);
    } else {
      throw ConfigError(path + "[" + std::to_string(k) + "]", "expected pi_ge or pi_ef");
    }
  }
  const bool allowed = out.empty() || (out.size() == 1 && out[0] == Pulse::pi_ge) ||
                       (out.size() == 2 && out[0] == Pulse::pi_ge && out[1] == Pulse::pi_ef);
  if (!allowed) throw ConfigError(path, "allowed sequences are [], [pi_ge] and [pi_ge, pi_ef]");
  return out;
}

std::vector<double> parse_time_grid(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"t_end_s", "samples"});
  double t_end = 0.0;
  std::size_t samples = 201;
  if (!node["t_end_s"]) throw ConfigError(join(path, "t_end_s"), "required");
  read(node, path, "t_end_s", t_end);
  read(node, path, "samples", samples);
  if (!(t_end > 0.0)) throw ConfigError(join(path, "t_end_s"), "must be > 0");
  if (samples < 2) throw ConfigError(join(path, "samples"), "must be >= 2");
  return uniform_grid(t_end, samples);
}

void parse_experiment(const YAML::Node& node, const std::string& path, ExperimentConfig& cfg) {
  check_keys(node, path, {"truncation", "drive", "prepare", "bath", "time_grid", "thresholds"});
  if (const YAML::Node n = node["truncation"]) {
    const auto s = scalar<std::string>(n, join(path, "truncation"));
    if (s == "ten" || s == "10") {
      cfg.truncation = Truncation::ten;
    } else if (s == "four" || s == "4") {
      cfg.truncation = Truncation::four;
    } else {
      throw ConfigError(join(path, "truncation"), "expected ten or four");
    }
  }
  if (const YAML::Node n = node["drive"]) cfg.drive = parse_drive(n, join(path, "drive"));
  if (const YAML::Node n = node["prepare"]) cfg.pulses = parse_pulses(n, join(path, "prepare"));
  if (const YAML::Node n = node["bath"]) {
    const auto s = scalar<std::string>(n, join(path, "bath"));
    if (s == "hot") {
      cfg.bath = Bath::hot;
    } else if (s == "cold") {
      cfg.bath = Bath::cold;
    } else {
      throw ConfigError(join(path, "bath"), "expected hot or cold");
    }
  }
  if (const YAML::Node n = node["time_grid"]) cfg.times = parse_time_grid(n, join(path, "time_grid"));
  if (const YAML::Node n = node["thresholds"]) {
    const std::string p = join(path, "thresholds");
    if (!n.IsSequence()) throw ConfigError(p, "expected a list");
    cfg.thresholds.clear();
    for (std::size_t k = 0; k < n.size(); ++k) {
      const double t = scalar<double>(n[k], p + "[" + std::to_string(k) + "]");
      if (!(t > 0.0 && t < 1.0)) throw ConfigError(p + "[" + std::to_string(k) + "]", "must lie in (0, 1)");
      cfg.thresholds.push_back(t);
    }
  }
}

void parse_axis(const YAML::Node& node, const std::string& path, double& lo, double& hi, std::size_t& points) {
  check_keys(node, path, {"min", "max", "points"});
  for (const char* key : {"min", "max", "points"}) {
    if (!node[key]) throw ConfigError(join(path, key), "required");
  }
  read_hz(node, path, "min", lo);
  read_hz(node, path, "max", hi);
  read(node, path, "points", points);
  if (lo < 0.0 || hi < lo) throw ConfigError(path, "need 0 <= min <= max");
  if (points == 0) throw ConfigError(join(path, "points"), "must be >= 1");
}

SweepSpec parse_sweep(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"omega_ef_hz", "omega_f0g1_hz", "cell_cap"});
  SweepSpec s;
  if (!node["omega_ef_hz"]) throw ConfigError(join(path, "omega_ef_hz"), "required");
  if (!node["omega_f0g1_hz"]) throw ConfigError(join(path, "omega_f0g1_hz"), "required");
  parse_axis(node["omega_ef_hz"], join(path, "omega_ef_hz"), s.ef_min, s.ef_max, s.ef_points);
  parse_axis(node["omega_f0g1_hz"], join(path, "omega_f0g1_hz"), s.f0g1_min, s.f0g1_max, s.f0g1_points);
  read(node, path, "cell_cap", s.cell_cap);
  if (s.cells() > s.cell_cap) {
    throw ConfigError(path, std::to_string(s.cells()) + " cells exceed cell_cap " + std::to_string(s.cell_cap));
  }
  return s;
}

MixtureModel parse_mixture(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"separation", "sigma", "components"});
  if (const YAML::Node comps = node["components"]) {
    const std::string p = join(path, "components");
    if (!comps.IsSequence() || comps.size() != kTransmonLevels) {
      throw ConfigError(p, "expected four components (g, e, f, h)");
    }
    MixtureModel m;
    for (std::size_t j = 0; j < comps.size(); ++j) {
      const std::string cp = p + "[" + std::to_string(j) + "]";
      check_keys(comps[j], cp, {"weight", "mean", "covariance"});
      auto& c = m.components[j];
      read(comps[j], cp, "weight", c.weight);
      const YAML::Node mean = comps[j]["mean"];
      if (!mean || !mean.IsSequence() || mean.size() != 2) throw ConfigError(join(cp, "mean"), "expected [I, Q]");
      c.mean = {scalar<double>(mean[0], join(cp, "mean")), scalar<double>(mean[1], join(cp, "mean"))};
      const YAML::Node cov = comps[j]["covariance"];
      if (!cov || !cov.IsSequence() || cov.size() != 2) {
        throw ConfigError(join(cp, "covariance"), "expected [[a, b], [b, c]]");
      }
      for (int r = 0; r < 2; ++r) {
        if (!cov[r].IsSequence() || cov[r].size() != 2) {
          throw ConfigError(join(cp, "covariance"), "expected [[a, b], [b, c]]");
        }
        for (int s = 0; s < 2; ++s) c.covariance(r, s) = scalar<double>(cov[r][s], join(cp, "covariance"));
      }
    }
    try {
      m.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(p, e.what());
    }
    return m;
  }
  double separation = 6.0;
  double sigma = 1.0;
  read(node, path, "separation", separation);
  read(node, path, "sigma", sigma);
  if (!(sigma > 0.0)) throw ConfigError(join(path, "sigma"), "must be > 0");
  return MixtureModel::square(separation, sigma);
}

ReadoutSpec parse_readout(const YAML::Node& node, const std::string& path) {
  check_keys(node, path, {"shots", "calibration_shots", "time_points", "mixture"});
  ReadoutSpec r;
  read(node, path, "shots", r.shots);
  read(node, path, "calibration_shots", r.calibration_shots);
  read(node, path, "time_points", r.time_points);
  if (r.shots == 0) throw ConfigError(join(path, "shots"), "must be >= 1");
  if (r.calibration_shots < 16) throw ConfigError(join(path, "calibration_shots"), "must be >= 16");
  if (r.time_points == 0) throw ConfigError(join(path, "time_points"), "must be >= 1");
  if (const YAML::Node n = node["mixture"]) r.model = parse_mixture(n, join(path, "mixture"));
  return r;
}

CalibrationSpec parse_calibration(const YAML::Node& node, const std::string& path,
                                  const std::filesystem::path& base_dir) {
  check_keys(node, path, {"kind", "trace", "noise", "t_end_s", "samples"});
  CalibrationSpec c;
  if (const YAML::Node n = node["kind"]) {
    const auto s = scalar<std::string>(n, join(path, "kind"));
    if (s == "f0g1") {
      c.kind = CalibrationKind::f0g1;
    } else if (s == "ef") {
      c.kind = CalibrationKind::ef;
    } else if (s == "exponential") {
      c.kind = CalibrationKind::exponential;
    } else {
      throw ConfigError(join(path, "kind"), "expected f0g1, ef or exponential");
    }
  }
  if (const YAML::Node n = node["trace"]) {
    std::filesystem::path p = scalar<std::string>(n, join(path, "trace"));
    c.trace = p.is_relative() ? base_dir / p : p;
  }
  read(node, path, "noise", c.noise);
  read(node, path, "t_end_s", c.t_end);
  read(node, path, "samples", c.samples);
  if (!(c.noise >= 0.0)) throw ConfigError(join(path, "noise"), "must be >= 0");
  if (!(c.t_end > 0.0)) throw ConfigError(join(path, "t_end_s"), "must be > 0");
  if (c.samples < 8) throw ConfigError(join(path, "samples"), "must be >= 8");
  return c;
}

ExperimentConfig parse_node(const YAML::Node& root, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  if (!root || root.IsNull()) return cfg;
  check_keys(root, "", {"system", "experiment", "sweep", "readout", "calibration", "output", "seed", "workers"});
  if (const YAML::Node n = root["system"]) parse_system(n, "system", cfg.system);
  if (const YAML::Node n = root["experiment"]) parse_experiment(n, "experiment", cfg);
  if (const YAML::Node n = root["sweep"]) cfg.sweep = parse_sweep(n, "sweep");
  if (const YAML::Node n = root["readout"]) cfg.readout = parse_readout(n, "readout");
  if (const YAML::Node n = root["calibration"]) cfg.calibration = parse_calibration(n, "calibration", base_dir);
  if (const YAML::Node n = root["output"]) {
    check_keys(n, "output", {"dir"});
    if (n["dir"]) {
      std::filesystem::path p = scalar<std::string>(n["dir"], "output.dir");
      cfg.output_dir = p;
    }
  }
  read(root, "", "seed", cfg.seed);
  read(root, "", "workers", cfg.workers);
  if (cfg.workers == 0) throw ConfigError("workers", "must be >= 1");
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<root>", std::string("YAML syntax: ") + e.what());
  }
  return parse_node(root, std::filesystem::current_path());
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  std::ostringstream text;
  text << in.rdbuf();
  YAML::Node root;
  try {
    root = YAML::Load(text.str());
  } catch (const YAML::Exception& e) {
    throw ConfigError(path.string(), std::string("YAML syntax: ") + e.what());
  }
  return parse_node(root, path.has_parent_path() ? path.parent_path() : std::filesystem::current_path());
}

}  // namespace qcr
