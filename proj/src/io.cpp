#include "qcr/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qcr {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return out;
}

double parse_number(const std::string& text, const std::filesystem::path& path, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": not a number '" + text + "'");
  }
  return value;
}

// Rows of numeric fields; a first line that does not parse as numbers is a header.
std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path,
                                                bool& had_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  had_header = false;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_fields(line);
    if (first) {
      first = false;
      double dummy = 0.0;
      const auto& f0 = fields.empty() ? std::string() : fields[0];
      const auto [ptr, ec] = std::from_chars(f0.data(), f0.data() + f0.size(), dummy);
      if (ec != std::errc() || ptr != f0.data() + f0.size()) {
        had_header = true;
        continue;
      }
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

Json matrix_json(const Eigen::Matrix2d& m) {
  return Json::array({Json::array({m(0, 0), m(0, 1)}), Json::array({m(1, 0), m(1, 1)})});
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& json) {
  write_text(path, json.dump(2) + "\n");
}

std::string trajectory_csv(const TrajectoryRun& run) {
  std::ostringstream out;
  out << "t,p_g,p_e,p_f,p_h,P_exc,dP_exc\n";
  const auto& traj = run.trajectory;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto& p = traj.populations[k].p;
    out << format_double(traj.times[k]);
    for (const double x : p) out << ',' << format_double(x);
    out << ',' << format_double(traj.pexc[k]) << ','
        << (run.delta.empty() ? std::string("nan") : format_double(run.delta[k])) << '\n';
  }
  return out.str();
}

Json crossings_json(const TrajectoryRun& run) {
  Json out;
  out["pexc_ss"] = run.pexc_ss;
  out["pexc_initial"] = run.trajectory.pexc.front();
  out["used_oracle_fallback"] = run.trajectory.used_oracle_fallback;
  Json list = Json::array();
  for (const auto& c : run.crossings) {
    list.push_back({{"threshold", c.threshold},
                    {"first_crossing_s", c.first ? Json(*c.first) : Json(nullptr)},
                    {"settled_s", c.settled ? Json(*c.settled) : Json(nullptr)}});
  }
  out["crossings"] = list;
  out["flags"] = run.flags;
  return out;
}

Json spectrum_json(const LiouvillianSpectrum& spectrum, const Ladder& ladder) {
  Json out;
  Json eig = Json::array();
  for (const auto& z : spectrum.eigenvalues) eig.push_back(Json::array({z.real(), z.imag()}));
  out["eigenvalues"] = eig;
  out["zero_mode"] = spectrum.zero_mode;
  out["rate_scale"] = spectrum.rate_scale;
  auto first_ten = [](const std::vector<double>& v) {
    return std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(10, v.size())));
  };
  out["rates_with_zero"] = first_ten(spectrum.rates);
  out["nonzero_rates"] = first_ten(spectrum.nonzero_rates());
  const Populations p = populations(spectrum.steady_state, ladder);
  out["steady_state_populations"] = {{"g", p.p[0]}, {"e", p.p[1]}, {"f", p.p[2]}, {"h", p.p[3]}};
  out["pexc_ss"] = p.pexc();
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "omega_ef,omega_f0g1,pexc_ss";
  for (int k = 1; k <= 10; ++k) out << ",lambda_" << k;
  out << ",status\n";
  for (const auto& cell : result.cells) {
    out << format_double(cell.omega_ef) << ',' << format_double(cell.omega_f0g1) << ','
        << format_double(cell.pexc_ss);
    for (std::size_t k = 0; k < 10; ++k) {
      out << ',' << (k < cell.rates.size() ? format_double(cell.rates[k]) : std::string("nan"));
    }
    out << ',' << cell.status << '\n';
  }
  return out.str();
}

std::string shots_csv(const ShotSet& shots) {
  std::ostringstream out;
  out << (shots.labeled() ? "I,Q,label\n" : "I,Q\n");
  for (std::size_t k = 0; k < shots.size(); ++k) {
    out << format_double(shots.i[k]) << ',' << format_double(shots.q[k]);
    if (shots.labeled()) out << ',' << level_char(static_cast<TransmonLevel>(shots.labels[k]));
    out << '\n';
  }
  return out.str();
}

ShotSet read_shots_csv(const std::filesystem::path& path) {
  bool header = false;
  const auto rows = read_rows(path, header);
  ShotSet shots;
  std::size_t line = header ? 2 : 1;
  for (const auto& row : rows) {
    if (row.size() < 2 || row.size() > 3) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": expected I,Q[,label]");
    }
    shots.i.push_back(parse_number(row[0], path, line));
    shots.q.push_back(parse_number(row[1], path, line));
    if (row.size() == 3) {
      if (row[2].size() != 1) throw std::runtime_error(path.string() + ": bad label '" + row[2] + "'");
      shots.labels.push_back(static_cast<int>(level_from_char(row[2][0])));
    }
    ++line;
  }
  if (!shots.labels.empty() && shots.labels.size() != shots.i.size()) {
    throw std::runtime_error(path.string() + ": labels present on some rows only");
  }
  shots.validate();
  return shots;
}

std::string trace_csv(const SignalTrace& trace) {
  std::ostringstream out;
  out << (trace.weighted() ? "t,value,sigma\n" : "t,value\n");
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    out << format_double(trace.times[k]) << ',' << format_double(trace.values[k]);
    if (trace.weighted()) out << ',' << format_double(trace.sigma[k]);
    out << '\n';
  }
  return out.str();
}

SignalTrace read_trace_csv(const std::filesystem::path& path) {
  bool header = false;
  const auto rows = read_rows(path, header);
  SignalTrace trace;
  std::size_t line = header ? 2 : 1;
  for (const auto& row : rows) {
    if (row.size() < 2 || row.size() > 3) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": expected t,value[,sigma]");
    }
    trace.times.push_back(parse_number(row[0], path, line));
    trace.values.push_back(parse_number(row[1], path, line));
    if (row.size() == 3) trace.sigma.push_back(parse_number(row[2], path, line));
    ++line;
  }
  trace.validate();
  return trace;
}

Json mixture_to_json(const MixtureModel& model) {
  Json comps = Json::array();
  for (std::size_t j = 0; j < model.components.size(); ++j) {
    const auto& c = model.components[j];
    comps.push_back({{"label", std::string(1, level_char(static_cast<TransmonLevel>(j)))},
                     {"weight", c.weight},
                     {"mean", Json::array({c.mean(0), c.mean(1)})},
                     {"covariance", matrix_json(c.covariance)}});
  }
  return {{"components", comps}};
}

MixtureModel mixture_from_json(const Json& json) {
  const auto& comps = json.at("components");
  if (!comps.is_array() || comps.size() != kTransmonLevels) {
    throw std::invalid_argument("mixture json: expected four components");
  }
  MixtureModel model;
  for (std::size_t j = 0; j < comps.size(); ++j) {
    const auto& c = comps[j];
    auto& out = model.components[j];
    out.weight = c.at("weight").get<double>();
    out.mean = {c.at("mean").at(0).get<double>(), c.at("mean").at(1).get<double>()};
    for (int r = 0; r < 2; ++r) {
      for (int s = 0; s < 2; ++s) out.covariance(r, s) = c.at("covariance").at(r).at(s).get<double>();
    }
  }
  model.validate();
  return model;
}

Json fit_to_json(const FitResult& fit) {
  Json params = Json::object();
  for (const auto& [name, p] : fit.parameters) {
    params[name] = {{"value", number_or_null(p.value)}, {"uncertainty", number_or_null(p.uncertainty)}};
  }
  Json cov = Json::array();
  for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < fit.covariance.cols(); ++c) row.push_back(number_or_null(fit.covariance(r, c)));
    cov.push_back(row);
  }
  return {{"parameters", params},
          {"residual_norm", number_or_null(fit.residual_norm)},
          {"covariance_labels", fit.covariance_labels},
          {"covariance", cov},
          {"converged", fit.converged},
          {"flags", fit.flags},
          {"evaluations", fit.evaluations}};
}

Json mixture_fit_json(const MixtureFit& fit) {
  Json out = mixture_to_json(fit.model);
  out["iterations"] = fit.iterations;
  out["restarts"] = fit.restarts;
  out["converged"] = fit.converged;
  out["loglik_per_shot"] = fit.loglik_history.empty() ? Json(nullptr) : Json(fit.loglik_history.back());
  out["flags"] = fit.flags;
  return out;
}

std::string readout_csv(const ReadoutRun& run) {
  std::ostringstream out;
  out << "t,p_g_true,p_e_true,p_f_true,p_h_true,p_g_est,p_e_est,p_f_est,p_h_est,"
         "P_exc_true,P_exc_est,inside_fraction,status\n";
  for (const auto& pt : run.points) {
    out << format_double(pt.time);
    for (const double x : pt.truth) out << ',' << format_double(x);
    for (const double x : pt.estimate) out << ',' << format_double(x);
    out << ',' << format_double(pt.pexc_true) << ',' << format_double(pt.pexc_estimate) << ','
        << format_double(pt.inside_fraction) << ',' << pt.status << '\n';
  }
  return out.str();
}

}  // namespace qcr
