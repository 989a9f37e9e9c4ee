#include "qcr/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <unsupported/Eigen/NonLinearOptimization>

#include "qcr/optimize.hpp"

namespace qcr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Likelihood-ratio margin (in units of the residual variance) a drive must
// buy over the undriven model before its Rabi frequency counts as resolved.
constexpr double kDriveSignificance = 9.0;

double span_of(const SignalTrace& trace) { return trace.times.back() - trace.times.front(); }

Eigen::VectorXd weights_of(const SignalTrace& trace) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(trace.values.size()));
  if (trace.weighted()) {
    for (std::size_t i = 0; i < trace.sigma.size(); ++i) w(static_cast<Eigen::Index>(i)) = 1.0 / trace.sigma[i];
  }
  return w;
}

double weighted_mean(const SignalTrace& trace, const Eigen::VectorXd& w) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < trace.values.size(); ++i) {
    const double wi = w(static_cast<Eigen::Index>(i)) * w(static_cast<Eigen::Index>(i));
    num += wi * trace.values[i];
    den += wi;
  }
  return num / den;
}

bool is_constant(const SignalTrace& trace) {
  const auto [lo, hi] = std::minmax_element(trace.values.begin(), trace.values.end());
  const double mean =
      std::accumulate(trace.values.begin(), trace.values.end(), 0.0) / trace.values.size();
  return (*hi - *lo) <= 1e-12 * std::max(1.0, std::abs(mean));
}

struct Affine {
  double a = 0.0;
  double b = 0.0;
  double rss = 0.0;
};

// Best a, b for values ~ a * model + b.
Affine project_affine(const std::vector<double>& model, const SignalTrace& trace,
                      const Eigen::VectorXd& w) {
  const auto n = static_cast<Eigen::Index>(model.size());
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = w(i) * model[static_cast<std::size_t>(i)];
    x(i, 1) = w(i);
    y(i) = w(i) * trace.values[static_cast<std::size_t>(i)];
  }
  Affine out;
  const auto [lo, hi] = std::minmax_element(model.begin(), model.end());
  if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi))) {
    out.a = 0.0;
    out.b = weighted_mean(trace, w);
  } else {
    const Eigen::Vector2d coef = x.colPivHouseholderQr().solve(y);
    out.a = coef(0);
    out.b = coef(1);
  }
  out.rss = (x * Eigen::Vector2d(out.a, out.b) - y).squaredNorm();
  return out;
}

// Evaluates `levels` populations on `times`, which need not start at zero.
std::vector<double> level_trace(const Ladder& ladder, const Superoperator& L, LevelKey start,
                                TransmonLevel read, std::span<const double> times) {
  std::vector<double> grid;
  const bool shifted = times.front() != 0.0;
  if (shifted) grid.push_back(0.0);
  grid.insert(grid.end(), times.begin(), times.end());
  const DensityMatrix rho0 = DensityMatrix::pure(ladder.dim(), *ladder.index_of(start));
  const Trajectory traj = evolve(L, rho0, ladder, grid);
  std::vector<double> out;
  out.reserve(times.size());
  for (std::size_t k = shifted ? 1 : 0; k < traj.populations.size(); ++k) {
    out.push_back(traj.populations[k][read]);
  }
  return out;
}

// Dominant angular frequency of the linearly detrended trace.
double dominant_frequency(const SignalTrace& trace) {
  const std::size_t n = trace.times.size();
  const double t0 = trace.times.front();
  const double span = span_of(trace);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    x(static_cast<Eigen::Index>(i), 0) = trace.times[i] - t0;
    x(static_cast<Eigen::Index>(i), 1) = 1.0;
    y(static_cast<Eigen::Index>(i)) = trace.values[i];
  }
  const Eigen::VectorXd resid = y - x * x.colPivHouseholderQr().solve(y);
  double best_power = -1.0;
  double best_omega = kTwoPi / span;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double omega = kTwoPi * static_cast<double>(k) / span;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double phase = omega * (trace.times[i] - t0);
      re += resid(static_cast<Eigen::Index>(i)) * std::cos(phase);
      im -= resid(static_cast<Eigen::Index>(i)) * std::sin(phase);
    }
    const double power = re * re + im * im;
    if (power > best_power) {
      best_power = power;
      best_omega = omega;
    }
  }
  return best_omega;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(count - 1);
    out[k] = std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
  }
  return out;
}

void set_parameter(FitResult& fit, const std::string& name, double value, double uncertainty) {
  fit.parameters[name] = FitParameter{value, uncertainty};
}

// Weighted residuals of a * model(theta) + b against the trace, for covariance.
Eigen::VectorXd affine_residuals(const std::vector<double>& model, double a, double b,
                                 const SignalTrace& trace, const Eigen::VectorXd& w) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(model.size()));
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    r(k) = w(k) * (a * model[i] + b - trace.values[i]);
  }
  return r;
}

void fill_covariance(FitResult& fit, const std::vector<std::string>& labels,
                     const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residuals,
                     const Eigen::VectorXd& theta) {
  const Eigen::MatrixXd jac = numerical_jacobian(residuals, theta, 1e-4);
  const Eigen::VectorXd r = residuals(theta);
  fit.covariance = least_squares_covariance(jac, r);
  fit.covariance_labels = labels;
  fit.residual_norm = r.norm();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double var = fit.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    fit.parameters[labels[i]].uncertainty = var >= 0.0 ? std::sqrt(var) : kNaN;
  }
}

FitResult constant_trace_fit(const SignalTrace& trace, const std::vector<std::string>& names) {
  FitResult fit;
  const Eigen::VectorXd w = weights_of(trace);
  set_parameter(fit, "a", 0.0, kNaN);
  set_parameter(fit, "b", weighted_mean(trace, w), 0.0);
  for (const auto& name : names) set_parameter(fit, name, 0.0, kNaN);
  fit.converged = true;
  fit.flags = {"constant_trace", "a_unidentifiable"};
  for (const auto& name : names) fit.flags.push_back(name + "_unidentifiable");
  return fit;
}

}  // namespace

void SignalTrace::validate() const {
  if (times.size() != values.size()) throw std::invalid_argument("trace: times/values size mismatch");
  if (!sigma.empty() && sigma.size() != times.size()) {
    throw std::invalid_argument("trace: sigma size mismatch");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i])) {
      throw std::invalid_argument("trace: non-finite entry at index " + std::to_string(i));
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw std::invalid_argument("trace: times must be strictly increasing");
    }
    if (!sigma.empty() && !(sigma[i] > 0.0)) {
      throw std::invalid_argument("trace: sigma must be positive");
    }
  }
  if (!times.empty() && times.front() < 0.0) throw std::invalid_argument("trace: negative time");
}

double FitResult::value(const std::string& name) const { return parameters.at(name).value; }

double FitResult::uncertainty(const std::string& name) const {
  return parameters.at(name).uncertainty;
}

bool FitResult::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

std::vector<double> f0g1_model_trace(std::span<const double> times, const SystemParams& params,
                                     QcrState state, double omega_f0g1, double kappa) {
  SystemParams p = params;
  p.decay[state].kappa = kappa;
  const Ladder ladder = build_ladder(Truncation::four, p, state);
  DriveParams drive;
  drive.omega_f0g1 = omega_f0g1;
  const Superoperator L = build_generator(ladder, p, state, drive);
  return level_trace(ladder, L, {TransmonLevel::f, 0}, TransmonLevel::f, times);
}

std::vector<double> ef_model_trace(std::span<const double> times, const SystemParams& params,
                                   double omega_ef) {
  const Ladder ladder = build_ladder(Truncation::four, params, QcrState::off);
  DriveParams drive;
  drive.omega_ef = omega_ef;
  const Superoperator L = build_generator(ladder, params, QcrState::off, drive);
  return level_trace(ladder, L, {TransmonLevel::e, 0}, TransmonLevel::e, times);
}

SignalTrace synthesize_trace(std::span<const double> times, std::span<const double> model,
                             double a, double b, double noise, std::uint64_t seed) {
  if (times.size() != model.size()) throw std::invalid_argument("synthesize_trace: size mismatch");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SignalTrace trace;
  trace.times.assign(times.begin(), times.end());
  trace.values.reserve(model.size());
  for (const double m : model) trace.values.push_back(a * m + b + noise * gauss(rng));
  return trace;
}

FitResult fit_f0g1_trace(const SignalTrace& trace, const SystemParams& params, QcrState state) {
  trace.validate();
  if (trace.times.size() < 8) throw std::invalid_argument("fit_f0g1_trace: need at least 8 points");
  if (is_constant(trace)) return constant_trace_fit(trace, {"omega_f0g1", "kappa"});

  const Eigen::VectorXd w = weights_of(trace);
  const double span = span_of(trace);
  const double kappa_ref = params.decay[state].kappa > 0.0 ? params.decay[state].kappa : 1.0 / span;
  std::size_t evaluations = 0;
  auto objective = [&](double omega, double kappa) {
    ++evaluations;
    return project_affine(f0g1_model_trace(trace.times, params, state, omega, kappa), trace, w).rss;
  };

  const double seed = dominant_frequency(trace);
  const auto omegas = log_grid(seed / 4.0, seed * 4.0, 17);
  const auto kappas = log_grid(kappa_ref / 4.0, kappa_ref * 4.0, 9);
  double best = std::numeric_limits<double>::infinity();
  double best_omega = seed;
  double best_kappa = kappa_ref;
  for (const double om : omegas) {
    for (const double ka : kappas) {
      const double rss = objective(om, ka);
      if (rss < best) {
        best = rss;
        best_omega = om;
        best_kappa = ka;
      }
    }
  }

  const Objective f = [&](std::span<const double> u) { return objective(std::exp(u[0]), std::exp(u[1])); };
  const MinimizeResult nm = nelder_mead(f, {std::log(best_omega), std::log(best_kappa)}, {0.1, 0.1},
                                        SimplexOptions{1e-8, 2000});
  const double omega = std::exp(nm.x[0]);
  const double kappa = std::exp(nm.x[1]);
  const Affine ab = project_affine(f0g1_model_trace(trace.times, params, state, omega, kappa), trace, w);

  FitResult fit;
  fit.converged = nm.converged;
  const std::size_t n = trace.times.size();
  const Affine undriven =
      project_affine(f0g1_model_trace(trace.times, params, state, 0.0, kappa_ref), trace, w);
  const double noise_var = std::max(ab.rss / static_cast<double>(n - 4), 1e-300);
  if ((undriven.rss - ab.rss) / noise_var < kDriveSignificance) {
    set_parameter(fit, "a", undriven.a, kNaN);
    set_parameter(fit, "b", undriven.b, kNaN);
    set_parameter(fit, "omega_f0g1", 0.0, kNaN);
    set_parameter(fit, "kappa", kappa_ref, kNaN);
    fit.residual_norm = std::sqrt(undriven.rss);
    fit.flags = {"omega_f0g1_unidentifiable", "kappa_unidentifiable"};
    fit.evaluations = evaluations;
    return fit;
  }

  set_parameter(fit, "a", ab.a, 0.0);
  set_parameter(fit, "b", ab.b, 0.0);
  set_parameter(fit, "omega_f0g1", omega, 0.0);
  set_parameter(fit, "kappa", kappa, 0.0);
  fill_covariance(
      fit, {"a", "b", "omega_f0g1", "kappa"},
      [&](const Eigen::VectorXd& th) {
        return affine_residuals(f0g1_model_trace(trace.times, params, state, th(2), th(3)), th(0),
                                th(1), trace, w);
      },
      Eigen::Vector4d(ab.a, ab.b, omega, kappa));
  if (!fit.converged) fit.flags.push_back("not_converged");
  if (omega * span < kTwoPi) fit.flags.push_back("short_trace");
  fit.evaluations = evaluations;
  return fit;
}

FitResult fit_ef_trace(const SignalTrace& trace, const SystemParams& params) {
  trace.validate();
  if (trace.times.size() < 8) throw std::invalid_argument("fit_ef_trace: need at least 8 points");
  if (is_constant(trace)) return constant_trace_fit(trace, {"omega_ef"});

  const Eigen::VectorXd w = weights_of(trace);
  const double span = span_of(trace);
  std::size_t evaluations = 0;
  auto objective = [&](double omega) {
    ++evaluations;
    return project_affine(ef_model_trace(trace.times, params, omega), trace, w).rss;
  };

  const double seed = dominant_frequency(trace);
  const auto omegas = log_grid(seed / 4.0, seed * 4.0, 25);
  std::size_t best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    const double rss = objective(omegas[k]);
    if (rss < best) {
      best = rss;
      best_k = k;
    }
  }
  const double lo = std::log(omegas[best_k == 0 ? 0 : best_k - 1]) - (best_k == 0 ? 0.5 : 0.0);
  const double hi = std::log(omegas[std::min(best_k + 1, omegas.size() - 1)]);
  const ScalarMinimum refined =
      brent_minimize([&](double u) { return objective(std::exp(u)); }, lo, hi, 40);
  const double omega = std::exp(refined.x);
  const Affine ab = project_affine(ef_model_trace(trace.times, params, omega), trace, w);

  FitResult fit;
  fit.converged = true;
  const std::size_t n = trace.times.size();
  const Affine undriven = project_affine(ef_model_trace(trace.times, params, 0.0), trace, w);
  const double noise_var = std::max(ab.rss / static_cast<double>(n - 3), 1e-300);
  if ((undriven.rss - ab.rss) / noise_var < kDriveSignificance) {
    set_parameter(fit, "a", undriven.a, kNaN);
    set_parameter(fit, "b", undriven.b, kNaN);
    set_parameter(fit, "omega_ef", 0.0, kNaN);
    fit.residual_norm = std::sqrt(undriven.rss);
    fit.flags = {"omega_ef_unidentifiable"};
    fit.evaluations = evaluations;
    return fit;
  }

  set_parameter(fit, "a", ab.a, 0.0);
  set_parameter(fit, "b", ab.b, 0.0);
  set_parameter(fit, "omega_ef", omega, 0.0);
  fill_covariance(
      fit, {"a", "b", "omega_ef"},
      [&](const Eigen::VectorXd& th) {
        return affine_residuals(ef_model_trace(trace.times, params, th(2)), th(0), th(1), trace, w);
      },
      Eigen::Vector3d(ab.a, ab.b, omega));
  if (omega * span < kTwoPi) fit.flags.push_back("short_trace");
  fit.evaluations = evaluations;
  return fit;
}

namespace {

struct ExponentialFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const SignalTrace* trace;
  Eigen::VectorXd w;

  int inputs() const { return 3; }
  int values() const { return static_cast<int>(trace->times.size()); }

  // x = (A, T_d, C)
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    for (int i = 0; i < values(); ++i) {
      const double t = trace->times[static_cast<std::size_t>(i)];
      f(i) = w(i) * (x(0) * std::exp(-t / x(1)) + x(2) - trace->values[static_cast<std::size_t>(i)]);
    }
    return 0;
  }

  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& jac) const {
    for (int i = 0; i < values(); ++i) {
      const double t = trace->times[static_cast<std::size_t>(i)];
      const double e = std::exp(-t / x(1));
      jac(i, 0) = w(i) * e;
      jac(i, 1) = w(i) * x(0) * e * t / (x(1) * x(1));
      jac(i, 2) = w(i);
    }
    return 0;
  }
};

}  // namespace

FitResult fit_exponential(const SignalTrace& trace) {
  trace.validate();
  if (trace.times.size() < 4) throw std::invalid_argument("fit_exponential: need at least 4 points");
  if (is_constant(trace)) {
    FitResult fit = constant_trace_fit(trace, {"T_d"});
    fit.parameters.erase("a");
    fit.parameters["C"] = fit.parameters.at("b");
    fit.parameters.erase("b");
    fit.parameters["A"] = FitParameter{0.0, kNaN};
    fit.parameters["T_d"].value = kNaN;
    fit.flags = {"constant_trace", "T_d_unidentifiable"};
    return fit;
  }

  const Eigen::VectorXd w = weights_of(trace);
  const double span = span_of(trace);
  std::size_t evaluations = 0;
  auto exp_model = [&](double td) {
    std::vector<double> m(trace.times.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::exp(-trace.times[i] / td);
    return m;
  };
  auto objective = [&](double u) {
    ++evaluations;
    return project_affine(exp_model(std::exp(u)), trace, w).rss;
  };

  const double u_lo = std::log(span * 1e-3);
  const double u_hi = std::log(span * 1e3);
  const std::size_t grid = 121;
  std::size_t best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid; ++k) {
    const double u = u_lo + (u_hi - u_lo) * static_cast<double>(k) / (grid - 1);
    const double rss = objective(u);
    if (rss < best) {
      best = rss;
      best_k = k;
    }
  }
  auto grid_u = [&](std::size_t k) { return u_lo + (u_hi - u_lo) * static_cast<double>(k) / (grid - 1); };
  const ScalarMinimum seed = brent_minimize(objective, grid_u(best_k == 0 ? 0 : best_k - 1),
                                            grid_u(std::min(best_k + 1, grid - 1)), 40);

  double td = std::exp(seed.x);
  Affine ab = project_affine(exp_model(td), trace, w);
  FitResult fit;
  const bool at_bound = best_k == 0 || best_k == grid - 1;

  ExponentialFunctor functor{&trace, w};
  Eigen::VectorXd x(3);
  x << ab.a, td, ab.b;
  Eigen::LevenbergMarquardt<ExponentialFunctor> lm(functor);
  lm.parameters.ftol = 1e-15;
  lm.parameters.xtol = 1e-15;
  lm.parameters.gtol = 0.0;
  lm.parameters.maxfev = 4000;
  const auto status = lm.minimize(x);
  evaluations += static_cast<std::size_t>(lm.nfev);
  fit.converged = status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation &&
                  status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters;
  if (x(1) > 0.0 && std::isfinite(x(1))) {
    ab.a = x(0);
    td = x(1);
    ab.b = x(2);
  } else {
    fit.flags.push_back("negative_decay_time_rejected");
  }

  set_parameter(fit, "A", ab.a, 0.0);
  set_parameter(fit, "T_d", td, 0.0);
  set_parameter(fit, "C", ab.b, 0.0);
  Eigen::VectorXd r(static_cast<Eigen::Index>(trace.times.size()));
  Eigen::MatrixXd jac(r.size(), 3);
  const Eigen::Vector3d theta(ab.a, td, ab.b);
  functor(theta, r);
  functor.df(theta, jac);
  fit.covariance = least_squares_covariance(jac, r);
  fit.covariance_labels = {"A", "T_d", "C"};
  fit.residual_norm = r.norm();
  for (int i = 0; i < 3; ++i) {
    fit.parameters[fit.covariance_labels[static_cast<std::size_t>(i)]].uncertainty =
        std::sqrt(std::max(0.0, fit.covariance(i, i)));
  }
  if (at_bound) fit.flags.push_back("T_d_at_search_bound");
  if (std::abs(ab.a) < 3.0 * fit.uncertainty("A")) fit.flags.push_back("T_d_unidentifiable");
  if (!fit.converged) fit.flags.push_back("not_converged");
  fit.evaluations = evaluations;
  return fit;
}

RabiVoltageMap fit_linear_rabi(std::span<const std::pair<double, double>> points, QcrState state) {
  if (points.size() < 2) throw std::invalid_argument("fit_linear_rabi: need at least 2 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [v, om] : points) {
    mx += v;
    my += om;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [v, om] : points) {
    sxx += (v - mx) * (v - mx);
    sxy += (v - mx) * (om - my);
  }
  if (!(sxx > 1e-30 * std::max(1.0, mx * mx))) {
    throw std::invalid_argument("fit_linear_rabi: degenerate abscissa");
  }
  RabiVoltageMap map;
  map.qcr_state = state;
  map.slope = sxy / sxx;
  map.intercept = my - map.slope * mx;
  if (!(map.slope > 0.0)) throw std::domain_error("fit_linear_rabi: slope must be positive");
  if (points.size() > 2) {
    double rss = 0.0;
    for (const auto& [v, om] : points) {
      const double r = om - map.omega(v);
      rss += r * r;
    }
    const double s2 = rss / (n - 2.0);
    map.slope_uncertainty = std::sqrt(s2 / sxx);
    map.intercept_uncertainty = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return map;
}

std::array<double, kTransmonLevels> boltzmann_populations(const Ladder& ladder, double temperature,
                                                          BoltzmannModel model) {
  if (!(temperature > 0.0)) throw std::domain_error("boltzmann_populations: T must be > 0");
  std::array<double, kTransmonLevels> p{};
  const double beta = kHbar / (kBoltzmann * temperature);
  if (model == BoltzmannModel::ladder) {
    for (const auto& level : ladder.levels()) {
      p[static_cast<std::size_t>(level.key.transmon)] += std::exp(-beta * ladder.energy(level.index));
    }
  } else {
    for (int j = 0; j < kTransmonLevels; ++j) {
      if (const auto e = ladder.transmon_energy(static_cast<TransmonLevel>(j))) {
        p[static_cast<std::size_t>(j)] = std::exp(-beta * *e);
      }
    }
  }
  const double z = p[0] + p[1] + p[2] + p[3];
  for (auto& x : p) x /= z;
  return p;
}

FitResult fit_boltzmann_temperature(const Populations& populations, const Ladder& ladder,
                                    BoltzmannModel model) {
  for (const double x : populations.p) {
    if (!std::isfinite(x) || x < -1e-12) throw std::invalid_argument("fit_boltzmann_temperature: invalid population");
  }
  if (std::abs(populations.sum() - 1.0) > 1e-6) {
    throw std::invalid_argument("fit_boltzmann_temperature: populations must sum to 1");
  }

  std::size_t evaluations = 0;
  auto objective = [&](double u) {
    ++evaluations;
    const auto q = boltzmann_populations(ladder, std::exp(u), model);
    double d = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) d += (q[j] - populations.p[j]) * (q[j] - populations.p[j]);
    return d;
  };

  const double u_lo = std::log(1e-4);
  const double u_hi = std::log(1e3);
  const std::size_t grid = 141;
  auto grid_u = [&](std::size_t k) { return u_lo + (u_hi - u_lo) * static_cast<double>(k) / (grid - 1); };
  std::size_t best_k = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid; ++k) {
    const double d = objective(grid_u(k));
    if (d < best) {
      best = d;
      best_k = k;
    }
  }
  const ScalarMinimum refined = brent_minimize(objective, grid_u(best_k == 0 ? 0 : best_k - 1),
                                               grid_u(std::min(best_k + 1, grid - 1)), 50);

  FitResult fit;
  fit.converged = true;
  const double temperature = std::exp(refined.x);
  set_parameter(fit, "T", temperature, kNaN);
  fit.residual_norm = std::sqrt(refined.value);
  fit.evaluations = evaluations;
  if (populations.p[0] >= 1.0 - 1e-12 || refined.x <= u_lo + 0.01 * (u_hi - u_lo)) {
    fit.flags.push_back("zero_temperature_limit");
  }
  if (refined.x >= u_hi - 0.01 * (u_hi - u_lo)) fit.flags.push_back("infinite_temperature_limit");
  for (int j = 1; j < kTransmonLevels; ++j) {
    if (populations.p[static_cast<std::size_t>(j)] > populations.p[static_cast<std::size_t>(j - 1)] + 1e-3) {
      fit.flags.push_back("non_thermal");
      break;
    }
  }
  return fit;
}

double readout_decay_error(double gamma_eg, double t) {
  if (gamma_eg < 0.0 || t < 0.0) throw std::invalid_argument("readout_decay_error: inputs must be >= 0");
  return -std::expm1(-gamma_eg * t);
}

}  // namespace qcr
