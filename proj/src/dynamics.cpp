#include "qcr/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "qcr/simd/kernels.hpp"

namespace qcr {

Populations populations(const Operator& rho, const Ladder& ladder) {
  if (static_cast<std::size_t>(rho.rows()) != ladder.dim()) {
    throw std::invalid_argument("populations: state and ladder dimensions differ");
  }
  Populations out;
  for (const auto& level : ladder.levels()) {
    const auto i = static_cast<Eigen::Index>(level.index);
    out[level.key.transmon] += rho(i, i).real();
  }
  return out;
}

Populations populations(const DensityMatrix& rho, const Ladder& ladder) {
  return populations(rho.matrix(), ladder);
}

namespace {

// Split-complex state vector: the integrator works on separate real and
// imaginary planes so the SIMD kernels see contiguous doubles.
struct SplitVector {
  std::vector<double> re;
  std::vector<double> im;

  explicit SplitVector(std::size_t n = 0) : re(n, 0.0), im(n, 0.0) {}
  std::size_t size() const { return re.size(); }
};

class DormandPrince {
 public:
  DormandPrince(const Superoperator& L, const EvolveOptions& options)
      : L_(L), opts_(options), kern_(simd::active()), n_(L.dim() * L.dim()) {
    for (auto& k : k_) k = SplitVector(n_);
    tmp_ = SplitVector(n_);
    next_ = SplitVector(n_);
  }

  // Advances y from t to t_end. Returns false on step-size underflow.
  bool advance(SplitVector& y, double& t, double t_end, double& h, bool& have_k1,
               std::size_t& accepted, std::size_t& rejected) {
    if (!have_k1) {
      rhs(y, k_[0]);
      have_k1 = true;
    }
    while (t < t_end) {
      const double remaining = t_end - t;
      const bool last = h >= remaining;
      const double step = last ? remaining : h;
      if (step <= std::abs(t) * 1e-14 || step < 1e-300) return false;

      stage(y, step);
      const double err = error_norm(y, step);
      if (!std::isfinite(err)) return false;
      if (err <= 1.0) {
        t = last ? t_end : t + step;
        std::swap(y, next_);
        std::swap(k_[0], k_[6]);  // first-same-as-last
        ++accepted;
        const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        // Keep the nominal step when clipped to land on a sample time.
        h = (last ? std::max(h, step) : step) * (last ? 1.0 : factor);
        if (!last) continue;
        h = std::max(h, step * factor);
      } else {
        ++rejected;
        h = step * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      }
      if (accepted + rejected > opts_.max_steps) return false;
    }
    return true;
  }

  double initial_step(const SplitVector& y, double span) {
    SplitVector f(n_);
    rhs(y, f);
    double y_norm = 0.0;
    double f_norm = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      y_norm = std::max({y_norm, std::abs(y.re[i]), std::abs(y.im[i])});
      f_norm = std::max({f_norm, std::abs(f.re[i]), std::abs(f.im[i])});
    }
    if (f_norm == 0.0) return span;
    return std::min(span, 0.01 * std::max(y_norm, 1e-3) / f_norm);
  }

 private:
  void rhs(const SplitVector& x, SplitVector& out) const {
    const auto re = L_.real_plane();
    const auto im = L_.imag_plane();
    kern_.complex_matvec(n_, re.data(), im.data(), x.re.data(), x.im.data(), out.re.data(),
                         out.im.data());
  }

  // tmp = y + h * sum_j a_j k_j
  void combine(const SplitVector& y, double h, std::initializer_list<std::pair<int, double>> terms) {
    tmp_.re = y.re;
    tmp_.im = y.im;
    for (const auto& [idx, a] : terms) {
      if (a == 0.0) continue;
      kern_.axpy(n_, h * a, k_[idx].re.data(), tmp_.re.data());
      kern_.axpy(n_, h * a, k_[idx].im.data(), tmp_.im.data());
    }
  }

  void stage(const SplitVector& y, double h) {
    combine(y, h, {{0, 1.0 / 5.0}});
    rhs(tmp_, k_[1]);
    combine(y, h, {{0, 3.0 / 40.0}, {1, 9.0 / 40.0}});
    rhs(tmp_, k_[2]);
    combine(y, h, {{0, 44.0 / 45.0}, {1, -56.0 / 15.0}, {2, 32.0 / 9.0}});
    rhs(tmp_, k_[3]);
    combine(y, h,
            {{0, 19372.0 / 6561.0}, {1, -25360.0 / 2187.0}, {2, 64448.0 / 6561.0},
             {3, -212.0 / 729.0}});
    rhs(tmp_, k_[4]);
    combine(y, h,
            {{0, 9017.0 / 3168.0}, {1, -355.0 / 33.0}, {2, 46732.0 / 5247.0}, {3, 49.0 / 176.0},
             {4, -5103.0 / 18656.0}});
    rhs(tmp_, k_[5]);
    combine(y, h,
            {{0, 35.0 / 384.0}, {2, 500.0 / 1113.0}, {3, 125.0 / 192.0}, {4, -2187.0 / 6784.0},
             {5, 11.0 / 84.0}});
    next_.re = tmp_.re;
    next_.im = tmp_.im;
    rhs(next_, k_[6]);
  }

  double error_norm(const SplitVector& y, double h) const {
    constexpr double e[7] = {71.0 / 57600.0,      0.0,          -71.0 / 16695.0, 71.0 / 1920.0,
                             -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0};
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double err_re = 0.0;
      double err_im = 0.0;
      for (int s = 0; s < 7; ++s) {
        err_re += e[s] * k_[s].re[i];
        err_im += e[s] * k_[s].im[i];
      }
      const double scale_re =
          opts_.atol + opts_.rtol * std::max(std::abs(y.re[i]), std::abs(next_.re[i]));
      const double scale_im =
          opts_.atol + opts_.rtol * std::max(std::abs(y.im[i]), std::abs(next_.im[i]));
      worst = std::max({worst, std::abs(h * err_re) / scale_re, std::abs(h * err_im) / scale_im});
    }
    return worst;
  }

  const Superoperator& L_;
  EvolveOptions opts_;
  const simd::KernelTable& kern_;
  std::size_t n_;
  SplitVector k_[7];
  SplitVector tmp_;
  SplitVector next_;
};

void validate_times(std::span<const double> times) {
  if (times.empty()) throw std::invalid_argument("time grid is empty");
  if (times.front() != 0.0) throw std::invalid_argument("time grid must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw std::invalid_argument("time grid must be strictly increasing");
    }
  }
}

void record(Trajectory& traj, double t, Operator raw, const Ladder& ladder) {
  DensityMatrix state(hermitize_and_clip(raw), Validation::none);
  const Populations pops = populations(state, ladder);
  traj.times.push_back(t);
  traj.raw_states.push_back(std::move(raw));
  traj.states.push_back(std::move(state));
  traj.populations.push_back(pops);
  traj.pexc.push_back(pops.pexc());
}

Operator to_operator(const SplitVector& v, std::size_t dim) {
  Eigen::VectorXcd flat(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) flat(static_cast<Eigen::Index>(i)) = {v.re[i], v.im[i]};
  return unvectorize(flat, dim);
}

}  // namespace

Trajectory evolve(const Superoperator& L, const DensityMatrix& rho0, const Ladder& ladder,
                  std::span<const double> times, const EvolveOptions& options) {
  validate_times(times);
  if (rho0.dim() != L.dim() || ladder.dim() != L.dim()) {
    throw std::invalid_argument("evolve: dimension mismatch between L, rho0 and ladder");
  }
  const std::size_t n = L.dim() * L.dim();
  SplitVector y(n);
  const Eigen::VectorXcd v0 = vectorize(rho0.matrix());
  for (std::size_t i = 0; i < n; ++i) {
    y.re[i] = v0(static_cast<Eigen::Index>(i)).real();
    y.im[i] = v0(static_cast<Eigen::Index>(i)).imag();
  }

  Trajectory traj;
  record(traj, 0.0, rho0.matrix(), ladder);
  if (times.size() == 1) return traj;

  DormandPrince solver(L, options);
  double t = 0.0;
  double h = solver.initial_step(y, times.back());
  bool have_k1 = false;
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!solver.advance(y, t, times[k], h, have_k1, traj.steps_accepted, traj.steps_rejected)) {
      if (!options.fallback_to_oracle) {
        throw StiffnessError("evolve: step size underflow at t = " + std::to_string(t));
      }
      traj.used_oracle_fallback = true;
      for (; k < times.size(); ++k) {
        record(traj, times[k], evolve_expm_oracle(L, rho0, times[k]).matrix(), ladder);
      }
      return traj;
    }
    record(traj, times[k], to_operator(y, L.dim()), ladder);
  }
  return traj;
}

DensityMatrix evolve_expm_oracle(const Superoperator& L, const DensityMatrix& rho0, double t) {
  if (rho0.dim() != L.dim()) throw std::invalid_argument("evolve_expm_oracle: dimension mismatch");
  const Eigen::MatrixXcd propagator = (L.matrix() * t).exp();
  const Eigen::VectorXcd v = propagator * vectorize(rho0.matrix());
  Operator rho = unvectorize(v, L.dim());
  return DensityMatrix(0.5 * (rho + rho.adjoint()), Validation::none);
}

Trajectory oracle_trajectory(const Superoperator& L, const DensityMatrix& rho0,
                             const Ladder& ladder, std::span<const double> times) {
  validate_times(times);
  Trajectory traj;
  record(traj, 0.0, rho0.matrix(), ladder);
  for (std::size_t k = 1; k < times.size(); ++k) {
    record(traj, times[k], evolve_expm_oracle(L, rho0, times[k]).matrix(), ladder);
  }
  return traj;
}

std::vector<double> delta_pexc(std::span<const double> pexc, double pexc_ss) {
  if (pexc.empty()) throw std::invalid_argument("delta_pexc: empty series");
  const double initial = std::abs(pexc.front() - pexc_ss);
  if (!(initial > 1e-15)) {
    throw std::domain_error("delta_pexc: degenerate start, P_exc(0) equals P_exc^ss");
  }
  std::vector<double> out;
  out.reserve(pexc.size());
  for (const double p : pexc) out.push_back(std::abs(p - pexc_ss) / initial);
  return out;
}

std::vector<double> delta_pexc(const Trajectory& traj, double pexc_ss) {
  return delta_pexc(std::span<const double>(traj.pexc), pexc_ss);
}

namespace {

double interpolate_crossing(double t0, double v0, double t1, double v1, double threshold) {
  if (v0 > 0.0 && v1 > 0.0) {
    const double a = std::log(v0);
    const double b = std::log(v1);
    if (a != b) return t0 + (t1 - t0) * (a - std::log(threshold)) / (a - b);
  }
  if (v0 == v1) return t1;
  return t0 + (t1 - t0) * (v0 - threshold) / (v0 - v1);
}

}  // namespace

std::optional<double> first_crossing(std::span<const double> times,
                                     std::span<const double> values, double threshold) {
  if (times.size() != values.size()) throw std::invalid_argument("first_crossing: size mismatch");
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] < threshold) {
      if (k == 0) return times[0];
      return interpolate_crossing(times[k - 1], values[k - 1], times[k], values[k], threshold);
    }
  }
  return std::nullopt;
}

std::optional<double> settling_time(std::span<const double> times, std::span<const double> values,
                                    double threshold) {
  if (times.size() != values.size()) throw std::invalid_argument("settling_time: size mismatch");
  if (values.empty() || values.back() >= threshold) return std::nullopt;
  std::size_t k = values.size() - 1;
  while (k > 0 && values[k - 1] < threshold) --k;
  if (k == 0) return times[0];
  return interpolate_crossing(times[k - 1], values[k - 1], times[k], values[k], threshold);
}

std::vector<double> uniform_grid(double t_end, std::size_t samples) {
  if (!(t_end > 0.0) || samples < 2) {
    throw std::invalid_argument("uniform_grid: need t_end > 0 and at least 2 samples");
  }
  std::vector<double> out(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    out[k] = t_end * static_cast<double>(k) / static_cast<double>(samples - 1);
  }
  out.back() = t_end;
  return out;
}

}  // namespace qcr
