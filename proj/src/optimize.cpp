#include "qcr/optimize.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace qcr {

namespace {

struct SimplexContext {
  const Objective* f;
  std::size_t evaluations = 0;
};

double simplex_trampoline(const gsl_vector* v, void* params) {
  auto* ctx = static_cast<SimplexContext*>(params);
  ++ctx->evaluations;
  const double value = (*ctx->f)(std::span<const double>(v->data, v->size));
  return std::isfinite(value) ? value : std::numeric_limits<double>::max();
}

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

std::unique_ptr<gsl_vector, VectorDeleter> to_gsl(const std::vector<double>& x) {
  std::unique_ptr<gsl_vector, VectorDeleter> v(gsl_vector_alloc(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) gsl_vector_set(v.get(), i, x[i]);
  return v;
}

}  // namespace

MinimizeResult nelder_mead(const Objective& f, std::vector<double> x0, std::vector<double> step,
                           const SimplexOptions& options) {
  if (x0.empty() || x0.size() != step.size()) {
    throw std::invalid_argument("nelder_mead: x0 and step must be non-empty and equal length");
  }
  gsl_set_error_handler_off();
  SimplexContext ctx{&f};
  gsl_multimin_function fn{&simplex_trampoline, x0.size(), &ctx};
  auto x = to_gsl(x0);
  auto ss = to_gsl(step);
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, x0.size()));
  gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), ss.get());

  MinimizeResult out;
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(m.get());
    if (gsl_multimin_test_size(size, options.size_tolerance) == GSL_SUCCESS) {
      out.converged = true;
      break;
    }
  }
  const gsl_vector* best = gsl_multimin_fminimizer_x(m.get());
  out.x.assign(best->data, best->data + best->size);
  out.value = gsl_multimin_fminimizer_minimum(m.get());
  out.evaluations = ctx.evaluations;
  return out;
}

ScalarMinimum brent_minimize(const std::function<double(double)>& f, double lo, double hi,
                             int bits, std::size_t max_iterations) {
  if (!(lo < hi)) throw std::invalid_argument("brent_minimize: need lo < hi");
  std::uintmax_t iterations = max_iterations;
  std::size_t evaluations = 0;
  auto counted = [&](double x) {
    ++evaluations;
    return f(x);
  };
  const auto [x, value] = boost::math::tools::brent_find_minima(counted, lo, hi, bits, iterations);
  return {x, value, evaluations};
}

Eigen::MatrixXd numerical_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& r,
                                   const Eigen::VectorXd& x, double relative_step) {
  const Eigen::VectorXd r0 = r(x);
  Eigen::MatrixXd jac(r0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = relative_step * std::max(1.0, std::abs(x(j)));
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(j) += h;
    xm(j) -= h;
    jac.col(j) = (r(xp) - r(xm)) / (2.0 * h);
  }
  return jac;
}

Eigen::MatrixXd least_squares_covariance(const Eigen::MatrixXd& jacobian,
                                         const Eigen::VectorXd& residuals) {
  const auto m = jacobian.rows();
  const auto n = jacobian.cols();
  const double dof = m > n ? static_cast<double>(m - n) : 1.0;
  const double s2 = residuals.squaredNorm() / dof;
  // equilibrate columns so parameters of very different magnitude share one rank threshold
  Eigen::VectorXd scale(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double norm = jacobian.col(j).norm();
    scale(j) = norm > 0.0 ? 1.0 / norm : 0.0;
  }
  const Eigen::MatrixXd scaled = jacobian * scale.asDiagonal();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(scaled.transpose() * scaled);
  Eigen::MatrixXd cov = s2 * scale.asDiagonal() * cod.pseudoInverse() * scale.asDiagonal();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (scale(j) == 0.0) cov(j, j) = std::numeric_limits<double>::infinity();
  }
  return cov;
}

}  // namespace qcr
