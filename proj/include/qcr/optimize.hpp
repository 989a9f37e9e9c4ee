#pragma once
// Derivative-free minimizers used by the calibration fits.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qcr {

using Objective = std::function<double(std::span<const double>)>;

struct SimplexOptions {
  double size_tolerance = 1e-9;     // characteristic simplex size at convergence
  std::size_t max_iterations = 4000;
};

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

// Nelder-Mead simplex started from x0 with per-coordinate initial steps.
MinimizeResult nelder_mead(const Objective& f, std::vector<double> x0, std::vector<double> step,
                           const SimplexOptions& options = {});

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

// Brent's method on [lo, hi]; `bits` of precision in x.
ScalarMinimum brent_minimize(const std::function<double(double)>& f, double lo, double hi,
                             int bits = 40, std::size_t max_iterations = 500);

// Central-difference Jacobian of a residual vector function.
Eigen::MatrixXd numerical_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& r,
                                   const Eigen::VectorXd& x, double relative_step = 1e-6);

// s^2 (J^T J)^+ with s^2 = |r|^2 / (m - n); zero dof gives s^2 = |r|^2.
Eigen::MatrixXd least_squares_covariance(const Eigen::MatrixXd& jacobian,
                                         const Eigen::VectorXd& residuals);

}  // namespace qcr
