#pragma once
// Single-shot IQ readout: synthesis from populations, four-component Gaussian
// mixture calibration, and 1-sigma ellipse counting.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcr/dynamics.hpp"

namespace qcr {

inline constexpr int kNoLabel = -1;

// Structure of arrays; labels is empty or holds one transmon index per shot.
struct ShotSet {
  std::vector<double> i;
  std::vector<double> q;
  std::vector<int> labels;

  std::size_t size() const { return i.size(); }
  bool labeled() const { return !labels.empty(); }
  void validate() const;
};

struct GaussianComponent {
  double weight = 0.0;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity();

  // (x - mu)^T Sigma^-1 (x - mu)
  double mahalanobis2(const Eigen::Vector2d& x) const;
};

// Component j belongs to transmon level j (g, e, f, h).
struct MixtureModel {
  std::array<GaussianComponent, kTransmonLevels> components;

  // Throws std::invalid_argument: weights sum to 1 within 1e-10, each
  // covariance symmetric positive definite.
  void validate() const;

  // Four unit-variance clouds on a square of side `separation`.
  static MixtureModel square(double separation = 6.0, double sigma = 1.0);
};

using LevelProbabilities = std::array<double, kTransmonLevels>;

LevelProbabilities to_probabilities(const Populations& p);

// Each shot draws a label with probability p_j and samples that component.
ShotSet synthesize_shots(const MixtureModel& model, const LevelProbabilities& populations,
                         std::size_t n, std::uint64_t seed);

class CovarianceCollapse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MixtureFitOptions {
  std::size_t max_iterations = 1000;
  double tolerance = 1e-10;          // relative log-likelihood change
  std::size_t max_restarts = 5;
  double covariance_floor = 1e-9;    // fraction of the data variance
  double degenerate_weight = 1e-3;   // flag components lighter than this
  std::uint64_t seed = 0;            // for initialization without means
};

struct MixtureFit {
  MixtureModel model;
  std::vector<double> loglik_history;  // per iteration, mean log-likelihood per shot
  std::size_t iterations = 0;
  std::size_t restarts = 0;
  bool converged = false;
  bool monotone = true;
  std::vector<std::string> flags;

  bool has_flag(const std::string& flag) const;
};

// Expectation-maximization. With `init_means` the components start there and
// are labeled by the best matching permutation; otherwise by descending weight,
// ties broken by the first coordinate. Throws CovarianceCollapse when every
// restart collapses or the data has no spread.
MixtureFit fit_mixture(const ShotSet& shots,
                       const std::optional<std::array<Eigen::Vector2d, kTransmonLevels>>& init_means,
                       const MixtureFitOptions& options = {});

// Mean log-likelihood per shot.
double mixture_log_likelihood(const ShotSet& shots, const MixtureModel& model);

struct ReadoutEstimate {
  LevelProbabilities probabilities{};
  std::array<std::size_t, kTransmonLevels> counts{};
  double inside_fraction = 0.0;
  std::vector<int> assignment;  // component per shot, kNoLabel when outside every ellipse
};

// Counts shots inside each 1-sigma ellipse; overlaps go to the highest
// posterior responsibility. Throws std::runtime_error when no shot is inside.
ReadoutEstimate classify_and_estimate(const ShotSet& shots, const MixtureModel& model);

// 1 - p_g, checked against p_e + p_f + p_h.
double pexc_from_shots(const LevelProbabilities& p);

}  // namespace qcr
