#include "qcr/readout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "qcr/simd/kernels.hpp"

namespace qcr {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Precomputed per-component terms for the batched log-density.
struct ComponentTerms {
  double p00, p01, p11;  // Sigma^-1
  double log_norm;       // log w - log 2 pi - 1/2 log det Sigma
};

ComponentTerms terms_of(const GaussianComponent& c) {
  const double det = c.covariance.determinant();
  const Eigen::Matrix2d inv = c.covariance.inverse();
  const double log_w = c.weight > 0.0 ? std::log(c.weight) : kNegInf;
  return {inv(0, 0), inv(0, 1), inv(1, 1), log_w - kLog2Pi - 0.5 * std::log(det)};
}

// log_density[j][k] = log w_j + log N(x_k | j); d2[j][k] = Mahalanobis^2.
void component_scores(const ShotSet& shots, const MixtureModel& model,
                      std::array<std::vector<double>, kTransmonLevels>& d2,
                      std::array<std::vector<double>, kTransmonLevels>& log_density) {
  const auto& kern = simd::active();
  const std::size_t n = shots.size();
  for (int j = 0; j < kTransmonLevels; ++j) {
    const auto& c = model.components[static_cast<std::size_t>(j)];
    const ComponentTerms t = terms_of(c);
    auto& dj = d2[static_cast<std::size_t>(j)];
    auto& lj = log_density[static_cast<std::size_t>(j)];
    dj.resize(n);
    lj.resize(n);
    kern.mahalanobis2(n, shots.i.data(), shots.q.data(), c.mean(0), c.mean(1), t.p00, t.p01, t.p11,
                      dj.data());
    for (std::size_t k = 0; k < n; ++k) lj[k] = t.log_norm - 0.5 * dj[k];
  }
}

double log_sum_exp(const std::array<double, kTransmonLevels>& x) {
  const double m = *std::max_element(x.begin(), x.end());
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (const double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

double data_variance(const ShotSet& shots) {
  const double n = static_cast<double>(shots.size());
  const double mi = std::accumulate(shots.i.begin(), shots.i.end(), 0.0) / n;
  const double mq = std::accumulate(shots.q.begin(), shots.q.end(), 0.0) / n;
  double v = 0.0;
  for (std::size_t k = 0; k < shots.size(); ++k) {
    v += (shots.i[k] - mi) * (shots.i[k] - mi) + (shots.q[k] - mq) * (shots.q[k] - mq);
  }
  return v / (2.0 * n);
}

// k-means++ seeding.
std::array<Eigen::Vector2d, kTransmonLevels> seed_means(const ShotSet& shots, std::mt19937_64& rng) {
  std::array<Eigen::Vector2d, kTransmonLevels> means;
  std::uniform_int_distribution<std::size_t> pick(0, shots.size() - 1);
  const std::size_t first = pick(rng);
  means[0] = {shots.i[first], shots.q[first]};
  std::vector<double> dist(shots.size(), std::numeric_limits<double>::infinity());
  for (int j = 1; j < kTransmonLevels; ++j) {
    for (std::size_t k = 0; k < shots.size(); ++k) {
      const Eigen::Vector2d x(shots.i[k], shots.q[k]);
      dist[k] = std::min(dist[k], (x - means[static_cast<std::size_t>(j - 1)]).squaredNorm());
    }
    const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
    std::size_t chosen = pick(rng);
    if (total > 0.0) {
      std::discrete_distribution<std::size_t> weighted(dist.begin(), dist.end());
      chosen = weighted(rng);
    }
    means[static_cast<std::size_t>(j)] = {shots.i[chosen], shots.q[chosen]};
  }
  return means;
}

struct Attempt {
  MixtureModel model;
  std::vector<double> history;
  std::size_t iterations = 0;
  bool converged = false;
  bool monotone = true;
  bool collapsed = false;
};

Attempt run_em(const ShotSet& shots, const std::array<Eigen::Vector2d, kTransmonLevels>& means,
               double variance, const MixtureFitOptions& options) {
  const std::size_t n = shots.size();
  const double floor = options.covariance_floor * variance;
  Attempt a;
  for (int j = 0; j < kTransmonLevels; ++j) {
    auto& c = a.model.components[static_cast<std::size_t>(j)];
    c.weight = 1.0 / kTransmonLevels;
    c.mean = means[static_cast<std::size_t>(j)];
    c.covariance = Eigen::Matrix2d::Identity() * std::max(variance / 16.0, 10.0 * floor);
  }

  std::array<std::vector<double>, kTransmonLevels> d2;
  std::array<std::vector<double>, kTransmonLevels> logp;
  std::array<std::vector<double>, kTransmonLevels> resp;
  for (auto& r : resp) r.resize(n);
  // Components with fewer effective shots than this keep their mean and covariance.
  constexpr double kFreezeCount = 3.0;

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    component_scores(shots, a.model, d2, logp);
    double ll = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      std::array<double, kTransmonLevels> row{};
      for (int j = 0; j < kTransmonLevels; ++j) row[static_cast<std::size_t>(j)] = logp[static_cast<std::size_t>(j)][k];
      const double lse = log_sum_exp(row);
      ll += lse;
      for (int j = 0; j < kTransmonLevels; ++j) {
        resp[static_cast<std::size_t>(j)][k] = std::exp(row[static_cast<std::size_t>(j)] - lse);
      }
    }
    ll /= static_cast<double>(n);
    if (!a.history.empty()) {
      const double prev = a.history.back();
      if (ll < prev - 1e-12 * std::abs(prev)) a.monotone = false;
      a.history.push_back(ll);
      a.iterations = iter;
      if (std::abs(ll - prev) <= options.tolerance * std::max(1.0, std::abs(prev))) {
        a.converged = true;
        return a;
      }
    } else {
      a.history.push_back(ll);
    }

    for (int j = 0; j < kTransmonLevels; ++j) {
      auto& c = a.model.components[static_cast<std::size_t>(j)];
      const auto& r = resp[static_cast<std::size_t>(j)];
      const double nj = std::accumulate(r.begin(), r.end(), 0.0);
      c.weight = nj / static_cast<double>(n);
      if (nj < kFreezeCount) continue;
      Eigen::Vector2d mu = Eigen::Vector2d::Zero();
      for (std::size_t k = 0; k < n; ++k) mu += r[k] * Eigen::Vector2d(shots.i[k], shots.q[k]);
      mu /= nj;
      Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
      for (std::size_t k = 0; k < n; ++k) {
        const Eigen::Vector2d d(shots.i[k] - mu(0), shots.q[k] - mu(1));
        cov += r[k] * d * d.transpose();
      }
      cov /= nj;
      cov(0, 1) = cov(1, 0) = 0.5 * (cov(0, 1) + cov(1, 0));
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov, Eigen::EigenvaluesOnly);
      if (!(es.eigenvalues()(0) > floor)) {
        a.collapsed = true;
        return a;
      }
      c.mean = mu;
      c.covariance = cov;
    }
    const double wsum = std::accumulate(a.model.components.begin(), a.model.components.end(), 0.0,
                                        [](double s, const GaussianComponent& c) { return s + c.weight; });
    for (auto& c : a.model.components) c.weight /= wsum;
  }
  a.iterations = options.max_iterations;
  return a;
}

MixtureModel relabel_by_means(const MixtureModel& m,
                              const std::array<Eigen::Vector2d, kTransmonLevels>& targets) {
  std::array<int, kTransmonLevels> perm{0, 1, 2, 3};
  std::array<int, kTransmonLevels> best_perm = perm;
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int j = 0; j < kTransmonLevels; ++j) {
      cost += (m.components[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])].mean -
               targets[static_cast<std::size_t>(j)]).squaredNorm();
    }
    if (cost < best) {
      best = cost;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  MixtureModel out;
  for (int j = 0; j < kTransmonLevels; ++j) {
    out.components[static_cast<std::size_t>(j)] = m.components[static_cast<std::size_t>(best_perm[static_cast<std::size_t>(j)])];
  }
  return out;
}

MixtureModel relabel_by_weight(MixtureModel m) {
  std::stable_sort(m.components.begin(), m.components.end(),
                   [](const GaussianComponent& a, const GaussianComponent& b) {
                     if (a.weight != b.weight) return a.weight > b.weight;
                     return a.mean(0) < b.mean(0);
                   });
  return m;
}

}  // namespace

void ShotSet::validate() const {
  if (i.size() != q.size()) throw std::invalid_argument("shots: I/Q size mismatch");
  if (!labels.empty() && labels.size() != i.size()) throw std::invalid_argument("shots: label size mismatch");
  for (std::size_t k = 0; k < i.size(); ++k) {
    if (!std::isfinite(i[k]) || !std::isfinite(q[k])) {
      throw std::invalid_argument("shots: non-finite coordinate at index " + std::to_string(k));
    }
  }
}

double GaussianComponent::mahalanobis2(const Eigen::Vector2d& x) const {
  const Eigen::Vector2d d = x - mean;
  return d.dot(covariance.ldlt().solve(d));
}

void MixtureModel::validate() const {
  double sum = 0.0;
  for (std::size_t j = 0; j < components.size(); ++j) {
    const auto& c = components[j];
    if (!(c.weight >= 0.0 && c.weight <= 1.0)) {
      throw std::invalid_argument("mixture: weight " + std::to_string(j) + " outside [0, 1]");
    }
    sum += c.weight;
    if (std::abs(c.covariance(0, 1) - c.covariance(1, 0)) > 1e-12 * c.covariance.norm()) {
      throw std::invalid_argument("mixture: covariance " + std::to_string(j) + " not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(c.covariance, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues()(0) > 0.0)) {
      throw std::invalid_argument("mixture: covariance " + std::to_string(j) + " not positive definite");
    }
  }
  if (std::abs(sum - 1.0) > 1e-10) throw std::invalid_argument("mixture: weights must sum to 1");
}

MixtureModel MixtureModel::square(double separation, double sigma) {
  MixtureModel m;
  const std::array<Eigen::Vector2d, kTransmonLevels> means{
      Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(separation, 0.0),
      Eigen::Vector2d(separation, separation), Eigen::Vector2d(0.0, separation)};
  for (std::size_t j = 0; j < means.size(); ++j) {
    m.components[j].weight = 0.25;
    m.components[j].mean = means[j];
    m.components[j].covariance = Eigen::Matrix2d::Identity() * sigma * sigma;
  }
  return m;
}

LevelProbabilities to_probabilities(const Populations& p) { return p.p; }

ShotSet synthesize_shots(const MixtureModel& model, const LevelProbabilities& populations,
                         std::size_t n, std::uint64_t seed) {
  model.validate();
  if (n == 0) throw std::invalid_argument("synthesize_shots: n must be >= 1");
  double sum = 0.0;
  LevelProbabilities p = populations;
  for (auto& x : p) {
    if (!std::isfinite(x) || x < -1e-12) throw std::invalid_argument("synthesize_shots: invalid population");
    x = std::max(x, 0.0);
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("synthesize_shots: populations must sum to 1");

  std::array<Eigen::Matrix2d, kTransmonLevels> chol;
  for (std::size_t j = 0; j < chol.size(); ++j) {
    chol[j] = model.components[j].covariance.llt().matrixL();
  }
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> label(p.begin(), p.end());
  std::normal_distribution<double> gauss(0.0, 1.0);
  ShotSet shots;
  shots.i.reserve(n);
  shots.q.reserve(n);
  shots.labels.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int j = label(rng);
    const double z0 = gauss(rng);
    const double z1 = gauss(rng);
    const Eigen::Vector2d x =
        model.components[static_cast<std::size_t>(j)].mean + chol[static_cast<std::size_t>(j)] * Eigen::Vector2d(z0, z1);
    shots.i.push_back(x(0));
    shots.q.push_back(x(1));
    shots.labels.push_back(j);
  }
  return shots;
}

bool MixtureFit::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

MixtureFit fit_mixture(const ShotSet& shots,
                       const std::optional<std::array<Eigen::Vector2d, kTransmonLevels>>& init_means,
                       const MixtureFitOptions& options) {
  shots.validate();
  if (shots.size() < 4 * kTransmonLevels) {
    throw std::invalid_argument("fit_mixture: need at least 16 shots");
  }
  const double variance = data_variance(shots);
  if (!(variance > 0.0)) throw CovarianceCollapse("fit_mixture: shots have no spread");

  std::mt19937_64 rng(options.seed);
  for (std::size_t attempt = 0; attempt <= options.max_restarts; ++attempt) {
    const auto means = (init_means && attempt == 0) ? *init_means : seed_means(shots, rng);
    Attempt a = run_em(shots, means, variance, options);
    if (a.collapsed) continue;

    MixtureFit fit;
    fit.model = init_means ? relabel_by_means(a.model, *init_means) : relabel_by_weight(a.model);
    fit.loglik_history = std::move(a.history);
    fit.iterations = a.iterations;
    fit.restarts = attempt;
    fit.converged = a.converged;
    fit.monotone = a.monotone;
    if (!a.converged) fit.flags.push_back("not_converged");
    if (!a.monotone) fit.flags.push_back("loglik_decreased");
    if (attempt > 0) fit.flags.push_back("restarted");
    for (const auto& c : fit.model.components) {
      if (c.weight < options.degenerate_weight) {
        fit.flags.push_back("degenerate_components");
        break;
      }
    }
    return fit;
  }
  throw CovarianceCollapse("fit_mixture: covariance collapsed on every restart");
}

double mixture_log_likelihood(const ShotSet& shots, const MixtureModel& model) {
  std::array<std::vector<double>, kTransmonLevels> d2;
  std::array<std::vector<double>, kTransmonLevels> logp;
  component_scores(shots, model, d2, logp);
  double ll = 0.0;
  for (std::size_t k = 0; k < shots.size(); ++k) {
    std::array<double, kTransmonLevels> row{};
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = logp[j][k];
    ll += log_sum_exp(row);
  }
  return ll / static_cast<double>(shots.size());
}

ReadoutEstimate classify_and_estimate(const ShotSet& shots, const MixtureModel& model) {
  shots.validate();
  std::array<std::vector<double>, kTransmonLevels> d2;
  std::array<std::vector<double>, kTransmonLevels> logp;
  component_scores(shots, model, d2, logp);

  ReadoutEstimate est;
  est.assignment.assign(shots.size(), kNoLabel);
  std::size_t inside = 0;
  for (std::size_t k = 0; k < shots.size(); ++k) {
    int chosen = kNoLabel;
    for (int j = 0; j < kTransmonLevels; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      if (d2[jj][k] > 1.0) continue;
      if (chosen == kNoLabel) {
        chosen = j;
        continue;
      }
      const auto cc = static_cast<std::size_t>(chosen);
      if (logp[jj][k] > logp[cc][k] || (logp[jj][k] == logp[cc][k] && d2[jj][k] < d2[cc][k])) {
        chosen = j;
      }
    }
    if (chosen != kNoLabel) {
      ++est.counts[static_cast<std::size_t>(chosen)];
      ++inside;
    }
    est.assignment[k] = chosen;
  }
  if (inside == 0) throw std::runtime_error("classify_and_estimate: no shot inside any 1-sigma ellipse");
  for (std::size_t j = 0; j < est.counts.size(); ++j) {
    est.probabilities[j] = static_cast<double>(est.counts[j]) / static_cast<double>(inside);
  }
  est.inside_fraction = static_cast<double>(inside) / static_cast<double>(shots.size());
  return est;
}

double pexc_from_shots(const LevelProbabilities& p) {
  const double complement = 1.0 - p[0];
  const double direct = p[1] + p[2] + p[3];
  if (std::abs(complement - direct) > 1e-12) {
    throw std::logic_error("pexc_from_shots: 1 - p_g differs from p_e + p_f + p_h");
  }
  return complement;
}

}  // namespace qcr
