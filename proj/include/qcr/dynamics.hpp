#pragma once
// Time evolution d vec(rho)/dt = L vec(rho) and derived excitation measures.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "qcr/liouvillian.hpp"

namespace qcr {

// Transmon populations summed over photon number.
struct Populations {
  std::array<double, kTransmonLevels> p{};

  double operator[](TransmonLevel level) const { return p[static_cast<int>(level)]; }
  double& operator[](TransmonLevel level) { return p[static_cast<int>(level)]; }
  double sum() const { return p[0] + p[1] + p[2] + p[3]; }
  // 1 - p_g
  double pexc() const { return 1.0 - p[0]; }
};

Populations populations(const Operator& rho, const Ladder& ladder);
Populations populations(const DensityMatrix& rho, const Ladder& ladder);

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;   // Hermitized, eigen-dust clipped
  std::vector<Operator> raw_states;    // as integrated
  std::vector<Populations> populations;
  std::vector<double> pexc;
  bool used_oracle_fallback = false;
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
};

class StiffnessError : public SolverError {
 public:
  using SolverError::SolverError;
};

struct EvolveOptions {
  double rtol = 1e-8;
  double atol = 1e-12;
  std::size_t max_steps = 5'000'000;
  bool fallback_to_oracle = true;
};

// Adaptive Dormand-Prince 5(4) on vec(rho). `times` must start at 0 and be
// strictly increasing. On step-size underflow either falls back to the matrix
// exponential (default) or throws StiffnessError.
Trajectory evolve(const Superoperator& L, const DensityMatrix& rho0, const Ladder& ladder,
                  std::span<const double> times, const EvolveOptions& options = {});

// vec(rho(t)) = exp(L t) vec(rho0), scaling-and-squaring Pade.
DensityMatrix evolve_expm_oracle(const Superoperator& L, const DensityMatrix& rho0, double t);

// Same sampling as evolve() but every sample from the matrix exponential.
Trajectory oracle_trajectory(const Superoperator& L, const DensityMatrix& rho0,
                             const Ladder& ladder, std::span<const double> times);

// |P(t) - P_ss| / |P(0) - P_ss|. Throws std::domain_error when P(0) == P_ss.
std::vector<double> delta_pexc(const Trajectory& traj, double pexc_ss);
std::vector<double> delta_pexc(std::span<const double> pexc, double pexc_ss);

// First time the series drops below `threshold`, log-interpolated between the
// bracketing samples. nullopt if it never does.
std::optional<double> first_crossing(std::span<const double> times,
                                     std::span<const double> values, double threshold);

// Time after which the series stays below `threshold` for the rest of the grid.
std::optional<double> settling_time(std::span<const double> times, std::span<const double> values,
                                    double threshold);

std::vector<double> uniform_grid(double t_end, std::size_t samples = 201);

}  // namespace qcr
