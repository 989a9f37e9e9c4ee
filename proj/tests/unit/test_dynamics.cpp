#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qcr/dynamics.hpp"

using namespace qcr;
using enum TransmonLevel;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

DriveParams config_b() {
  DriveParams d;
  d.omega_ef = hz_to_angular(1.43e6);
  d.omega_f0g1 = hz_to_angular(1.16e6);
  d.deltas = {{{e, 0}, hz_to_angular(-2.0e6)}, {{g, 1}, hz_to_angular(0.8e6)},
              {{f, 0}, hz_to_angular(-1.2e6)}};
  return d;
}

DriveParams config_d() {
  DriveParams d;
  d.omega_ef = hz_to_angular(2.29e6);
  d.omega_f0g1 = hz_to_angular(1.73e6);
  d.deltas = {{{e, 0}, hz_to_angular(-2.0e6)}, {{g, 1}, hz_to_angular(0.8e6)},
              {{f, 0}, hz_to_angular(-1.6e6)}};
  return d;
}

double max_population_gap(const Trajectory& a, const Trajectory& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.populations.size(); ++k) {
    for (int j = 0; j < kTransmonLevels; ++j) {
      worst = std::max(worst, std::abs(a.populations[k].p[j] - b.populations[k].p[j]));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("populations sum over photon number") {
  const Ladder l = build_ladder(Truncation::ten, SystemParams::table1());
  const Populations mixed = populations(DensityMatrix::maximally_mixed(10), l);
  CHECK_THAT(mixed[g], WithinAbs(0.4, 1e-15));
  CHECK_THAT(mixed[e], WithinAbs(0.3, 1e-15));
  CHECK_THAT(mixed[f], WithinAbs(0.2, 1e-15));
  CHECK_THAT(mixed[h], WithinAbs(0.1, 1e-15));
  const Populations f1 = populations(DensityMatrix::pure(10, *l.index_of(f, 1)), l);
  CHECK(f1.p == std::array<double, 4>{0.0, 0.0, 1.0, 0.0});
  CHECK(f1.pexc() == 1.0);
  CHECK_THROWS_AS(populations(DensityMatrix::pure(4, 0), l), std::invalid_argument);
}

TEST_CASE("single-channel decay follows exp(-gamma t)") {
  SystemParams p = with_cold_bath(SystemParams::table1());
  p.decay.off.fe = p.decay.off.hf = p.decay.off.kappa = 0.0;
  p.dephasing.off = {};
  const Ladder l = build_ladder(Truncation::four, p);
  const Superoperator L = build_generator(l, p, QcrState::off, DriveParams{});
  const double gamma = p.decay.off.eg;
  const auto times = uniform_grid(3.0 / gamma, 61);
  const Trajectory tr = evolve(L, DensityMatrix::pure(4, *l.index_of(e, 0)), l, times);
  CHECK_FALSE(tr.used_oracle_fallback);
  for (std::size_t k = 0; k < times.size(); ++k) {
    CHECK_THAT(tr.populations[k][e], WithinAbs(std::exp(-gamma * times[k]), 1e-6));
  }
  const DensityMatrix at_tau = evolve_expm_oracle(L, DensityMatrix::pure(4, 1), 1.0 / gamma);
  CHECK_THAT(populations(at_tau, l)[e], WithinAbs(std::exp(-1.0), 1e-10));
}

TEST_CASE("oracle with a zero generator returns the initial state") {
  const Superoperator L(2, Eigen::MatrixXcd::Zero(4, 4));
  Operator rho(2, 2);
  rho << 0.3, Complex(0.1, 0.2), Complex(0.1, -0.2), 0.7;
  const DensityMatrix out = evolve_expm_oracle(L, DensityMatrix(rho), 1.0e3);
  CHECK((out.matrix() - rho).norm() == 0.0);
}

TEST_CASE("integrator agrees with the matrix exponential for every configuration") {
  const SystemParams p = SystemParams::table1();
  const Ladder l = build_ladder(Truncation::ten, p);
  const std::vector<Pulse> to_e{Pulse::pi_ge};
  const std::vector<Pulse> to_f{Pulse::pi_ge, Pulse::pi_ef};
  const auto times = uniform_grid(2e-6, 41);
  struct Case {
    QcrState state;
    DriveParams drive;
  };
  const Case cases[] = {{QcrState::off, {}}, {QcrState::off, config_b()}, {QcrState::on, {}},
                        {QcrState::on, config_d()}};
  for (const auto& c : cases) {
    const Superoperator L = build_generator(l, p, c.state, c.drive);
    const DensityMatrix th = thermal_state(l, p.temperature);
    for (const auto& pulses : {to_e, to_f}) {
      const DensityMatrix rho0 = prepare_initial_state(th, l, pulses);
      const Trajectory fast = evolve(L, rho0, l, times);
      const Trajectory slow = oracle_trajectory(L, rho0, l, times);
      CHECK(max_population_gap(fast, slow) < 1e-6);
      for (std::size_t k = 0; k < times.size(); ++k) {
        CHECK_THAT(fast.populations[k].sum(), WithinAbs(1.0, 1e-8));
        CHECK(fast.pexc[k] == 1.0 - fast.populations[k][g]);
        CHECK(fast.states[k].min_eigenvalue() > -1e-8);
      }
    }
  }
}

TEST_CASE("config D settles within a few hundred nanoseconds") {
  const SystemParams p = SystemParams::table1();
  const Ladder l = build_ladder(Truncation::ten, p);
  const Superoperator L = build_generator(l, p, QcrState::on, config_d());
  const std::vector<Pulse> to_f{Pulse::pi_ge, Pulse::pi_ef};
  const DensityMatrix rho0 = prepare_initial_state(thermal_state(l, p.temperature), l, to_f);
  const auto times = uniform_grid(2e-6, 201);
  const Trajectory tr = evolve(L, rho0, l, times);
  const double pss = steady_state_pexc(L, l, p.decay.on.kappa);
  const auto delta = delta_pexc(tr, pss);
  CHECK(delta.front() == 1.0);
  // order-of-magnitude check on the stabilization time
  const auto t = first_crossing(times, delta, std::exp(-1.0));
  REQUIRE(t.has_value());
  CHECK(*t > 50e-9);
  CHECK(*t < 2e-6);
}

TEST_CASE("config B holds more excitation than config A at late times") {
  const SystemParams p = SystemParams::table1();
  const Ladder l = build_ladder(Truncation::ten, p);
  const DensityMatrix th = thermal_state(l, p.temperature);
  const auto times = uniform_grid(60e-6, 31);
  const Trajectory a = evolve(build_generator(l, p, QcrState::off, {}), th, l, times);
  const Trajectory b = evolve(build_generator(l, p, QcrState::off, config_b()), th, l, times);
  CHECK(b.pexc.back() > a.pexc.back());
}

TEST_CASE("crossing times on a toy exponential") {
  const double tau = 2.5e-6;
  const auto times = uniform_grid(30e-6, 3001);
  std::vector<double> values;
  for (const double t : times) values.push_back(std::exp(-t / tau));
  const auto first = first_crossing(times, values, 1e-3);
  REQUIRE(first.has_value());
  CHECK_THAT(*first, WithinRel(tau * std::log(1000.0), 1e-9));
  CHECK_THAT(*settling_time(times, values, 1e-3), WithinRel(tau * std::log(1000.0), 1e-9));
  CHECK_FALSE(first_crossing(times, values, 1e-20).has_value());

  std::vector<double> bounce{1.0, 1e-4, 1e-2, 1e-5};
  const std::vector<double> grid{0.0, 1.0, 2.0, 3.0};
  CHECK(*first_crossing(grid, bounce, 1e-3) < 1.0);
  CHECK(*settling_time(grid, bounce, 1e-3) > 2.0);
}

TEST_CASE("degenerate start is flagged") {
  const std::vector<double> flat{0.2, 0.2, 0.2};
  CHECK_THROWS_AS(delta_pexc(flat, 0.2), std::domain_error);
  const std::vector<double> moving{0.4, 0.3, 0.2};
  const auto d = delta_pexc(moving, 0.2);
  CHECK(d.front() == 1.0);
  CHECK_THAT(d[1], WithinAbs(0.5, 1e-15));
}

TEST_CASE("time grid validation and stiffness handling") {
  const SystemParams p = SystemParams::table1();
  const Ladder l = build_ladder(Truncation::four, p);
  const Superoperator L = build_generator(l, p, QcrState::on, config_d());
  const DensityMatrix rho0 = DensityMatrix::pure(4, 3);
  const std::vector<double> late{1e-9, 2e-9};
  CHECK_THROWS_AS(evolve(L, rho0, l, late), std::invalid_argument);
  const std::vector<double> backwards{0.0, 2e-9, 1e-9};
  CHECK_THROWS_AS(evolve(L, rho0, l, backwards), std::invalid_argument);

  const auto times = uniform_grid(5e-6, 11);
  EvolveOptions strict;
  strict.max_steps = 3;
  strict.fallback_to_oracle = false;
  CHECK_THROWS_AS(evolve(L, rho0, l, times, strict), StiffnessError);
  EvolveOptions fallback = strict;
  fallback.fallback_to_oracle = true;
  const Trajectory tr = evolve(L, rho0, l, times, fallback);
  CHECK(tr.used_oracle_fallback);
  CHECK(max_population_gap(tr, oracle_trajectory(L, rho0, l, times)) < 1e-6);
}

TEST_CASE("QCR speeds up undriven decay") {
  const SystemParams p = SystemParams::table1();
  const Ladder l = build_ladder(Truncation::ten, p);
  const std::vector<Pulse> to_e{Pulse::pi_ge};
  const DensityMatrix rho0 = prepare_initial_state(thermal_state(l, p.temperature), l, to_e);
  const auto times = uniform_grid(40e-6, 401);
  double crossing[2];
  for (const QcrState s : {QcrState::off, QcrState::on}) {
    const Superoperator L = build_generator(l, p, s, {});
    const Trajectory tr = evolve(L, rho0, l, times);
    const auto d = delta_pexc(tr, steady_state_pexc(L, l, p.decay[s].kappa));
    crossing[s == QcrState::on] = *first_crossing(times, d, std::exp(-1.0));
  }
  CHECK(crossing[1] < crossing[0]);
}
