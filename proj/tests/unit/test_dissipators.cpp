#include <catch_amalgamated.hpp>

#include <cmath>

#include "qcr/dissipators.hpp"

using namespace qcr;
using enum TransmonLevel;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Complex at(const Operator& op, const Ladder& l, LevelKey a, LevelKey b) {
  return op(static_cast<Eigen::Index>(*l.index_of(a)), static_cast<Eigen::Index>(*l.index_of(b)));
}

}  // namespace

TEST_CASE("ten-level set has eleven operators") {
  const SystemParams p = SystemParams::table1();
  const Ladder l = build_ladder(Truncation::ten, p);
  const auto list = build_dissipators(l, p, QcrState::off);
  CHECK(list.size() == 11);
  for (const char* name : {"emission_eg", "emission_fe", "emission_hf", "emission_r", "absorption_eg",
                           "absorption_fe", "absorption_hf", "absorption_r", "dephasing_eg",
                           "dephasing_fe", "dephasing_hf"}) {
    CHECK(find_dissipator(list, name) != nullptr);
  }
  CHECK(find_dissipator(list, "nothing") == nullptr);
}

TEST_CASE("resonator lowering carries sqrt(n) factors") {
  const SystemParams p = SystemParams::table1();
  const Ladder l = build_ladder(Truncation::ten, p);
  const auto list = build_dissipators(l, p, QcrState::off);
  const Operator& a = find_dissipator(list, "emission_r")->jump;
  CHECK_THAT(at(a, l, {g, 2}, {g, 3}).real(), WithinAbs(std::sqrt(3.0), 1e-15));
  CHECK_THAT(at(a, l, {g, 1}, {g, 2}).real(), WithinAbs(std::sqrt(2.0), 1e-15));
  CHECK(at(a, l, {g, 0}, {g, 1}) == Complex(1.0, 0.0));
  CHECK(at(a, l, {f, 0}, {f, 1}) == Complex(1.0, 0.0));
  const Operator& up = find_dissipator(list, "absorption_r")->jump;
  CHECK((up - a.adjoint()).isZero(0.0));
}

TEST_CASE("rates follow the selected convention") {
  SystemParams p = SystemParams::table1();
  const Ladder l = build_ladder(Truncation::ten, p);
  auto list = build_dissipators(l, p, QcrState::on);
  const double kappa = p.decay.on.kappa;
  CHECK(find_dissipator(list, "emission_r")->rate == kappa);
  CHECK_THAT(find_dissipator(list, "absorption_r")->rate, WithinRel(kappa * 0.15 / 1.15, 1e-15));
  CHECK_THAT(find_dissipator(list, "dephasing_fe")->rate, WithinRel(0.5 * 4.0 * p.decay.on.fe, 1e-15));

  p.convention = RateConvention::occupation_scaled;
  list = build_dissipators(l, p, QcrState::on);
  CHECK_THAT(find_dissipator(list, "emission_r")->rate, WithinRel(kappa * 1.15, 1e-15));
  CHECK_THAT(find_dissipator(list, "absorption_r")->rate, WithinRel(kappa * 0.15, 1e-15));
}

TEST_CASE("cold bath removes absorption but keeps the operators") {
  const SystemParams p = with_cold_bath(SystemParams::table1());
  const Ladder l = build_ladder(Truncation::ten, p);
  const auto list = build_dissipators(l, p, QcrState::off);
  CHECK(list.size() == 11);
  for (const auto& d : list) {
    if (d.channel == Channel::absorption) CHECK(d.rate == 0.0);
    if (d.channel == Channel::emission) CHECK(d.rate > 0.0);
  }
}

TEST_CASE("four-level truncation drops out-of-basis terms") {
  const SystemParams p = SystemParams::table1();
  const Ladder l = build_ladder(Truncation::four, p);
  const auto list = build_dissipators(l, p, QcrState::off);
  CHECK(find_dissipator(list, "emission_hf") == nullptr);
  const Operator& a = find_dissipator(list, "emission_r")->jump;
  Operator want = Operator::Zero(4, 4);
  want(0, 2) = 1.0;  // |g0><g1|
  CHECK((a - want).isZero(0.0));
  for (const auto& d : list) CHECK(d.jump.rows() == 4);
}

TEST_CASE("dephasing operators are Hermitian projector differences") {
  const SystemParams p = SystemParams::table1();
  const Ladder l = build_ladder(Truncation::ten, p);
  const auto list = build_dissipators(l, p, QcrState::off);
  const Operator& z = find_dissipator(list, "dephasing_eg")->jump;
  CHECK(is_hermitian(z));
  CHECK(at(z, l, {e, 2}, {e, 2}) == Complex(1.0, 0.0));
  CHECK(at(z, l, {g, 3}, {g, 3}) == Complex(-1.0, 0.0));
  CHECK(at(z, l, {f, 0}, {f, 0}) == Complex(0.0, 0.0));
}
