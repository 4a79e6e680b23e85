#include <doctest.h>

#include <map>
#include <random>

#include "gridsec/attack_forge.hpp"
#include "gridsec/error.hpp"
#include "test_support.hpp"

using namespace gridsec;

namespace {

using Channel = std::pair<MeasurementKind, int>;

std::map<Channel, double> components(const AttackVector& a, const MeasurementSet& layout) {
  std::map<Channel, double> out;
  for (const AttackComponent& c : attack_components(a, layout)) out[{c.kind, c.bus}] = c.delta;
  return out;
}

}  // namespace

TEST_SUITE("attack_forge") {

TEST_CASE("scenario 1A vector") {
  const MeasurementSet layout = bus_measurement_layout(build_ieee14());
  const AttackVector a = build_scenario_1a(layout);
  const std::map<Channel, double> want = {
      {{MeasurementKind::Vm, 3}, 0.08},       {{MeasurementKind::Pinj, 3}, 0.15},
      {{MeasurementKind::Vm, 6}, -0.06},      {{MeasurementKind::Pinj, 9}, 0.10},
      {{MeasurementKind::Vm, 11}, 0.05},      {{MeasurementKind::Pinj, 2}, -0.0357},
      {{MeasurementKind::Pinj, 4}, -0.0357},  {{MeasurementKind::Pinj, 5}, -0.0357},
      {{MeasurementKind::Pinj, 10}, -0.0357}, {{MeasurementKind::Pinj, 12}, -0.0357},
      {{MeasurementKind::Pinj, 13}, -0.0357}, {{MeasurementKind::Pinj, 14}, -0.0357}};
  CHECK(components(a, layout) == want);
  double net = 0.0;
  for (const auto& [ch, d] : want) net += ch.first == MeasurementKind::Pinj ? d : 0.0;
  CHECK(net == doctest::Approx(0.25 - 7 * 0.0357).epsilon(1e-12));
  CHECK(provenance_name(a.provenance) == "scenario_1a");
}

TEST_CASE("scenario 1B vector and masking noise") {
  const MeasurementSet layout = bus_measurement_layout(build_ieee14());
  const AttackVector a = build_scenario_1b(layout);
  const std::map<Channel, double> want = {
      {{MeasurementKind::Vm, 2}, 0.09},   {{MeasurementKind::Pinj, 2}, 0.15},
      {{MeasurementKind::Vm, 4}, -0.07},  {{MeasurementKind::Pinj, 4}, -0.13},
      {{MeasurementKind::Vm, 6}, 0.08},   {{MeasurementKind::Pinj, 9}, 0.12},
      {{MeasurementKind::Vm, 11}, -0.06}, {{MeasurementKind::Pinj, 13}, -0.10}};
  CHECK(components(a, layout) == want);

  const AttackVector n1 = build_scenario_1b(layout, {.noise_seed = 9, .noise_amplitude = 0.005});
  const AttackVector n2 = build_scenario_1b(layout, {.noise_seed = 9, .noise_amplitude = 0.005});
  CHECK(n1.deltas == n2.deltas);
  const Eigen::VectorXd noise = n1.deltas - a.deltas;
  CHECK(noise.cwiseAbs().maxCoeff() <= 0.005);
  for (const AttackComponent& c : attack_components(AttackVector{noise, {}}, layout)) {
    const auto& buses = scenario_1b_noise_buses();
    CHECK(std::find(buses.begin(), buses.end(), c.bus) != buses.end());
    CHECK(c.kind != MeasurementKind::Qinj);
  }
}

TEST_CASE("a = Hc leaves DC residuals unchanged and shifts the estimate by c") {
  const NetworkModel m = build_ieee14();
  const DcModel dc = dc_measurement_matrix(m, topology_from_breakers(m));
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd(0.0, 1.0);
  const Eigen::VectorXd sigma = Eigen::VectorXd::Constant(dc.h.rows(), 0.01);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::VectorXd x(dc.h.cols()), c(dc.h.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x(i) = 0.2 * nd(rng);
      c(i) = 0.05 * nd(rng);
    }
    Eigen::VectorXd z = dc.h * x;
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) += 0.01 * nd(rng);
    const AttackVector a = stealth_from_state_delta(dc.h, c);
    const LinearEstimate before = wls_estimate_dc(dc.h, z, sigma);
    const LinearEstimate after = wls_estimate_dc(dc.h, z + a.deltas, sigma);
    CHECK((after.residuals - before.residuals).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((after.x_hat - before.x_hat - c).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(stealth_from_state_delta(dc.h, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("AC stealth vector keeps noiseless residuals at zero") {
  const NetworkModel m = build_ieee14();
  const TopologyMatrix t = topology_from_breakers(m);
  const StateVector x = testing::state_of(solve(m, t));
  const MeasurementSet layout = full_measurement_layout(m);
  const MeasurementSet z = measure(m, t, x, layout);
  StateDelta c = StateDelta::zero(14);
  c.dv(4) = 0.01;
  c.dtheta(8) = 0.5;
  const AttackVector a = stealth_from_state_delta(m, t, layout, x, c);
  const EstimationResult r = wls_estimate_ac(m, apply_attack(z, a));
  CHECK(r.j_value < 1e-10);
  CHECK(r.x_hat.v(4) == doctest::Approx(x.v(4) + 0.01).epsilon(1e-8));
  StateDelta bad = StateDelta::zero(14);
  bad.dtheta(0) = 1.0;
  CHECK_THROWS_AS(stealth_from_state_delta(m, t, layout, x, bad), ModelError);
}

TEST_CASE("applying an attack to a record scales power by the base") {
  const NetworkModel m = build_ieee14();
  const MeasurementSet layout = bus_measurement_layout(m);
  const FixtureRecord base = testing::fixture("s1a_baseline.csv");
  const FixtureRecord out = apply_attack_to_record(base, build_scenario_1a(layout), layout, 100.0);
  CHECK(out.bus(3).v_pu == doctest::Approx(1.09));
  CHECK(out.bus(3).p_mw == doctest::Approx(-93.99 + 15.0));
  CHECK(out.bus(14).p_mw == doctest::Approx(base.bus(14).p_mw - 3.57));
  CHECK(out.bus(1) == base.bus(1));
}

TEST_CASE("attack JSON round trip") {
  const NetworkModel m = build_ieee14();
  const MeasurementSet layout = bus_measurement_layout(m);
  const AttackVector a = build_scenario_1b(layout, {.noise_seed = 3, .noise_amplitude = 0.005});
  const AttackVector back = attack_from_json(attack_to_json(a, layout, m), layout, m);
  CHECK((back.deltas - a.deltas).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(attack_from_json("{\"components\":[{\"channel\":\"Vm@40\",\"delta\":1}]}", layout, m),
                  ParseError);
}

TEST_CASE("post-SE manipulation") {
  const NetworkModel m = build_ieee14();
  const FixtureRecord base = testing::fixture("postse_baseline.csv");
  StateDelta d = StateDelta::zero(14);
  d.dv(3) = 0.0073;
  d.dtheta(3) = 1.89;
  d.dp(3) = 95.6;
  const ManipulationResult r = manipulate_state_vector(base, d, m);
  CHECK(r.original == base);
  CHECK(r.corrupted.bus(4).v_pu == doctest::Approx(0.9979));
  CHECK(r.corrupted.bus(4).theta_deg == doctest::Approx(-9.04));
  CHECK(r.corrupted.bus(4).p_mw == doctest::Approx(47.8));
  // Branches away from bus 4 keep their stored flows.
  CHECK(r.corrupted.find_branch(1, 2)->p_mw == base.find_branch(1, 2)->p_mw);
  CHECK(r.corrupted.find_branch(3, 4)->p_mw != base.find_branch(3, 4)->p_mw);
  StateDelta slack = StateDelta::zero(14);
  slack.dv(0) = 0.01;
  CHECK_THROWS_AS(manipulate_state_vector(base, slack, m), ModelError);

  const StateDelta j = state_delta_from_json(state_delta_to_json(d), 14);
  CHECK(j.dv == d.dv);
  CHECK(j.dp == d.dp);
  CHECK_THROWS_AS(state_delta_from_json("{\"buses\":[{\"bus\":15}]}", 14), ParseError);
}

TEST_CASE("topology corruption flips both breakers and keeps flows") {
  const FixtureRecord base = testing::fixture("postse_baseline.csv");
  const FixtureRecord out = corrupt_topology_record(base, {{2, 4}});
  const BranchRow* br = out.find_branch(2, 4);
  CHECK(br->status_from == BreakerState::Open);
  CHECK(br->status_to == BreakerState::Open);
  CHECK(br->p_mw == base.find_branch(2, 4)->p_mw);
  CHECK(corrupt_topology_record(out, {{4, 2}}) == base);
  CHECK_THROWS_AS(corrupt_topology_record(base, {{1, 14}}), ModelError);
}

}
