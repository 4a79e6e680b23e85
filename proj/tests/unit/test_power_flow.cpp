#include <doctest.h>

#include <numbers>

#include "gridsec/error.hpp"
#include "gridsec/power_equations.hpp"
#include "gridsec/power_flow.hpp"
#include "test_support.hpp"

using namespace gridsec;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

// Published IEEE 14-bus load-flow solution (V p.u., angle deg).
const double kV[14] = {1.060, 1.045, 1.010, 1.018, 1.020, 1.070, 1.062,
                       1.090, 1.056, 1.051, 1.057, 1.055, 1.050, 1.036};
const double kTheta[14] = {0.00,   -4.98,  -12.72, -10.33, -8.78,  -14.22, -13.37,
                           -13.36, -14.94, -15.10, -14.79, -15.07, -15.16, -16.04};

}  // namespace

TEST_SUITE("power_flow") {

TEST_CASE("base case reproduces the published solution") {
  const NetworkModel m = build_ieee14();
  const PowerFlowSolution s = solve(m, topology_from_breakers(m));
  REQUIRE(s.converged);
  for (int i = 0; i < 14; ++i) {
    CAPTURE(i + 1);
    CHECK(std::abs(s.v(i) - kV[i]) < 1.5e-3);
    CHECK(std::abs(s.theta(i) * kDeg - kTheta[i]) < 0.02);
  }
  CHECK(s.losses == doctest::Approx(13.393).epsilon(1e-3));
  CHECK(s.p_inj(0) == doctest::Approx(232.39).epsilon(1e-3));
  CHECK(s.islands.size() == 1);
  CHECK(s.q_limited.empty());
  CHECK(s.max_mismatch < 1e-8);
}

TEST_CASE("injections satisfy the network equations at the solution") {
  const NetworkModel m = build_ieee14();
  const PowerFlowSolution s = solve(m, topology_from_breakers(m));
  const Eigen::MatrixXcd y = testing::reference_ybus(m);
  for (Eigen::Index i = 0; i < 14; ++i) {
    std::complex<double> current = 0.0;
    for (Eigen::Index k = 0; k < 14; ++k) current += y(i, k) * std::polar(s.v(k), s.theta(k));
    const std::complex<double> sbus = std::polar(s.v(i), s.theta(i)) * std::conj(current) * 100.0;
    CHECK(std::abs(sbus.real() - s.p_inj(i)) < 1e-6);
    CHECK(std::abs(sbus.imag() - s.q_inj(i)) < 1e-6);
  }
  // Specified injections are honoured at load buses.
  for (const Bus& b : m.buses()) {
    if (b.kind != BusKind::Load) continue;
    CHECK(std::abs(s.p_inj(b.id - 1) + b.p_load) < 1e-6);
    CHECK(std::abs(s.q_inj(b.id - 1) + b.q_load) < 1e-6);
  }
}

TEST_CASE("power balance: injections equal branch losses") {
  const NetworkModel m = build_ieee14();
  const PowerFlowSolution s = solve(m, topology_from_breakers(m));
  double losses = 0.0;
  for (const BranchFlowMw& f : s.flows) {
    CHECK(f.loss == doctest::Approx(f.p_from + f.p_to));
    CHECK(f.loss >= -1e-9);
    losses += f.loss;
  }
  CHECK(s.p_inj.sum() == doctest::Approx(losses).epsilon(1e-9));
  CHECK(s.islands[0].p_balance_mw == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("branch flow partials agree with finite differences") {
  const NetworkModel m = build_ieee14();
  const BranchAdmittance ya = branch_admittance(m.branch(m.find_branch(4, 7)));
  const double x0[4] = {-0.18, -0.23, 1.01, 1.06};
  const ac::EndFlowGradient g = ac::from_end_gradient(ya, x0[2], x0[3], x0[0], x0[1]);
  const double h = 1e-7;
  for (int k = 0; k < 4; ++k) {
    double xp[4], xm[4];
    std::copy(x0, x0 + 4, xp);
    std::copy(x0, x0 + 4, xm);
    xp[k] += h;
    xm[k] -= h;
    const auto fp = ac::branch_flow(ya, xp[2], xp[3], xp[0], xp[1]).from;
    const auto fm = ac::branch_flow(ya, xm[2], xm[3], xm[0], xm[1]).from;
    CHECK(std::abs((fp.p - fm.p) / (2 * h) - g.dp[k]) < 1e-6);
    CHECK(std::abs((fp.q - fm.q) / (2 * h) - g.dq[k]) < 1e-6);
  }
}

TEST_CASE("opening a radial branch splits off an island") {
  const NetworkModel m = build_ieee14();
  Branch br = m.branch(m.find_branch(7, 8));
  br.breaker_from = BreakerState::Open;
  const NetworkModel opened = m.with_branch(m.find_branch(7, 8), br);
  const TopologyMatrix t = topology_from_breakers(opened);
  const auto islands = decompose_islands(opened, t);
  REQUIRE(islands.size() == 2);
  CHECK(islands[1].buses == std::vector<int>{8});
  CHECK_FALSE(islands[1].has_slack);
  const PowerFlowSolution s = solve(opened, t, {.enforce_q_limits = false});
  CHECK(s.flows[m.find_branch(7, 8)].in_service == false);
  for (const Island& isl : s.islands) CHECK(std::abs(isl.p_balance_mw) < 1e-6);
}

TEST_CASE("reactive limits hold after switching") {
  NetworkModel m = build_ieee14();
  Bus b3 = m.bus(3);
  b3.q_max = 20.0;
  m = m.with_bus(b3);
  const PowerFlowSolution s = solve(m, topology_from_breakers(m));
  CHECK(s.q_limited == std::vector<int>{3});
  CHECK(s.q_inj(2) + b3.q_load == doctest::Approx(20.0).epsilon(1e-6));
  const PowerFlowSolution relaxed = solve(m, topology_from_breakers(m), {.enforce_q_limits = false});
  CHECK(relaxed.q_inj(2) + b3.q_load > 20.0);
}

TEST_CASE("fully islanded network") {
  const NetworkModel m = build_ieee14();
  std::set<std::size_t> all;
  for (std::size_t k = 0; k < m.branch_count(); ++k) all.insert(k);
  const TopologyMatrix t = apply_topology_corruption(topology_from_breakers(m), all);
  const PowerFlowSolution s = solve(m, t, {.enforce_q_limits = false});
  CHECK(s.islands.size() == 14);
  CHECK(s.losses == 0.0);
}

TEST_CASE("non-convergence raises ConvergenceError") {
  NetworkModel m = build_ieee14();
  Bus b = m.bus(14);
  b.p_load = 2000.0;
  m = m.with_bus(b);
  CHECK_THROWS_AS(solve(m, topology_from_breakers(m)), ConvergenceError);
}

}
