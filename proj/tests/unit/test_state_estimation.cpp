#include <doctest.h>

#include <random>

#include "gridsec/chi_square.hpp"
#include "gridsec/error.hpp"
#include "gridsec/measurement.hpp"
#include "gridsec/state_estimation.hpp"
#include "test_support.hpp"

using namespace gridsec;

namespace {

struct Fixture {
  NetworkModel model = build_ieee14();
  TopologyMatrix topo = topology_from_breakers(model);
  PowerFlowSolution pf = solve(model, topo);
  StateVector truth = testing::state_of(pf);
};

}  // namespace

TEST_SUITE("state_estimation") {

TEST_CASE("noiseless round trip recovers the power-flow state") {
  Fixture f;
  for (const bool full : {true, false}) {
    CAPTURE(full);
    const MeasurementSet layout = full ? full_measurement_layout(f.model) : bus_measurement_layout(f.model);
    const MeasurementSet z = measure(f.model, f.topo, f.truth, layout);
    const EstimationResult r = wls_estimate_ac(f.model, z);
    REQUIRE(r.converged);
    CHECK((r.x_hat.v - f.truth.v).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((r.x_hat.theta - f.truth.theta).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(r.j_value < 1e-10);
  }
}

TEST_CASE("measurement model Jacobian agrees with finite differences") {
  Fixture f;
  const MeasurementSet layout = full_measurement_layout(f.model);
  const AcMeasurementModel h(f.model, f.topo, layout.entries);
  const Eigen::MatrixXd j = h.jacobian(f.truth);
  REQUIRE(j.rows() == static_cast<Eigen::Index>(layout.size()));
  REQUIRE(j.cols() == 27);
  const Eigen::VectorXd x0 = f.truth.packed();
  const double step = 1e-7;
  for (Eigen::Index c = 0; c < x0.size(); ++c) {
    StateVector xp = f.truth;
    StateVector xm = f.truth;
    Eigen::VectorXd dp = x0;
    Eigen::VectorXd dm = x0;
    dp(c) += step;
    dm(c) -= step;
    xp.unpack(dp);
    xm.unpack(dm);
    const Eigen::VectorXd fd = (h.evaluate(xp) - h.evaluate(xm)) / (2 * step);
    CHECK((fd - j.col(c)).cwiseAbs().maxCoeff() < 1e-5);
  }
}

TEST_CASE("J is chi-square distributed under Gaussian noise") {
  Fixture f;
  const MeasurementSet clean = measure(f.model, f.topo, f.truth, full_measurement_layout(f.model));
  const int df = static_cast<int>(clean.size()) - 27;
  std::mt19937_64 rng(11);
  double sum = 0.0;
  int flagged = 0;
  const int trials = 200;
  const double tau = chi_square_threshold(df, 0.05);
  for (int t = 0; t < trials; ++t) {
    MeasurementSet z = clean;
    add_gaussian_noise(z, rng);
    const EstimationResult r = wls_estimate_ac(f.model, z);
    sum += r.j_value;
    flagged += r.j_value > tau;
  }
  // mean df, sd sqrt(2 df / trials)
  CHECK(std::abs(sum / trials - df) < 4.0 * std::sqrt(2.0 * df / trials));
  CHECK(flagged < 25);
}

TEST_CASE("DC estimate satisfies the normal equations") {
  Fixture f;
  const DcModel dc = dc_measurement_matrix(f.model, f.topo);
  CHECK(dc.h.rows() == 34);
  CHECK(dc.h.cols() == 13);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd sigma(dc.h.rows());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) sigma(i) = 0.01 + 0.01 * (i % 3);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(13);
    for (Eigen::Index i = 0; i < 13; ++i) x(i) = 0.2 * nd(rng);
    Eigen::VectorXd z = dc.h * x;
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) += sigma(i) * nd(rng);
    const LinearEstimate e = wls_estimate_dc(dc.h, z, sigma);
    const Eigen::VectorXd w = sigma.array().square().inverse();
    const Eigen::VectorXd g = dc.h.transpose() * (w.asDiagonal() * e.residuals);
    CHECK(g.cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, (dc.h.transpose() * w.asDiagonal() * z).norm()));
    CHECK(e.j_value == doctest::Approx(chi_square_statistic(e.residuals, sigma)));
  }
}

TEST_CASE("rank-deficient measurement sets are unobservable") {
  Eigen::MatrixXd h(3, 2);
  h << 1, 2, 2, 4, 3, 6;
  CHECK_THROWS_AS(wls_estimate_dc(h, Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(3)), ObservabilityError);
  Fixture f;
  MeasurementSet only_v;
  for (const Measurement& m : bus_measurement_layout(f.model).entries) {
    if (m.kind == MeasurementKind::Vm) only_v.entries.push_back(m);
  }
  CHECK_THROWS_AS(wls_estimate_ac(f.model, measure(f.model, f.topo, f.truth, only_v)), ObservabilityError);
}

TEST_CASE("largest normalized residual points at a planted error") {
  Fixture f;
  const MeasurementSet clean = measure(f.model, f.topo, f.truth, full_measurement_layout(f.model));
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    MeasurementSet z = clean;
    add_gaussian_noise(z, rng);
    const std::size_t planted = rng() % z.size();
    z.entries[planted].value += 25.0 * z.entries[planted].sigma;
    const EstimationResult r = wls_estimate_ac(f.model, z);
    Eigen::Index worst = 0;
    r.normalized_residuals().maxCoeff(&worst);
    CHECK(static_cast<std::size_t>(worst) == planted);
    const BddVerdict v = bdd_classify(r, chi_square_threshold(static_cast<int>(z.size()) - 27, 0.05));
    CHECK(v.flagged);
    REQUIRE(v.suspect.has_value());
    CHECK(*v.suspect == planted);
  }
}

TEST_CASE("iterative removal drops the planted error first") {
  Fixture f;
  const MeasurementSet clean = measure(f.model, f.topo, f.truth, full_measurement_layout(f.model));
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    MeasurementSet z = clean;
    add_gaussian_noise(z, rng);
    const std::size_t planted = rng() % z.size();
    z.entries[planted].value -= 20.0 * z.entries[planted].sigma;
    const BadDataRemoval b = iterative_bad_data_removal(
        f.model, z, [](int df) { return chi_square_threshold(df, 0.05); });
    REQUIRE_FALSE(b.removed.empty());
    CHECK(b.removed.front() == planted);
    CHECK(b.remaining.size() == z.size() - b.removed.size());
  }
}

TEST_CASE("measurement CSV round trip and labels") {
  Fixture f;
  const MeasurementSet z = measure(f.model, f.topo, f.truth, full_measurement_layout(f.model));
  const MeasurementSet back = measurements_from_csv(measurements_to_csv(z, f.model), f.model);
  REQUIRE(back.size() == z.size());
  CHECK((back.values() - z.values()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(measurement_label(z.entries[0], f.model) == "Vm@1");
  const auto k = f.model.find_branch(2, 4);
  Measurement m;
  m.kind = MeasurementKind::Pflow;
  m.branch = k;
  m.end = BranchEnd::To;
  CHECK(measurement_label(m, f.model) == "Pflow@4-2");
  CHECK_THROWS_AS(measurements_from_csv("kind,location,value,sigma\nVm,99,1.0,0.01\n", f.model), Error);
}

}
