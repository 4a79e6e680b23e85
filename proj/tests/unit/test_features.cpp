#include <doctest.h>

#include <random>

#include "gridsec/features.hpp"
#include "gridsec/scenario_catalog.hpp"
#include "test_support.hpp"

using namespace gridsec;

namespace {

std::vector<FixtureRecord> catalog_records() {
  std::vector<FixtureRecord> out;
  for (const ScenarioOutcome& o : run_scenarios(build_ieee14(), scenario_catalog(), 1)) {
    if (o.ok()) out.push_back(*o.record);
  }
  return out;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("layout and direct channels") {
  const FixtureRecord r = testing::fixture("postse_baseline.csv");
  const FeatureVector f = extract_features(r);
  REQUIRE(f.values.size() == 71);
  CHECK(FeatureVector::names().size() == 71);
  CHECK(FeatureVector::names()[FeatureBlocks::correlation] == "rho_VP");
  CHECK(FeatureVector::names().back() == "dV13_14");
  CHECK(f.v(4) == r.bus(4).v_pu);
  CHECK(f.p(3) == doctest::Approx(r.bus(3).p_mw / 100.0));
  CHECK(f.q(14) == doctest::Approx(r.bus(14).q_mvar / 100.0));
  for (int k = 1; k <= 13; ++k) CHECK(f.gradient(k) == doctest::Approx(r.bus(k + 1).v_pu - r.bus(k).v_pu));
  const Eigen::VectorXd corr = f.block(FeatureBlocks::correlation, 3);
  CHECK(corr.cwiseAbs().maxCoeff() <= 1.0);
  // P_imbalance is sum(P) minus recorded losses, zero for a balanced snapshot.
  CHECK(f.values(FeatureBlocks::physics + 4) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("pearson agrees with the textbook formula") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd a(14), b(14);
    for (int i = 0; i < 14; ++i) {
      a(i) = nd(rng);
      b(i) = 0.5 * a(i) + nd(rng);
    }
    double ma = a.mean(), mb = b.mean(), sab = 0, saa = 0, sbb = 0;
    for (int i = 0; i < 14; ++i) {
      sab += (a(i) - ma) * (b(i) - mb);
      saa += (a(i) - ma) * (a(i) - ma);
      sbb += (b(i) - mb) * (b(i) - mb);
    }
    CHECK(pearson(a, b) == doctest::Approx(sab / std::sqrt(saa * sbb)).epsilon(1e-12));
  }
  CHECK(pearson(Eigen::VectorXd::Ones(5), Eigen::VectorXd::LinSpaced(5, 0, 1)) == 0.0);
}

TEST_CASE("feature chi-square is invariant to MW versus p.u. units") {
  const std::vector<FixtureRecord> recs = catalog_records();
  REQUIRE(recs.size() >= 20);
  std::vector<FeatureVector> pu, mw;
  for (const FixtureRecord& r : recs) {
    pu.push_back(extract_features(r, 100.0));
    mw.push_back(extract_features(r, 1.0));
  }
  const BaselineStats bp = fit_baseline(pu);
  const BaselineStats bm = fit_baseline(mw);
  CHECK(bp.lambda == doctest::Approx(bm.lambda).epsilon(1e-9));
  for (const char* name : {"s1b_attacked.csv", "scenario_2a.csv", "postse_baseline.csv"}) {
    const FixtureRecord r = testing::fixture(name);
    CAPTURE(name);
    const double a = feature_chi_square(extract_features(r, 100.0), bp);
    const double b = feature_chi_square(extract_features(r, 1.0), bm);
    CHECK(a == doctest::Approx(b).epsilon(1e-6));
  }
}

TEST_CASE("regularized baseline is well conditioned and scores its own mean at zero") {
  const std::vector<FixtureRecord> recs = catalog_records();
  std::vector<FeatureVector> fs;
  for (const FixtureRecord& r : recs) fs.push_back(extract_features(r));
  const BaselineStats b = fit_baseline(fs, {}, {.max_condition = 1e6, .min_lambda = 1e-6, .threshold_factor = 1.1});
  CHECK(b.lambda >= 1e-6);
  CHECK(feature_chi_square(FeatureVector{b.mu}, b) < 1e-9);
  const Eigen::VectorXd d = b.sigma.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd corr = d.asDiagonal() * b.sigma * d.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  CHECK(eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff() <= 1e6 * (1 + 1e-6));
  CHECK(b.threshold == doctest::Approx(1.1 * b.max_training_chi2));
  for (const FeatureVector& f : fs) CHECK(feature_chi_square(f, b) <= b.max_training_chi2 + 1e-9);

  const BaselineStats back = BaselineStats::from_json(b.to_json());
  CHECK((back.sigma - b.sigma).cwiseAbs().maxCoeff() < 1e-12 * b.sigma.cwiseAbs().maxCoeff());
  CHECK_THROWS(fit_baseline({fs.front()}));
}

TEST_CASE("scenario 1B snapshot exceeds the normal-operation threshold") {
  std::vector<FeatureVector> fs;
  for (const FixtureRecord& r : catalog_records()) fs.push_back(extract_features(r));
  const BaselineStats b = fit_baseline(fs);
  CHECK(feature_chi_square(extract_features(testing::fixture("s1b_attacked.csv")), b) > b.threshold);
}

}
