#include <doctest.h>

#include <cmath>
#include <utility>

#include "gridsec/chi_square.hpp"

using namespace gridsec;

TEST_SUITE("chi_square") {

TEST_CASE("upper 5% quantiles match the standard table") {
  // Standard table values.
  const std::pair<int, double> table[] = {
      {1, 3.841459}, {2, 5.991465}, {3, 7.814728}, {10, 18.307038},
      {15, 24.995790}, {21, 32.670573}, {30, 43.772972}, {71, 91.670239}, {100, 124.342113}};
  for (const auto& [df, q] : table) {
    CAPTURE(df);
    CHECK(chi_square_threshold(df, 0.05) == doctest::Approx(q).epsilon(1e-6));
  }
  CHECK(chi_square_threshold(10, 0.01) == doctest::Approx(23.209251).epsilon(1e-6));
}

TEST_CASE("threshold inverts the CDF") {
  for (int df = 1; df <= 300; df += 7) {
    for (const double alpha : {0.001, 0.01, 0.05, 0.2, 0.5}) {
      const double tau = chi_square_threshold(df, alpha);
      CHECK(chi_square_cdf(tau, df) == doctest::Approx(1.0 - alpha).epsilon(1e-9));
    }
  }
}

TEST_CASE("threshold grows with df and shrinks with alpha") {
  double prev = 0.0;
  for (int df = 1; df < 200; ++df) {
    const double t = chi_square_threshold(df, 0.05);
    CHECK(t > prev);
    prev = t;
  }
  CHECK(chi_square_threshold(20, 0.01) > chi_square_threshold(20, 0.05));
}

TEST_CASE("paper-compat constant is not the df=71 quantile") {
  CHECK(kPaperCompatThreshold == 89.5);
  CHECK(std::abs(chi_square_threshold(71, 0.05) - kPaperCompatThreshold) > 2.0);
}

TEST_CASE("bad arguments") {
  CHECK_THROWS(chi_square_threshold(0, 0.05));
  CHECK_THROWS(chi_square_threshold(5, 0.0));
  CHECK_THROWS(chi_square_threshold(5, 1.0));
  CHECK(chi_square_cdf(0.0, 4) == 0.0);
}

}
