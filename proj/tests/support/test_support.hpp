#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "gridsec/grid_model.hpp"
#include "gridsec/power_flow.hpp"
#include "gridsec/records.hpp"
#include "gridsec/state_estimation.hpp"

namespace testing {

inline std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(GRIDSEC_DATA_DIR) / rel;
}

inline gridsec::FixtureRecord fixture(const std::string& name) {
  return gridsec::load_record(data_path("fixtures/" + name));
}

// Bus admittance matrix assembled entry by entry from the pi model, kept
// apart from the library's own assembly.
inline Eigen::MatrixXcd reference_ybus(const gridsec::NetworkModel& m) {
  using C = std::complex<double>;
  const auto n = static_cast<Eigen::Index>(m.bus_count());
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& br : m.branches()) {
    if (!br.in_service()) continue;
    const C ys = 1.0 / C(br.r, br.x);
    const C half_b(0.0, br.b_shunt / 2.0);
    const double a = br.tap;
    const auto f = static_cast<Eigen::Index>(br.from - 1);
    const auto t = static_cast<Eigen::Index>(br.to - 1);
    y(f, f) += (ys + half_b) / (a * a);
    y(t, t) += ys + half_b;
    y(f, t) -= ys / a;
    y(t, f) -= ys / a;
  }
  for (const auto& b : m.buses()) {
    const auto i = static_cast<Eigen::Index>(b.id - 1);
    y(i, i) += C(b.g_shunt, b.b_shunt) / m.base_mva();
  }
  return y;
}

inline gridsec::StateVector state_of(const gridsec::PowerFlowSolution& s) {
  gridsec::StateVector x;
  x.v = s.v;
  x.theta = s.theta;
  x.reference_bus = 1;
  return x;
}

}  // namespace testing
