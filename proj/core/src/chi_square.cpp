#include "gridsec/chi_square.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace gridsec {

double chi_square_cdf(double x, int df) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(0.5 * df, 0.5 * x);
}

double chi_square_threshold(int df, double alpha) {
  if (df < 1) throw std::invalid_argument("chi_square_threshold: df must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("chi_square_threshold: alpha must lie in (0, 1)");
  }
  const double k = static_cast<double>(df);
  const double z = std::sqrt(2.0) * boost::math::erfc_inv(2.0 * alpha);
  const double c = 2.0 / (9.0 * k);
  double tau = k * std::pow(std::max(1.0 - c + z * std::sqrt(c), 1e-3), 3);

  for (int it = 0; it < 100; ++it) {
    // Work on the upper tail so small alpha keeps full precision.
    const double f = boost::math::gamma_q(0.5 * k, 0.5 * tau) - alpha;
    const double slope = 0.5 * boost::math::gamma_p_derivative(0.5 * k, 0.5 * tau);
    if (!(slope > 0.0)) break;
    double next = tau + f / slope;
    if (next <= 0.0) next = 0.5 * tau;
    const double step = std::abs(next - tau);
    tau = next;
    if (step <= 1e-13 * tau) break;
  }
  return tau;
}

}  // namespace gridsec
