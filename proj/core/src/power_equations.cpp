#include "gridsec/power_equations.hpp"

#include <cmath>

namespace gridsec::ac {

Injections injections(const Eigen::MatrixXcd& y, const Eigen::VectorXd& v,
                      const Eigen::VectorXd& theta) {
  const Eigen::Index n = v.size();
  Injections out{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 0.0;
    double q = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::complex<double> yij = y(i, j);
      if (yij == 0.0) continue;
      const double a = theta(i) - theta(j);
      const double c = std::cos(a);
      const double s = std::sin(a);
      p += v(j) * (yij.real() * c + yij.imag() * s);
      q += v(j) * (yij.real() * s - yij.imag() * c);
    }
    out.p(i) = v(i) * p;
    out.q(i) = v(i) * q;
  }
  return out;
}

InjectionJacobian injection_jacobian(const Eigen::MatrixXcd& y, const Eigen::VectorXd& v,
                                     const Eigen::VectorXd& theta) {
  const Eigen::Index n = v.size();
  InjectionJacobian jac{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n),
                        Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  const Injections s = injections(y, v, theta);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::complex<double> yij = y(i, j);
      if (yij == 0.0) continue;
      const double g = yij.real();
      const double b = yij.imag();
      const double a = theta(i) - theta(j);
      const double c = std::cos(a);
      const double sn = std::sin(a);
      jac.dp_dtheta(i, j) = v(i) * v(j) * (g * sn - b * c);
      jac.dp_dv(i, j) = v(i) * (g * c + b * sn);
      jac.dq_dtheta(i, j) = -v(i) * v(j) * (g * c + b * sn);
      jac.dq_dv(i, j) = v(i) * (g * sn - b * c);
    }
    const double gii = y(i, i).real();
    const double bii = y(i, i).imag();
    jac.dp_dtheta(i, i) = -s.q(i) - bii * v(i) * v(i);
    jac.dp_dv(i, i) = s.p(i) / v(i) + gii * v(i);
    jac.dq_dtheta(i, i) = s.p(i) - gii * v(i) * v(i);
    jac.dq_dv(i, i) = s.q(i) / v(i) - bii * v(i);
  }
  return jac;
}

namespace {

// One end of a two-port seen from bus a toward bus b:
//   p = va^2 Gaa + va vb (Gab cos + Bab sin),  q = -va^2 Baa + va vb (Gab sin - Bab cos)
EndFlow end_flow(std::complex<double> yaa, std::complex<double> yab, double va, double vb,
                 double tha, double thb) {
  const double a = tha - thb;
  const double c = std::cos(a);
  const double s = std::sin(a);
  EndFlow f;
  f.p = va * va * yaa.real() + va * vb * (yab.real() * c + yab.imag() * s);
  f.q = -va * va * yaa.imag() + va * vb * (yab.real() * s - yab.imag() * c);
  return f;
}

// Gradient ordered (theta_a, theta_b, v_a, v_b).
void end_gradient(std::complex<double> yaa, std::complex<double> yab, double va, double vb,
                  double tha, double thb, double dp[4], double dq[4]) {
  const double a = tha - thb;
  const double c = std::cos(a);
  const double s = std::sin(a);
  const double g = yab.real();
  const double b = yab.imag();
  dp[0] = va * vb * (-g * s + b * c);
  dp[1] = -dp[0];
  dp[2] = 2.0 * va * yaa.real() + vb * (g * c + b * s);
  dp[3] = va * (g * c + b * s);
  dq[0] = va * vb * (g * c + b * s);
  dq[1] = -dq[0];
  dq[2] = -2.0 * va * yaa.imag() + vb * (g * s - b * c);
  dq[3] = va * (g * s - b * c);
}

}  // namespace

BranchFlow branch_flow(const BranchAdmittance& ya, double vf, double vt, double thf,
                       double tht) {
  return {end_flow(ya.yff, ya.yft, vf, vt, thf, tht), end_flow(ya.ytt, ya.ytf, vt, vf, tht, thf)};
}

EndFlowGradient from_end_gradient(const BranchAdmittance& ya, double vf, double vt, double thf,
                                  double tht) {
  EndFlowGradient gr{};
  end_gradient(ya.yff, ya.yft, vf, vt, thf, tht, gr.dp, gr.dq);
  return gr;
}

EndFlowGradient to_end_gradient(const BranchAdmittance& ya, double vf, double vt, double thf,
                                double tht) {
  double dp[4];
  double dq[4];
  end_gradient(ya.ytt, ya.ytf, vt, vf, tht, thf, dp, dq);
  // Reorder from (theta_t, theta_f, v_t, v_f) to (theta_f, theta_t, v_f, v_t).
  return {{dp[1], dp[0], dp[3], dp[2]}, {dq[1], dq[0], dq[3], dq[2]}};
}

}  // namespace gridsec::ac
