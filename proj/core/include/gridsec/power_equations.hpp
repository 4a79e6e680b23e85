#pragma once

#include <Eigen/Dense>

#include "gridsec/grid_model.hpp"

namespace gridsec::ac {

// Polar-form AC network equations in per-unit. Angles in radians.

struct Injections {
  Eigen::VectorXd p;
  Eigen::VectorXd q;
};

Injections injections(const Eigen::MatrixXcd& y, const Eigen::VectorXd& v,
                      const Eigen::VectorXd& theta);

// Full n-by-n partial derivatives of the injections.
struct InjectionJacobian {
  Eigen::MatrixXd dp_dtheta, dp_dv, dq_dtheta, dq_dv;
};

InjectionJacobian injection_jacobian(const Eigen::MatrixXcd& y, const Eigen::VectorXd& v,
                                     const Eigen::VectorXd& theta);

struct EndFlow {
  double p = 0.0;
  double q = 0.0;
};

struct BranchFlow {
  EndFlow from;
  EndFlow to;
  double loss() const { return from.p + to.p; }
};

BranchFlow branch_flow(const BranchAdmittance& ya, double vf, double vt, double thf,
                       double tht);

// Partials of one end's (p, q) with respect to (theta_f, theta_t, v_f, v_t).
struct EndFlowGradient {
  double dp[4];
  double dq[4];
};

EndFlowGradient from_end_gradient(const BranchAdmittance& ya, double vf, double vt, double thf,
                                  double tht);
EndFlowGradient to_end_gradient(const BranchAdmittance& ya, double vf, double vt, double thf,
                                double tht);

}  // namespace gridsec::ac
