#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gridsec/grid_model.hpp"

namespace gridsec {

struct Island {
  std::vector<int> buses;  // sorted bus ids
  bool has_slack = false;
  int reference_bus = 0;   // slack, or promoted generator; 0 when none
  bool solved = false;
  double p_balance_mw = 0.0;  // sum(gen) - sum(load) - losses, filled from a solution
};

// Connected components over in-service branches, ordered by smallest bus id.
std::vector<Island> decompose_islands(const NetworkModel& model, const TopologyMatrix& topology);

struct BranchFlowMw {
  double p_from = 0.0;  // MW leaving the from bus
  double q_from = 0.0;  // Mvar
  double p_to = 0.0;
  double q_to = 0.0;
  double loss = 0.0;    // p_from + p_to
  bool in_service = false;
};

struct PowerFlowOptions {
  double tol = 1e-8;  // p.u. mismatch
  int max_iter = 30;
  bool enforce_q_limits = true;
};

struct PowerFlowSolution {
  Eigen::VectorXd v;      // p.u.
  Eigen::VectorXd theta;  // rad, zero at each island reference
  Eigen::VectorXd p_inj;  // MW, generation positive
  Eigen::VectorXd q_inj;  // Mvar
  std::vector<BranchFlowMw> flows;
  double losses = 0.0;    // MW over in-service branches
  std::vector<Island> islands;
  std::vector<int> q_limited;  // generator buses switched to fixed Q
  int iterations = 0;
  bool converged = false;
  double max_mismatch = 0.0;   // p.u.
};

// Newton-Raphson from a flat start. Buses in islands with no slack and no
// generator are left at v = 0 and reported through islands[k].solved.
PowerFlowSolution solve(const NetworkModel& model, const TopologyMatrix& topology,
                        const PowerFlowOptions& options = {});

std::vector<BranchFlowMw> line_flows(const Eigen::VectorXd& v, const Eigen::VectorXd& theta,
                                     const NetworkModel& model, const TopologyMatrix& topology);

// Per-island sum(gen) - sum(load) - losses in MW for a solved state.
void fill_island_balance(std::vector<Island>& islands, const NetworkModel& model,
                         const PowerFlowSolution& solution);

}  // namespace gridsec
