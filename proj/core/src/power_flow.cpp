#include "gridsec/power_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "gridsec/error.hpp"
#include "gridsec/power_equations.hpp"

namespace gridsec {

std::vector<Island> decompose_islands(const NetworkModel& model, const TopologyMatrix& topology) {
  const std::size_t n = model.bus_count();
  std::vector<std::vector<int>> adj(n);
  for (std::size_t k = 0; k < topology.branch_count(); ++k) {
    if (!topology.in_service(k)) continue;
    auto [a, b] = topology.ends(k);
    adj[static_cast<std::size_t>(a - 1)].push_back(b - 1);
    adj[static_cast<std::size_t>(b - 1)].push_back(a - 1);
  }
  std::vector<int> comp(n, -1);
  std::vector<Island> islands;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    Island isl;
    std::queue<int> q;
    q.push(static_cast<int>(s));
    comp[s] = static_cast<int>(islands.size());
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      isl.buses.push_back(u + 1);
      for (int w : adj[static_cast<std::size_t>(u)]) {
        if (comp[static_cast<std::size_t>(w)] < 0) {
          comp[static_cast<std::size_t>(w)] = comp[s];
          q.push(w);
        }
      }
    }
    std::sort(isl.buses.begin(), isl.buses.end());
    for (int id : isl.buses) {
      if (model.bus(id).kind == BusKind::Slack) {
        isl.has_slack = true;
        isl.reference_bus = id;
        break;
      }
    }
    if (!isl.has_slack) {
      for (int id : isl.buses) {
        if (model.bus(id).kind == BusKind::Generator) {
          isl.reference_bus = id;
          break;
        }
      }
    }
    islands.push_back(std::move(isl));
  }
  return islands;
}

std::vector<BranchFlowMw> line_flows(const Eigen::VectorXd& v, const Eigen::VectorXd& theta,
                                     const NetworkModel& model, const TopologyMatrix& topology) {
  const double base = model.base_mva();
  std::vector<BranchFlowMw> flows(model.branch_count());
  for (std::size_t k = 0; k < model.branch_count(); ++k) {
    if (!topology.in_service(k)) continue;
    const Branch& br = model.branch(k);
    const auto f = static_cast<Eigen::Index>(br.from - 1);
    const auto t = static_cast<Eigen::Index>(br.to - 1);
    const ac::BranchFlow bf = ac::branch_flow(branch_admittance(br), v(f), v(t), theta(f), theta(t));
    BranchFlowMw& out = flows[k];
    out.in_service = true;
    out.p_from = bf.from.p * base;
    out.q_from = bf.from.q * base;
    out.p_to = bf.to.p * base;
    out.q_to = bf.to.q * base;
    out.loss = out.p_from + out.p_to;
  }
  return flows;
}

void fill_island_balance(std::vector<Island>& islands, const NetworkModel& model,
                         const PowerFlowSolution& solution) {
  std::vector<int> owner(model.bus_count(), -1);
  for (std::size_t k = 0; k < islands.size(); ++k) {
    for (int id : islands[k].buses) owner[static_cast<std::size_t>(id - 1)] = static_cast<int>(k);
  }
  std::vector<double> bal(islands.size(), 0.0);
  for (std::size_t i = 0; i < model.bus_count(); ++i) {
    const Bus& b = model.buses()[i];
    const double v = solution.v(static_cast<Eigen::Index>(i));
    bal[static_cast<std::size_t>(owner[i])] +=
        solution.p_inj(static_cast<Eigen::Index>(i)) - b.g_shunt * v * v;
  }
  for (std::size_t k = 0; k < model.branch_count(); ++k) {
    const BranchFlowMw& f = solution.flows[k];
    if (!f.in_service) continue;
    bal[static_cast<std::size_t>(owner[static_cast<std::size_t>(model.branch(k).from - 1)])] -=
        f.loss;
  }
  for (std::size_t k = 0; k < islands.size(); ++k) islands[k].p_balance_mw = bal[k];
}

namespace {

enum class Role { Ref, PV, PQ, Dead };

}  // namespace

PowerFlowSolution solve(const NetworkModel& model, const TopologyMatrix& topology,
                        const PowerFlowOptions& options) {
  const std::size_t n = model.bus_count();
  const auto ni = static_cast<Eigen::Index>(n);
  const double base = model.base_mva();
  const Admittance adm = admittance(model, topology);

  PowerFlowSolution sol;
  sol.islands = decompose_islands(model, topology);
  if (std::none_of(sol.islands.begin(), sol.islands.end(),
                   [](const Island& i) { return i.has_slack; })) {
    throw ModelError("power flow: no island contains a slack bus");
  }

  std::vector<Role> role(n, Role::PQ);
  for (Island& isl : sol.islands) {
    isl.solved = isl.reference_bus != 0;
    for (int id : isl.buses) {
      const Bus& b = model.bus(id);
      auto& r = role[static_cast<std::size_t>(id - 1)];
      if (!isl.solved) {
        r = Role::Dead;
      } else if (id == isl.reference_bus) {
        r = Role::Ref;
      } else if (b.kind != BusKind::Load) {
        r = Role::PV;
      } else {
        r = Role::PQ;
      }
    }
  }

  Eigen::VectorXd v = Eigen::VectorXd::Ones(ni);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(ni);
  Eigen::VectorXd p_spec(ni);
  Eigen::VectorXd q_spec(ni);
  for (std::size_t i = 0; i < n; ++i) {
    const Bus& b = model.buses()[i];
    const auto ii = static_cast<Eigen::Index>(i);
    if (role[i] == Role::Ref || role[i] == Role::PV) v(ii) = b.v_setpoint;
    if (role[i] == Role::Dead) v(ii) = 0.0;
    const double pg = b.kind == BusKind::Load ? 0.0 : b.p_gen;
    p_spec(ii) = (pg - b.p_load) / base;
    q_spec(ii) = -b.q_load / base;
  }

  auto newton = [&]() {
    std::vector<Eigen::Index> ang;
    std::vector<Eigen::Index> mag;
    for (std::size_t i = 0; i < n; ++i) {
      if (role[i] == Role::PV || role[i] == Role::PQ) ang.push_back(static_cast<Eigen::Index>(i));
      if (role[i] == Role::PQ) mag.push_back(static_cast<Eigen::Index>(i));
    }
    const auto na = static_cast<Eigen::Index>(ang.size());
    const auto nm = static_cast<Eigen::Index>(mag.size());
    Eigen::VectorXd mis(na + nm);
    for (int it = 0;; ++it) {
      const ac::Injections s = ac::injections(adm.y, v, theta);
      for (Eigen::Index k = 0; k < na; ++k) mis(k) = p_spec(ang[k]) - s.p(ang[k]);
      for (Eigen::Index k = 0; k < nm; ++k) mis(na + k) = q_spec(mag[k]) - s.q(mag[k]);
      sol.max_mismatch = na + nm > 0 ? mis.cwiseAbs().maxCoeff() : 0.0;
      if (!std::isfinite(sol.max_mismatch)) break;
      if (sol.max_mismatch < options.tol) return true;
      if (it >= options.max_iter) break;
      ++sol.iterations;
      const ac::InjectionJacobian jac = ac::injection_jacobian(adm.y, v, theta);
      Eigen::MatrixXd j(na + nm, na + nm);
      for (Eigen::Index r = 0; r < na; ++r) {
        for (Eigen::Index c = 0; c < na; ++c) j(r, c) = jac.dp_dtheta(ang[r], ang[c]);
        for (Eigen::Index c = 0; c < nm; ++c) j(r, na + c) = jac.dp_dv(ang[r], mag[c]);
      }
      for (Eigen::Index r = 0; r < nm; ++r) {
        for (Eigen::Index c = 0; c < na; ++c) j(na + r, c) = jac.dq_dtheta(mag[r], ang[c]);
        for (Eigen::Index c = 0; c < nm; ++c) j(na + r, na + c) = jac.dq_dv(mag[r], mag[c]);
      }
      const Eigen::VectorXd dx = j.partialPivLu().solve(mis);
      const Eigen::VectorXd theta0 = theta;
      const Eigen::VectorXd v0 = v;
      const double norm0 = mis.norm();
      // Halve the step while it makes the mismatch worse.
      for (double step = 1.0;; step *= 0.5) {
        for (Eigen::Index k = 0; k < na; ++k) theta(ang[k]) = theta0(ang[k]) + step * dx(k);
        for (Eigen::Index k = 0; k < nm; ++k) v(mag[k]) = v0(mag[k]) + step * dx(na + k);
        if (step < 1.0 / 64) break;
        const ac::Injections trial = ac::injections(adm.y, v, theta);
        double norm = 0.0;
        for (Eigen::Index k = 0; k < na; ++k) norm += std::pow(p_spec(ang[k]) - trial.p(ang[k]), 2);
        for (Eigen::Index k = 0; k < nm; ++k) norm += std::pow(q_spec(mag[k]) - trial.q(mag[k]), 2);
        if (std::sqrt(norm) < norm0) break;
      }
    }
    return false;
  };

  bool ok = newton();
  // Reactive limits: switch the worst violating generator to PQ at its limit
  // and re-solve, one at a time.
  for (int round = 0; ok && options.enforce_q_limits && round < static_cast<int>(n); ++round) {
    const ac::Injections s = ac::injections(adm.y, v, theta);
    std::size_t worst = n;
    double worst_excess = 1e-6;
    double worst_limit = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (role[i] != Role::PV) continue;
      const Bus& b = model.buses()[i];
      const double qg = s.q(static_cast<Eigen::Index>(i)) * base + b.q_load;
      const double excess = std::max(qg - b.q_max, b.q_min - qg);
      if (excess > worst_excess) {
        worst = i;
        worst_excess = excess;
        worst_limit = qg > b.q_max ? b.q_max : b.q_min;
      }
    }
    if (worst == n) break;
    const Bus& b = model.buses()[worst];
    role[worst] = Role::PQ;
    q_spec(static_cast<Eigen::Index>(worst)) = (worst_limit - b.q_load) / base;
    sol.q_limited.push_back(b.id);
    ok = newton();
  }
  if (!ok) {
    throw ConvergenceError("power flow did not converge (mismatch " +
                               std::to_string(sol.max_mismatch) + " p.u.)",
                           sol.iterations);
  }
  std::sort(sol.q_limited.begin(), sol.q_limited.end());

  const ac::Injections s = ac::injections(adm.y, v, theta);
  sol.v = v;
  sol.theta = theta;
  sol.p_inj = s.p * base;
  sol.q_inj = s.q * base;
  for (std::size_t i = 0; i < n; ++i) {
    if (role[i] == Role::Dead) {
      sol.p_inj(static_cast<Eigen::Index>(i)) = 0.0;
      sol.q_inj(static_cast<Eigen::Index>(i)) = 0.0;
    }
  }
  sol.flows = line_flows(v, theta, model, topology);
  sol.losses = 0.0;
  for (const BranchFlowMw& f : sol.flows) sol.losses += f.loss;
  sol.converged = true;
  fill_island_balance(sol.islands, model, sol);
  return sol;
}

}  // namespace gridsec
