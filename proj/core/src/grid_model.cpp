#include "gridsec/grid_model.hpp"

#include <algorithm>
#include <sstream>

#include "gridsec/error.hpp"

namespace gridsec {

std::string to_string(BusKind kind) {
  switch (kind) {
    case BusKind::Slack: return "Slack";
    case BusKind::Generator: return "Generator";
    case BusKind::Load: return "Load";
  }
  return "?";
}

std::string to_string(BreakerState state) {
  return state == BreakerState::Closed ? "Closed" : "Opened";
}

BusKind bus_kind_from_string(const std::string& s) {
  if (s == "Slack") return BusKind::Slack;
  if (s == "Generator") return BusKind::Generator;
  if (s == "Load") return BusKind::Load;
  throw ParseError("unknown bus kind '" + s + "'");
}

BreakerState breaker_from_string(const std::string& s) {
  if (s == "Closed" || s == "closed" || s == "R") return BreakerState::Closed;
  if (s == "Open" || s == "Opened" || s == "open" || s == "opened" || s == "G") {
    return BreakerState::Open;
  }
  throw ParseError("unknown breaker status '" + s + "'");
}

BranchAdmittance branch_admittance(const Branch& br) {
  const std::complex<double> ys = 1.0 / std::complex<double>(br.r, br.x);
  const std::complex<double> half_b(0.0, br.b_shunt / 2.0);
  const double t = br.tap;
  return {(ys + half_b) / (t * t), -ys / t, -ys / t, ys + half_b};
}

NetworkModel::NetworkModel(std::vector<Bus> buses, std::vector<Branch> branches, double base_mva)
    : buses_(std::move(buses)), branches_(std::move(branches)), base_mva_(base_mva) {
  validate();
}

void NetworkModel::validate() const {
  if (buses_.empty()) throw ModelError("network has no buses");
  if (!(base_mva_ > 0.0)) throw ModelError("base_mva must be positive");
  bool any_slack = false;
  for (std::size_t k = 0; k < buses_.size(); ++k) {
    const Bus& b = buses_[k];
    if (b.id != static_cast<int>(k) + 1) {
      throw ModelError("bus ids must be contiguous from 1; found " + std::to_string(b.id) +
                       " at position " + std::to_string(k + 1));
    }
    if (b.kind == BusKind::Slack) any_slack = true;
    if (b.kind == BusKind::Load && b.p_load < 0.0) {
      throw ModelError("load bus " + std::to_string(b.id) + " has negative p_load");
    }
    if (b.q_min > b.q_max) {
      throw ModelError("bus " + std::to_string(b.id) + " has q_min > q_max");
    }
    if (b.kind != BusKind::Load && !(b.v_setpoint > 0.0)) {
      throw ModelError("bus " + std::to_string(b.id) + " needs a positive voltage setpoint");
    }
  }
  if (!any_slack) throw ModelError("network has no slack bus");
  const int n = static_cast<int>(buses_.size());
  for (std::size_t k = 0; k < branches_.size(); ++k) {
    const Branch& br = branches_[k];
    std::ostringstream tag;
    tag << "branch " << k << " (" << br.from << "-" << br.to << ")";
    if (br.from < 1 || br.from > n || br.to < 1 || br.to > n) {
      throw ModelError(tag.str() + " references a missing bus");
    }
    if (br.from == br.to) throw ModelError(tag.str() + " is a self loop");
    if (br.x == 0.0) throw ModelError(tag.str() + " has zero reactance");
    if (!(br.tap > 0.0)) throw ModelError(tag.str() + " has non-positive tap");
  }
}

const Bus& NetworkModel::bus(int id) const { return buses_.at(index_of(id)); }

std::size_t NetworkModel::index_of(int id) const {
  if (id < 1 || id > static_cast<int>(buses_.size())) {
    throw ModelError("unknown bus " + std::to_string(id));
  }
  return static_cast<std::size_t>(id - 1);
}

int NetworkModel::slack_bus() const {
  for (const Bus& b : buses_) {
    if (b.kind == BusKind::Slack) return b.id;
  }
  throw ModelError("network has no slack bus");
}

std::vector<int> NetworkModel::slack_buses() const {
  std::vector<int> ids;
  for (const Bus& b : buses_) {
    if (b.kind == BusKind::Slack) ids.push_back(b.id);
  }
  return ids;
}

std::optional<std::size_t> NetworkModel::try_find_branch(int a, int b) const {
  for (std::size_t k = 0; k < branches_.size(); ++k) {
    const Branch& br = branches_[k];
    if ((br.from == a && br.to == b) || (br.from == b && br.to == a)) return k;
  }
  return std::nullopt;
}

std::size_t NetworkModel::find_branch(int a, int b) const {
  auto k = try_find_branch(a, b);
  if (!k) {
    throw ModelError("no branch between bus " + std::to_string(a) + " and bus " +
                     std::to_string(b));
  }
  return *k;
}

NetworkModel NetworkModel::with_bus(const Bus& bus) const {
  auto buses = buses_;
  buses.at(index_of(bus.id)) = bus;
  return NetworkModel(std::move(buses), branches_, base_mva_);
}

NetworkModel NetworkModel::with_branch(std::size_t index, const Branch& branch) const {
  auto branches = branches_;
  branches.at(index) = branch;
  return NetworkModel(buses_, std::move(branches), base_mva_);
}

TopologyMatrix::TopologyMatrix(std::size_t bus_count, std::vector<std::pair<int, int>> ends,
                               std::vector<std::uint8_t> in_service)
    : bus_count_(bus_count), ends_(std::move(ends)), status_(std::move(in_service)) {
  if (ends_.size() != status_.size()) {
    throw ModelError("topology: branch list and status list differ in length");
  }
  for (auto& s : status_) s = s ? 1 : 0;
}

int TopologyMatrix::at(int i, int j) const {
  for (std::size_t k = 0; k < ends_.size(); ++k) {
    auto [a, b] = ends_[k];
    if (((a == i && b == j) || (a == j && b == i)) && status_[k]) return 1;
  }
  return 0;
}

Eigen::MatrixXi TopologyMatrix::dense() const {
  const auto n = static_cast<Eigen::Index>(bus_count_);
  Eigen::MatrixXi t = Eigen::MatrixXi::Zero(n, n);
  for (std::size_t k = 0; k < ends_.size(); ++k) {
    if (!status_[k]) continue;
    auto [a, b] = ends_[k];
    t(a - 1, b - 1) = 1;
    t(b - 1, a - 1) = 1;
  }
  return t;
}

TopologyMatrix topology_from_breakers(const NetworkModel& model) {
  std::vector<std::pair<int, int>> ends;
  std::vector<std::uint8_t> status;
  for (const Branch& br : model.branches()) {
    ends.emplace_back(br.from, br.to);
    status.push_back(br.in_service() ? 1 : 0);
  }
  return TopologyMatrix(model.bus_count(), std::move(ends), std::move(status));
}

TopologyMatrix apply_topology_corruption(const TopologyMatrix& topology,
                                         const std::set<std::size_t>& flips) {
  std::vector<std::pair<int, int>> ends;
  std::vector<std::uint8_t> status;
  for (std::size_t k = 0; k < topology.branch_count(); ++k) {
    ends.push_back(topology.ends(k));
    status.push_back(topology.in_service(k) ? 1 : 0);
  }
  for (std::size_t k : flips) {
    if (k >= status.size()) throw ModelError("unknown branch id " + std::to_string(k));
    status[k] ^= 1;
  }
  return TopologyMatrix(topology.bus_count(), std::move(ends), std::move(status));
}

Admittance admittance(const NetworkModel& model, const TopologyMatrix& topology) {
  if (topology.branch_count() != model.branch_count() ||
      topology.bus_count() != model.bus_count()) {
    throw ModelError("topology does not match the network dimensions");
  }
  const auto n = static_cast<Eigen::Index>(model.bus_count());
  Admittance out;
  out.y = Eigen::MatrixXcd::Zero(n, n);
  std::vector<int> degree(model.bus_count(), 0);
  const double base = model.base_mva();
  for (const Bus& b : model.buses()) {
    const auto i = static_cast<Eigen::Index>(b.id - 1);
    out.y(i, i) += std::complex<double>(b.g_shunt, b.b_shunt) / base;
  }
  for (std::size_t k = 0; k < model.branch_count(); ++k) {
    if (!topology.in_service(k)) continue;
    const Branch& br = model.branch(k);
    const BranchAdmittance ya = branch_admittance(br);
    const auto f = static_cast<Eigen::Index>(br.from - 1);
    const auto t = static_cast<Eigen::Index>(br.to - 1);
    out.y(f, f) += ya.yff;
    out.y(f, t) += ya.yft;
    out.y(t, f) += ya.ytf;
    out.y(t, t) += ya.ytt;
    ++degree[static_cast<std::size_t>(f)];
    ++degree[static_cast<std::size_t>(t)];
  }
  for (std::size_t i = 0; i < degree.size(); ++i) {
    if (degree[i] == 0) out.isolated_buses.push_back(static_cast<int>(i) + 1);
  }
  return out;
}

NetworkModel build_ieee14() {
  auto load = [](int id, double p, double q) {
    Bus b;
    b.id = id;
    b.kind = BusKind::Load;
    b.p_load = p;
    b.q_load = q;
    return b;
  };
  auto gen = [](int id, BusKind kind, double vset, double pg, double qmin, double qmax,
                double pd, double qd) {
    Bus b;
    b.id = id;
    b.kind = kind;
    b.v_setpoint = vset;
    b.p_gen = pg;
    b.q_min = qmin;
    b.q_max = qmax;
    b.p_load = pd;
    b.q_load = qd;
    return b;
  };
  std::vector<Bus> buses = {
      gen(1, BusKind::Slack, 1.060, 232.4, 0.0, 10.0, 0.0, 0.0),
      gen(2, BusKind::Generator, 1.045, 40.0, -40.0, 50.0, 21.7, 12.7),
      gen(3, BusKind::Generator, 1.010, 0.0, 0.0, 40.0, 94.2, 19.0),
      load(4, 47.8, -3.9),
      load(5, 7.6, 1.6),
      gen(6, BusKind::Generator, 1.070, 0.0, -6.0, 24.0, 11.2, 7.5),
      load(7, 0.0, 0.0),
      gen(8, BusKind::Generator, 1.090, 0.0, -6.0, 24.0, 0.0, 0.0),
      load(9, 29.5, 16.6),
      load(10, 9.0, 5.8),
      load(11, 3.5, 1.8),
      load(12, 6.1, 1.6),
      load(13, 13.5, 5.8),
      load(14, 14.9, 5.0),
  };
  buses[8].b_shunt = 19.0;

  auto line = [](int f, int t, double r, double x, double b, double tap = 1.0) {
    Branch br;
    br.from = f;
    br.to = t;
    br.r = r;
    br.x = x;
    br.b_shunt = b;
    br.tap = tap;
    return br;
  };
  std::vector<Branch> branches = {
      line(1, 2, 0.01938, 0.05917, 0.0528),  line(1, 5, 0.05403, 0.22304, 0.0492),
      line(2, 3, 0.04699, 0.19797, 0.0438),  line(2, 4, 0.05811, 0.17632, 0.0340),
      line(2, 5, 0.05695, 0.17388, 0.0346),  line(3, 4, 0.06701, 0.17103, 0.0128),
      line(4, 5, 0.01335, 0.04211, 0.0),     line(4, 7, 0.0, 0.20912, 0.0, 0.978),
      line(4, 9, 0.0, 0.55618, 0.0, 0.969),  line(5, 6, 0.0, 0.25202, 0.0, 0.932),
      line(6, 11, 0.09498, 0.19890, 0.0),    line(6, 12, 0.12291, 0.25581, 0.0),
      line(6, 13, 0.06615, 0.13027, 0.0),    line(7, 8, 0.0, 0.17615, 0.0),
      line(7, 9, 0.0, 0.11001, 0.0),         line(9, 10, 0.03181, 0.08450, 0.0),
      line(9, 14, 0.12711, 0.27038, 0.0),    line(10, 11, 0.08205, 0.19207, 0.0),
      line(12, 13, 0.22092, 0.19988, 0.0),   line(13, 14, 0.17093, 0.34802, 0.0),
  };
  return NetworkModel(std::move(buses), std::move(branches), 100.0);
}

}  // namespace gridsec
