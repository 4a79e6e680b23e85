#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace gridsec {

enum class BusKind { Slack, Generator, Load };
enum class BreakerState { Closed, Open };

std::string to_string(BusKind kind);
std::string to_string(BreakerState state);
BusKind bus_kind_from_string(const std::string& s);
BreakerState breaker_from_string(const std::string& s);

struct Bus {
  int id = 0;
  BusKind kind = BusKind::Load;
  double v_setpoint = 1.0;  // p.u., used for Slack and Generator
  double p_load = 0.0;      // MW
  double q_load = 0.0;      // Mvar
  double p_gen = 0.0;       // MW scheduled output (Generator)
  double q_min = -std::numeric_limits<double>::infinity();  // Mvar
  double q_max = std::numeric_limits<double>::infinity();   // Mvar
  double g_shunt = 0.0;     // MW consumed at V = 1 p.u.
  double b_shunt = 0.0;     // Mvar injected at V = 1 p.u.

  bool operator==(const Bus&) const = default;
};

struct Branch {
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double b_shunt = 0.0;  // total line charging, p.u.
  double tap = 1.0;      // off-nominal ratio on the from side
  BreakerState breaker_from = BreakerState::Closed;
  BreakerState breaker_to = BreakerState::Closed;

  bool in_service() const {
    return breaker_from == BreakerState::Closed && breaker_to == BreakerState::Closed;
  }
  bool operator==(const Branch&) const = default;
};

// Two-port admittance of one branch: [If; It] = [yff yft; ytf ytt] [Vf; Vt].
struct BranchAdmittance {
  std::complex<double> yff, yft, ytf, ytt;
};
BranchAdmittance branch_admittance(const Branch& br);

class NetworkModel {
 public:
  NetworkModel() = default;
  NetworkModel(std::vector<Bus> buses, std::vector<Branch> branches, double base_mva = 100.0);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Branch>& branches() const { return branches_; }
  double base_mva() const { return base_mva_; }

  std::size_t bus_count() const { return buses_.size(); }
  std::size_t branch_count() const { return branches_.size(); }

  const Bus& bus(int id) const;
  const Branch& branch(std::size_t index) const { return branches_.at(index); }
  // 0-based position of a 1-based bus id.
  std::size_t index_of(int id) const;
  int slack_bus() const;
  std::vector<int> slack_buses() const;

  // Index of the branch joining a and b in either orientation.
  std::size_t find_branch(int a, int b) const;
  std::optional<std::size_t> try_find_branch(int a, int b) const;

  NetworkModel with_bus(const Bus& bus) const;
  NetworkModel with_branch(std::size_t index, const Branch& branch) const;

  bool operator==(const NetworkModel&) const = default;

 private:
  void validate() const;

  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  double base_mva_ = 100.0;
};

// In-service status per branch, viewable as a symmetric bus-by-bus 0/1 matrix.
class TopologyMatrix {
 public:
  TopologyMatrix() = default;
  TopologyMatrix(std::size_t bus_count, std::vector<std::pair<int, int>> ends,
                 std::vector<std::uint8_t> in_service);

  std::size_t bus_count() const { return bus_count_; }
  std::size_t branch_count() const { return ends_.size(); }
  bool in_service(std::size_t branch) const { return status_.at(branch) != 0; }
  std::pair<int, int> ends(std::size_t branch) const { return ends_.at(branch); }

  // t_ij for 1-based bus ids; 1 if any in-service branch joins them.
  int at(int i, int j) const;
  Eigen::MatrixXi dense() const;

  bool operator==(const TopologyMatrix&) const = default;

 private:
  std::size_t bus_count_ = 0;
  std::vector<std::pair<int, int>> ends_;
  std::vector<std::uint8_t> status_;
};

TopologyMatrix topology_from_breakers(const NetworkModel& model);

// Returns a copy with exactly the listed branches inverted (T xor dT).
TopologyMatrix apply_topology_corruption(const TopologyMatrix& topology,
                                         const std::set<std::size_t>& flips);

struct Admittance {
  Eigen::MatrixXcd y;
  std::vector<int> isolated_buses;  // buses left with no in-service branch
};

Admittance admittance(const NetworkModel& model, const TopologyMatrix& topology);

NetworkModel build_ieee14();

}  // namespace gridsec
