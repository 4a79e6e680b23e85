#include "gridsec/records.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gridsec/error.hpp"
#include "gridsec/power_equations.hpp"

namespace gridsec {

std::string to_string(RecordOrigin origin) {
  return origin == RecordOrigin::Measurements ? "measurements" : "post_se";
}

RecordOrigin record_origin_from_string(const std::string& s) {
  if (s == "measurements") return RecordOrigin::Measurements;
  if (s == "post_se") return RecordOrigin::PostSe;
  throw ParseError("unknown record origin '" + s + "'");
}

const BusRow& FixtureRecord::bus(int id) const {
  for (const BusRow& r : buses) {
    if (r.bus == id) return r;
  }
  throw ModelError("record has no bus " + std::to_string(id));
}

BusRow& FixtureRecord::bus(int id) {
  return const_cast<BusRow&>(static_cast<const FixtureRecord&>(*this).bus(id));
}

const BranchRow* FixtureRecord::find_branch(int a, int b) const {
  for (const BranchRow& r : branches) {
    if ((r.from == a && r.to == b) || (r.from == b && r.to == a)) return &r;
  }
  return nullptr;
}

BranchRow* FixtureRecord::find_branch(int a, int b) {
  return const_cast<BranchRow*>(static_cast<const FixtureRecord&>(*this).find_branch(a, b));
}

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string record_to_csv(const FixtureRecord& record) {
  std::ostringstream out;
  out << "# source: " << record.source << '\n';
  out << "# origin: " << to_string(record.origin) << '\n';
  if (record.bdd_chi2) out << "# bdd_chi2: " << format_number(*record.bdd_chi2) << '\n';
  for (const auto& [k, v] : record.meta) out << "# " << k << ": " << v << '\n';
  out << "[buses]\nbus,v_pu,theta_deg,p_mw,q_mvar\n";
  for (const BusRow& r : record.buses) {
    out << r.bus << ',' << format_number(r.v_pu) << ',' << format_number(r.theta_deg) << ','
        << format_number(r.p_mw) << ',' << format_number(r.q_mvar) << '\n';
  }
  if (!record.branches.empty()) {
    out << "[branches]\nfrom,to,status_from,status_to,p_mw,q_mvar,loss_mw\n";
    for (const BranchRow& r : record.branches) {
      out << r.from << ',' << r.to << ',' << to_string(r.status_from) << ','
          << to_string(r.status_to) << ',' << format_number(r.p_mw) << ','
          << format_number(r.q_mvar) << ',' << format_number(r.loss_mw) << '\n';
    }
  }
  return out.str();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double to_double(const std::string& s, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

int to_int(const std::string& s, int line_no) {
  const double v = to_double(s, line_no);
  if (v != std::floor(v)) {
    throw ParseError("line " + std::to_string(line_no) + ": expected integer, got '" + s + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

FixtureRecord record_from_csv(const std::string& text) {
  static const std::vector<std::string> kBusHeader = {"bus", "v_pu", "theta_deg", "p_mw",
                                                      "q_mvar"};
  static const std::vector<std::string> kBranchHeader = {
      "from", "to", "status_from", "status_to", "p_mw", "q_mvar", "loss_mw"};
  FixtureRecord rec;
  std::istringstream in(text);
  std::string raw;
  enum class Section { None, Buses, Branches } section = Section::None;
  bool expect_header = false;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = trim(line.substr(1, colon - 1));
      const std::string val = trim(line.substr(colon + 1));
      if (key == "source") {
        rec.source = val;
      } else if (key == "origin") {
        rec.origin = record_origin_from_string(val);
      } else if (key == "bdd_chi2") {
        rec.bdd_chi2 = to_double(val, line_no);
      } else {
        rec.meta[key] = val;
      }
      continue;
    }
    if (line == "[buses]") {
      section = Section::Buses;
      expect_header = true;
      continue;
    }
    if (line == "[branches]") {
      section = Section::Branches;
      expect_header = true;
      continue;
    }
    const auto cells = split(line);
    if (expect_header) {
      const auto& want = section == Section::Buses ? kBusHeader : kBranchHeader;
      if (cells != want) {
        throw ParseError("line " + std::to_string(line_no) + ": unexpected column header");
      }
      expect_header = false;
      continue;
    }
    if (section == Section::Buses) {
      if (cells.size() != kBusHeader.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": expected 5 bus columns");
      }
      rec.buses.push_back({to_int(cells[0], line_no), to_double(cells[1], line_no),
                           to_double(cells[2], line_no), to_double(cells[3], line_no),
                           to_double(cells[4], line_no)});
    } else if (section == Section::Branches) {
      if (cells.size() != kBranchHeader.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": expected 7 branch columns");
      }
      BranchRow r;
      r.from = to_int(cells[0], line_no);
      r.to = to_int(cells[1], line_no);
      try {
        r.status_from = breaker_from_string(cells[2]);
        r.status_to = breaker_from_string(cells[3]);
      } catch (const ParseError& e) {
        throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
      }
      r.p_mw = to_double(cells[4], line_no);
      r.q_mvar = to_double(cells[5], line_no);
      r.loss_mw = to_double(cells[6], line_no);
      rec.branches.push_back(r);
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": data outside a section");
    }
  }
  if (rec.buses.empty()) throw ParseError("record has no [buses] rows");
  return rec;
}

FixtureRecord load_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open record " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return record_from_csv(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_record(const FixtureRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << record_to_csv(record);
}

FixtureRecord record_from_solution(const NetworkModel& model, const TopologyMatrix& topology,
                                   const PowerFlowSolution& solution, const std::string& source) {
  FixtureRecord rec;
  rec.source = source;
  rec.origin = RecordOrigin::PostSe;
  for (std::size_t i = 0; i < model.bus_count(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    rec.buses.push_back({static_cast<int>(i) + 1, solution.v(ii),
                         solution.theta(ii) * 180.0 / std::numbers::pi, solution.p_inj(ii),
                         solution.q_inj(ii)});
  }
  for (std::size_t k = 0; k < model.branch_count(); ++k) {
    const Branch& br = model.branch(k);
    BranchRow r;
    r.from = br.from;
    r.to = br.to;
    if (topology.in_service(k)) {
      r.status_from = BreakerState::Closed;
      r.status_to = BreakerState::Closed;
    } else {
      // Topology says out of service; keep whichever breaker the model opened.
      r.status_from = br.in_service() ? BreakerState::Open : br.breaker_from;
      r.status_to = br.in_service() ? BreakerState::Open : br.breaker_to;
    }
    r.p_mw = solution.flows[k].p_from;
    r.q_mvar = solution.flows[k].q_from;
    r.loss_mw = solution.flows[k].loss;
    rec.branches.push_back(r);
  }
  return rec;
}

FixtureRecord record_at_state(const NetworkModel& model, const TopologyMatrix& topology,
                              const Eigen::VectorXd& v, const Eigen::VectorXd& theta,
                              const std::string& source) {
  const auto n = static_cast<Eigen::Index>(model.bus_count());
  if (v.size() != n || theta.size() != n) throw ModelError("state does not match the bus count");
  const Admittance adm = admittance(model, topology);
  const ac::Injections s = ac::injections(adm.y, v, theta);
  PowerFlowSolution sol;
  sol.v = v;
  sol.theta = theta;
  sol.p_inj = s.p * model.base_mva();
  sol.q_inj = s.q * model.base_mva();
  sol.flows = line_flows(v, theta, model, topology);
  sol.converged = true;
  return record_from_solution(model, topology, sol, source);
}

}  // namespace gridsec
