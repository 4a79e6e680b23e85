#include "gridsec/measurement.hpp"

#include <fstream>
#include <sstream>

#include "gridsec/error.hpp"
#include "gridsec/records.hpp"

namespace gridsec {

std::string to_string(MeasurementKind kind) {
  switch (kind) {
    case MeasurementKind::Vm: return "Vm";
    case MeasurementKind::Pinj: return "Pinj";
    case MeasurementKind::Qinj: return "Qinj";
    case MeasurementKind::Pflow: return "Pflow";
    case MeasurementKind::Qflow: return "Qflow";
  }
  return "?";
}

MeasurementKind measurement_kind_from_string(const std::string& s) {
  if (s == "Vm") return MeasurementKind::Vm;
  if (s == "Pinj") return MeasurementKind::Pinj;
  if (s == "Qinj") return MeasurementKind::Qinj;
  if (s == "Pflow") return MeasurementKind::Pflow;
  if (s == "Qflow") return MeasurementKind::Qflow;
  throw ParseError("unknown measurement kind '" + s + "'");
}

Eigen::VectorXd MeasurementSet::values() const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) z(static_cast<Eigen::Index>(i)) = entries[i].value;
  return z;
}

Eigen::VectorXd MeasurementSet::sigmas() const {
  Eigen::VectorXd s(static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) s(static_cast<Eigen::Index>(i)) = entries[i].sigma;
  return s;
}

void MeasurementSet::set_values(const Eigen::VectorXd& z) {
  if (z.size() != static_cast<Eigen::Index>(entries.size())) {
    throw ModelError("measurement vector length mismatch");
  }
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].value = z(static_cast<Eigen::Index>(i));
}

void MeasurementSet::validate(const NetworkModel& model) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Measurement& m = entries[i];
    if (!(m.sigma > 0.0)) {
      throw ModelError("measurement " + std::to_string(i) + " has non-positive sigma");
    }
    if (m.is_flow()) {
      if (m.branch >= model.branch_count()) {
        throw ModelError("measurement " + std::to_string(i) + " references a missing branch");
      }
    } else if (m.bus < 1 || m.bus > static_cast<int>(model.bus_count())) {
      throw ModelError("measurement " + std::to_string(i) + " references a missing bus");
    }
  }
}

std::optional<std::size_t> MeasurementSet::find(MeasurementKind kind, int bus) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].kind == kind && !entries[i].is_flow() && entries[i].bus == bus) return i;
  }
  return std::nullopt;
}

MeasurementSet MeasurementSet::without(std::size_t index) const {
  MeasurementSet out = *this;
  out.entries.erase(out.entries.begin() + static_cast<std::ptrdiff_t>(index));
  return out;
}

std::string measurement_label(const Measurement& m, const NetworkModel& model) {
  std::string s = to_string(m.kind) + "@";
  if (!m.is_flow()) return s + std::to_string(m.bus);
  const Branch& br = model.branch(m.branch);
  if (m.end == BranchEnd::From) return s + std::to_string(br.from) + "-" + std::to_string(br.to);
  return s + std::to_string(br.to) + "-" + std::to_string(br.from);
}

MeasurementSet bus_measurement_layout(const NetworkModel& model, const NoiseModel& noise) {
  MeasurementSet set;
  for (MeasurementKind kind : {MeasurementKind::Vm, MeasurementKind::Pinj, MeasurementKind::Qinj}) {
    for (const Bus& b : model.buses()) {
      Measurement m;
      m.kind = kind;
      m.bus = b.id;
      m.sigma = kind == MeasurementKind::Vm ? noise.sigma_v : noise.sigma_power;
      set.entries.push_back(m);
    }
  }
  return set;
}

MeasurementSet full_measurement_layout(const NetworkModel& model, const NoiseModel& noise) {
  MeasurementSet set = bus_measurement_layout(model, noise);
  for (MeasurementKind kind : {MeasurementKind::Pflow, MeasurementKind::Qflow}) {
    for (BranchEnd end : {BranchEnd::From, BranchEnd::To}) {
      for (std::size_t k = 0; k < model.branch_count(); ++k) {
        Measurement m;
        m.kind = kind;
        m.branch = k;
        m.end = end;
        m.sigma = noise.sigma_power;
        set.entries.push_back(m);
      }
    }
  }
  return set;
}

void add_gaussian_noise(MeasurementSet& set, std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  for (Measurement& m : set.entries) m.value += m.sigma * unit(rng);
}

std::string measurements_to_csv(const MeasurementSet& set, const NetworkModel& model) {
  std::ostringstream out;
  if (set.timestamp) out << "# timestamp: " << *set.timestamp << '\n';
  out << "kind,location,value,sigma\n";
  for (const Measurement& m : set.entries) {
    const std::string label = measurement_label(m, model);
    out << to_string(m.kind) << ',' << label.substr(label.find('@') + 1) << ','
        << format_number(m.value) << ',' << format_number(m.sigma) << '\n';
  }
  return out.str();
}

MeasurementSet measurements_from_csv(const std::string& text, const NetworkModel& model) {
  MeasurementSet set;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos && line.find("timestamp") != std::string::npos) {
        set.timestamp = line.substr(line.find_first_not_of(' ', colon + 1));
      }
      continue;
    }
    if (header) {
      if (line != "kind,location,value,sigma") {
        throw ParseError("measurements: expected header kind,location,value,sigma");
      }
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (cells.size() != 4) {
      throw ParseError("measurements line " + std::to_string(line_no) + ": expected 4 columns");
    }
    Measurement m;
    try {
      m.kind = measurement_kind_from_string(cells[0]);
      m.value = std::stod(cells[2]);
      m.sigma = std::stod(cells[3]);
      if (m.is_flow()) {
        const auto dash = cells[1].find('-');
        if (dash == std::string::npos) throw ParseError("flow location needs from-to");
        const int a = std::stoi(cells[1].substr(0, dash));
        const int b = std::stoi(cells[1].substr(dash + 1));
        m.branch = model.find_branch(a, b);
        m.end = model.branch(m.branch).from == a ? BranchEnd::From : BranchEnd::To;
      } else {
        m.bus = std::stoi(cells[1]);
      }
    } catch (const std::exception& e) {
      throw ParseError("measurements line " + std::to_string(line_no) + ": " + e.what());
    }
    set.entries.push_back(m);
  }
  set.validate(model);
  return set;
}

MeasurementSet load_measurements(const std::filesystem::path& path, const NetworkModel& model) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return measurements_from_csv(ss.str(), model);
}

}  // namespace gridsec
