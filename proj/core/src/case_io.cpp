#include "gridsec/case_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gridsec/error.hpp"

namespace gridsec {

using nlohmann::json;

namespace {

json limit_to_json(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

double limit_from_json(const json& j, const char* key, double fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<double>();
}

}  // namespace

std::string model_to_json(const NetworkModel& model) {
  json doc;
  doc["base_mva"] = model.base_mva();
  json buses = json::array();
  for (const Bus& b : model.buses()) {
    buses.push_back({{"id", b.id},
                     {"kind", to_string(b.kind)},
                     {"v_setpoint", b.v_setpoint},
                     {"p_load", b.p_load},
                     {"q_load", b.q_load},
                     {"p_gen", b.p_gen},
                     {"q_min", limit_to_json(b.q_min)},
                     {"q_max", limit_to_json(b.q_max)},
                     {"g_shunt", b.g_shunt},
                     {"b_shunt", b.b_shunt}});
  }
  json branches = json::array();
  for (const Branch& br : model.branches()) {
    branches.push_back({{"from", br.from},
                        {"to", br.to},
                        {"r", br.r},
                        {"x", br.x},
                        {"b_shunt", br.b_shunt},
                        {"tap", br.tap},
                        {"breaker_from", to_string(br.breaker_from)},
                        {"breaker_to", to_string(br.breaker_to)}});
  }
  doc["buses"] = std::move(buses);
  doc["branches"] = std::move(branches);
  return doc.dump(2);
}

NetworkModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("case file: ") + e.what());
  }
  try {
    std::vector<Bus> buses;
    for (const json& jb : doc.at("buses")) {
      Bus b;
      b.id = jb.at("id").get<int>();
      b.kind = bus_kind_from_string(jb.at("kind").get<std::string>());
      b.v_setpoint = jb.value("v_setpoint", 1.0);
      b.p_load = jb.value("p_load", 0.0);
      b.q_load = jb.value("q_load", 0.0);
      b.p_gen = jb.value("p_gen", 0.0);
      b.q_min = limit_from_json(jb, "q_min", -INFINITY);
      b.q_max = limit_from_json(jb, "q_max", INFINITY);
      b.g_shunt = jb.value("g_shunt", 0.0);
      b.b_shunt = jb.value("b_shunt", 0.0);
      buses.push_back(b);
    }
    std::vector<Branch> branches;
    for (const json& jr : doc.at("branches")) {
      Branch br;
      br.from = jr.at("from").get<int>();
      br.to = jr.at("to").get<int>();
      br.r = jr.value("r", 0.0);
      br.x = jr.at("x").get<double>();
      br.b_shunt = jr.value("b_shunt", 0.0);
      br.tap = jr.value("tap", 1.0);
      br.breaker_from = breaker_from_string(jr.value("breaker_from", std::string("Closed")));
      br.breaker_to = breaker_from_string(jr.value("breaker_to", std::string("Closed")));
      branches.push_back(br);
    }
    return NetworkModel(std::move(buses), std::move(branches), doc.value("base_mva", 100.0));
  } catch (const json::exception& e) {
    throw ParseError(std::string("case file: ") + e.what());
  }
}

NetworkModel load_case_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

void save_case_file(const NetworkModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << model_to_json(model) << '\n';
}

}  // namespace gridsec
