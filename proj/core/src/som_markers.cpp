#include "gridsec/som_markers.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gridsec/error.hpp"

namespace gridsec::som {

using nlohmann::json;

std::string to_string(Direction d) {
  switch (d) {
    case Direction::N: return "N";
    case Direction::S: return "S";
    case Direction::E: return "E";
    case Direction::W: return "W";
    case Direction::NE: return "NE";
    case Direction::NW: return "NW";
    case Direction::SE: return "SE";
    case Direction::SW: return "SW";
  }
  return "?";
}

std::string to_string(Side s) {
  switch (s) {
    case Side::North: return "north";
    case Side::South: return "south";
    case Side::East: return "east";
    case Side::West: return "west";
  }
  return "?";
}

Direction opposite(Direction d) {
  switch (d) {
    case Direction::N: return Direction::S;
    case Direction::S: return Direction::N;
    case Direction::E: return Direction::W;
    case Direction::W: return Direction::E;
    case Direction::NE: return Direction::SW;
    case Direction::SW: return Direction::NE;
    case Direction::NW: return Direction::SE;
    case Direction::SE: return Direction::NW;
  }
  return d;
}

Side opposite(Side s) {
  switch (s) {
    case Side::North: return Side::South;
    case Side::South: return Side::North;
    case Side::East: return Side::West;
    case Side::West: return Side::East;
  }
  return s;
}

int row_step(Direction d) {
  switch (d) {
    case Direction::N: case Direction::NE: case Direction::NW: return -1;
    case Direction::S: case Direction::SE: case Direction::SW: return 1;
    default: return 0;
  }
}

int col_step(Direction d) {
  switch (d) {
    case Direction::E: case Direction::NE: case Direction::SE: return 1;
    case Direction::W: case Direction::NW: case Direction::SW: return -1;
    default: return 0;
  }
}

int row_step(Side s) { return s == Side::North ? -1 : s == Side::South ? 1 : 0; }
int col_step(Side s) { return s == Side::East ? 1 : s == Side::West ? -1 : 0; }

namespace {

Direction direction_from(const std::string& s) {
  static const std::map<std::string, Direction> table = {
      {"N", Direction::N},   {"S", Direction::S},   {"E", Direction::E},   {"W", Direction::W},
      {"NE", Direction::NE}, {"NW", Direction::NW}, {"SE", Direction::SE}, {"SW", Direction::SW}};
  return table.at(s);
}

Side side_from(const std::string& s) {
  if (s == "north") return Side::North;
  if (s == "south") return Side::South;
  if (s == "east") return Side::East;
  return Side::West;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void reject(const std::string& token, std::size_t position, const std::string& why) {
  throw ParseError("marker " + std::to_string(position) + " '" + token + "': " + why);
}

void check_pair(int i, int j, const std::string& token, std::size_t position) {
  if (i == j) reject(token, position, "both ends name bus " + std::to_string(i));
}

}  // namespace

Marker parse_marker(const std::string& raw, std::size_t position) {
  static const std::regex cb(R"(^CB(\d+)_(\d+)(?::([RG]))?$)");
  static const std::regex line(R"(^L(\d+)_(\d+)_(N|S|E|W|NE|NW|SE|SW)$)");
  static const std::regex cp(R"(^CP(\d+)_(\d+)_([ABCD])(?::(north|south|east|west))?$)");
  static const std::regex load(R"(^Ld_(\d+)$)");
  const std::string token = trim(raw);
  std::smatch m;
  if (std::regex_match(token, m, cb)) {
    CbMarker c{std::stoi(m[1]), std::stoi(m[2]),
               m[3].matched && m[3] == "G" ? BreakerState::Open : BreakerState::Closed};
    check_pair(c.i, c.j, token, position);
    return c;
  }
  if (std::regex_match(token, m, line)) {
    LineDirMarker l{std::stoi(m[1]), std::stoi(m[2]), direction_from(m[3])};
    check_pair(l.i, l.j, token, position);
    return l;
  }
  if (std::regex_match(token, m, cp)) {
    CpMarker c{std::stoi(m[1]), std::stoi(m[2]), m[3].str()[0], std::nullopt};
    if (m[4].matched) c.edge = side_from(m[4]);
    check_pair(c.i, c.j, token, position);
    return c;
  }
  if (std::regex_match(token, m, load)) return LoadMarker{std::stoi(m[1])};
  if (token.rfind("CP", 0) == 0) reject(token, position, "expected CPi_j_{A,B,C,D}[:side]");
  if (token.rfind("CB", 0) == 0) reject(token, position, "expected CBi_j[:R|:G]");
  if (token.rfind("Ld", 0) == 0) reject(token, position, "expected Ld_i");
  if (token.rfind("L", 0) == 0) reject(token, position, "expected Li_j_{N,S,E,W,NE,NW,SE,SW}");
  reject(token, position, "unknown marker");
}

std::vector<Marker> parse_marker_list(const std::string& text) {
  std::vector<Marker> out;
  std::stringstream in(text);
  std::string token;
  std::size_t position = 0;
  while (std::getline(in, token, ';')) {
    if (trim(token).empty()) continue;
    out.push_back(parse_marker(token, position++));
  }
  return out;
}

std::string format_marker(const Marker& m) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        const auto pair = [](const char* prefix, const auto& y) {
          return prefix + std::to_string(y.i) + "_" + std::to_string(y.j);
        };
        if constexpr (std::is_same_v<T, CbMarker>) {
          return pair("CB", x) + (x.status == BreakerState::Closed ? ":R" : ":G");
        } else if constexpr (std::is_same_v<T, LineDirMarker>) {
          return pair("L", x) + "_" + to_string(x.dir);
        } else if constexpr (std::is_same_v<T, CpMarker>) {
          return pair("CP", x) + "_" + std::string(1, x.tag) + (x.edge ? ":" + to_string(*x.edge) : "");
        } else {
          return "Ld_" + std::to_string(x.bus);
        }
      },
      m);
}

void SegmentDescriptor::validate() const {
  if (id.empty()) throw ModelError("segment id is empty");
  std::set<std::pair<int, int>> lines;
  for (const Marker& m : markers) {
    if (const auto* l = std::get_if<LineDirMarker>(&m)) {
      if (!lines.insert({l->i, l->j}).second) {
        throw ModelError("segment " + id + " has two direction markers for line " +
                         std::to_string(l->i) + "_" + std::to_string(l->j));
      }
    }
  }
  for (const auto& [bus, d] : bus_display) {
    if (!(d.v > 0.0)) {
      throw ModelError("segment " + id + " displays non-positive voltage at bus " + std::to_string(bus));
    }
  }
}

SegmentDescriptor segment_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("segment JSON: ") + e.what());
  }
  SegmentDescriptor s;
  try {
    s.id = doc.at("id").get<std::string>();
    if (doc.contains("markers")) {
      const json& mk = doc.at("markers");
      if (mk.is_string()) {
        s.markers = parse_marker_list(mk.get<std::string>());
      } else {
        std::size_t pos = 0;
        for (const json& t : mk) s.markers.push_back(parse_marker(t.get<std::string>(), pos++));
      }
    }
    if (doc.contains("bus_display")) {
      for (const auto& [key, val] : doc.at("bus_display").items()) {
        BusDisplay d;
        if (val.is_number()) {
          d.v = val.get<double>();
        } else {
          for (const auto& [k, x] : val.items()) {
            if (k == "v") {
              d.v = x.get<double>();
            } else {
              d.extras[k] = x.get<double>();
            }
          }
        }
        s.bus_display[std::stoi(key)] = d;
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("segment JSON: ") + e.what());
  } catch (const ParseError& e) {
    throw ParseError("segment " + s.id + ": " + e.what());
  }
  s.validate();
  return s;
}

std::string segment_to_json(const SegmentDescriptor& segment) {
  json doc;
  doc["id"] = segment.id;
  json mk = json::array();
  for (const Marker& m : segment.markers) mk.push_back(format_marker(m));
  doc["markers"] = std::move(mk);
  json disp = json::object();
  for (const auto& [bus, d] : segment.bus_display) {
    if (d.extras.empty()) {
      disp[std::to_string(bus)] = d.v;
    } else {
      json e = d.extras;
      e["v"] = d.v;
      disp[std::to_string(bus)] = std::move(e);
    }
  }
  doc["bus_display"] = std::move(disp);
  return doc.dump(2);
}

SegmentDescriptor load_segment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return segment_from_json(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<SegmentDescriptor> load_segments(const std::vector<std::filesystem::path>& files) {
  std::vector<SegmentDescriptor> out;
  std::set<std::string> seen;
  for (const auto& f : files) {
    SegmentDescriptor s = load_segment(f);
    if (!seen.insert(s.id).second) throw ParseError("duplicate segment id '" + s.id + "' in " + f.string());
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(),
            [](const SegmentDescriptor& a, const SegmentDescriptor& b) { return a.id < b.id; });
  return out;
}

std::vector<SegmentDescriptor> load_segments(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return load_segments(files);
}

}  // namespace gridsec::som
