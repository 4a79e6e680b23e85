#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gridsec/grid_model.hpp"

namespace gridsec::som {

// Grid rows grow southward, columns eastward.
enum class Direction { N, S, E, W, NE, NW, SE, SW };
enum class Side { North, South, East, West };

std::string to_string(Direction d);
std::string to_string(Side s);
Direction opposite(Direction d);
Side opposite(Side s);
int row_step(Direction d);
int col_step(Direction d);
int row_step(Side s);
int col_step(Side s);

struct CbMarker {
  int i = 0;
  int j = 0;
  BreakerState status = BreakerState::Closed;  // Red = Closed, Green = Opened
};

struct LineDirMarker {
  int i = 0;
  int j = 0;
  Direction dir = Direction::N;
};

struct CpMarker {
  int i = 0;
  int j = 0;
  char tag = 'A';
  std::optional<Side> edge;
};

struct LoadMarker {
  int bus = 0;
};

using Marker = std::variant<CbMarker, LineDirMarker, CpMarker, LoadMarker>;

// Throws ParseError naming the token and its position.
Marker parse_marker(const std::string& token, std::size_t position = 0);
// Accepts "a; b; c" as well as a single token.
std::vector<Marker> parse_marker_list(const std::string& text);
std::string format_marker(const Marker& m);

struct BusDisplay {
  double v = 0.0;
  std::map<std::string, double> extras;
};

struct SegmentDescriptor {
  std::string id;
  std::vector<Marker> markers;
  std::map<int, BusDisplay> bus_display;

  void validate() const;
};

SegmentDescriptor segment_from_json(const std::string& text);
std::string segment_to_json(const SegmentDescriptor& segment);
SegmentDescriptor load_segment(const std::filesystem::path& path);
// Loads every *.json in the directory, sorted by segment id.
std::vector<SegmentDescriptor> load_segments(const std::filesystem::path& dir);
std::vector<SegmentDescriptor> load_segments(const std::vector<std::filesystem::path>& files);

}  // namespace gridsec::som
