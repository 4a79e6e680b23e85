#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridsec/grid_model.hpp"

namespace gridsec {

enum class MeasurementKind { Vm, Pinj, Qinj, Pflow, Qflow };
enum class BranchEnd { From, To };

std::string to_string(MeasurementKind kind);
MeasurementKind measurement_kind_from_string(const std::string& s);

struct Measurement {
  MeasurementKind kind = MeasurementKind::Vm;
  int bus = 0;              // Vm, Pinj, Qinj
  std::size_t branch = 0;   // Pflow, Qflow
  BranchEnd end = BranchEnd::From;
  double value = 0.0;       // p.u.
  double sigma = 0.01;      // p.u.

  bool is_flow() const { return kind == MeasurementKind::Pflow || kind == MeasurementKind::Qflow; }
};

struct NoiseModel {
  double sigma_v = 0.01;
  double sigma_power = 0.02;
};

struct MeasurementSet {
  std::vector<Measurement> entries;
  std::optional<std::string> timestamp;

  std::size_t size() const { return entries.size(); }
  Eigen::VectorXd values() const;
  Eigen::VectorXd sigmas() const;
  void set_values(const Eigen::VectorXd& z);
  // Throws ModelError on a bad location or non-positive sigma.
  void validate(const NetworkModel& model) const;
  // Position of the first entry of this kind at this bus.
  std::optional<std::size_t> find(MeasurementKind kind, int bus) const;
  MeasurementSet without(std::size_t index) const;
};

// "Vm@3", "Pinj@9", "Pflow@2-4" (from end), "Pflow@4-2" (to end).
std::string measurement_label(const Measurement& m, const NetworkModel& model);

// Vm, Pinj, Qinj at every bus in bus order: 3k entries, values zero.
MeasurementSet bus_measurement_layout(const NetworkModel& model, const NoiseModel& noise = {});
// Bus channels plus P/Q flows at both ends of every branch.
MeasurementSet full_measurement_layout(const NetworkModel& model, const NoiseModel& noise = {});

// Gaussian noise with each entry's sigma.
void add_gaussian_noise(MeasurementSet& set, std::mt19937_64& rng);

// CSV with columns kind,location,value,sigma (location is a bus id or "from-to").
std::string measurements_to_csv(const MeasurementSet& set, const NetworkModel& model);
MeasurementSet measurements_from_csv(const std::string& text, const NetworkModel& model);
MeasurementSet load_measurements(const std::filesystem::path& path, const NetworkModel& model);

}  // namespace gridsec
