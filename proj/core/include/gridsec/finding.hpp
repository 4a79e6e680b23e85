#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gridsec {

enum class RuleKind {
  SensitivityBound,
  RampRate,
  ZipViolation,
  CompensationEntropy,
  GradientCoherence,
  SignFlip,
  LossSurge,
  OpenBreakerFlow,
  IslandBalance,
  VoltageDeviation,
  CorrelationShift,
  BreakerPairMismatch,
  MarkerChange,
};

enum class Severity { Info, Warning, Violation };

std::string to_string(RuleKind rule);
std::string to_string(Severity severity);

struct Finding {
  RuleKind rule = RuleKind::SensitivityBound;
  Severity severity = Severity::Info;
  std::string subject;  // "bus 3", "branch 2-4", "segment seg2 / CB6_13"
  std::string message;
  std::vector<std::pair<std::string, double>> values;
  // Display diffs name what the reference showed and what was observed.
  std::string reference;
  std::string observed;

  double value(const std::string& name) const;
  bool has_value(const std::string& name) const;
};

}  // namespace gridsec
