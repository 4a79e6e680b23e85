#include "gridsec/finding.hpp"

#include <stdexcept>

namespace gridsec {

std::string to_string(RuleKind rule) {
  switch (rule) {
    case RuleKind::SensitivityBound: return "SensitivityBound";
    case RuleKind::RampRate: return "RampRate";
    case RuleKind::ZipViolation: return "ZipViolation";
    case RuleKind::CompensationEntropy: return "CompensationEntropy";
    case RuleKind::GradientCoherence: return "GradientCoherence";
    case RuleKind::SignFlip: return "SignFlip";
    case RuleKind::LossSurge: return "LossSurge";
    case RuleKind::OpenBreakerFlow: return "OpenBreakerFlow";
    case RuleKind::IslandBalance: return "IslandBalance";
    case RuleKind::VoltageDeviation: return "VoltageDeviation";
    case RuleKind::CorrelationShift: return "CorrelationShift";
    case RuleKind::BreakerPairMismatch: return "BreakerPairMismatch";
    case RuleKind::MarkerChange: return "MarkerChange";
  }
  return "?";
}

std::string to_string(Severity severity) {
  switch (severity) {
    case Severity::Info: return "Info";
    case Severity::Warning: return "Warning";
    case Severity::Violation: return "Violation";
  }
  return "?";
}

double Finding::value(const std::string& name) const {
  for (const auto& [k, v] : values) {
    if (k == name) return v;
  }
  throw std::out_of_range("finding has no value '" + name + "'");
}

bool Finding::has_value(const std::string& name) const {
  for (const auto& kv : values) {
    if (kv.first == name) return true;
  }
  return false;
}

}  // namespace gridsec
