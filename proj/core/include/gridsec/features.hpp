#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridsec/records.hpp"

namespace gridsec {

inline constexpr std::size_t kFeatureBusCount = 14;
inline constexpr std::size_t kFeatureDim = 71;

// Block offsets: direct [0,42), statistical [42,50), correlation [50,53),
// physics [53,58), gradient [58,71).
struct FeatureBlocks {
  static constexpr std::size_t direct = 0;
  static constexpr std::size_t statistical = 42;
  static constexpr std::size_t correlation = 50;
  static constexpr std::size_t physics = 53;
  static constexpr std::size_t gradient = 58;
};

struct FeatureVector {
  Eigen::VectorXd values;

  double v(int bus) const { return values(bus - 1); }
  double p(int bus) const { return values(13 + bus); }
  double q(int bus) const { return values(27 + bus); }
  // V_{k+1} - V_k for k = 1..13
  double gradient(int k) const { return values(static_cast<Eigen::Index>(FeatureBlocks::gradient) + k - 1); }
  Eigen::VectorXd block(std::size_t offset, std::size_t size) const {
    return values.segment(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(size));
  }

  static const std::vector<std::string>& names();
  // True for features measured in power units (P, Q and their aggregates).
  static bool is_power(std::size_t index);
};

// P and Q are divided by base_mva; V in p.u. Correlations are across buses.
FeatureVector extract_features(const FixtureRecord& snapshot, double base_mva = 100.0);

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct BaselineStats {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;  // regularized covariance
  double lambda = 0.0;    // loading applied in correlation scale
  std::vector<std::string> sources;
  double max_training_chi2 = 0.0;
  double threshold = 0.0;  // max_training_chi2 * threshold_factor
  std::vector<std::size_t> constant;  // excluded from the distance

  std::string to_json() const;
  static BaselineStats from_json(const std::string& text);
};

struct BaselineOptions {
  double max_condition = 1e6;
  double min_lambda = 1e-6;
  double threshold_factor = 1.1;
  // A feature whose sample SD is at or below constant_rel times the largest
  // mean of its unit class is treated as constant.
  double constant_rel = 1e-7;
};

// Sample mean and covariance S; S is scaled to unit diagonal, loaded with
// lambda so the condition number stays below max_condition, then scaled back.
BaselineStats fit_baseline(const std::vector<FeatureVector>& samples,
                           const std::vector<std::string>& sources = {},
                           const BaselineOptions& options = {});

double feature_chi_square(const FeatureVector& f, const BaselineStats& b);

}  // namespace gridsec
