#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridsec/grid_model.hpp"
#include "gridsec/measurement.hpp"

namespace gridsec {

// Bus voltages. theta holds every bus; the reference entry is pinned to 0 and
// is not an estimation variable, so the free dimension is 2k - 1.
struct StateVector {
  Eigen::VectorXd v;
  Eigen::VectorXd theta;  // rad
  int reference_bus = 1;

  static StateVector flat(const NetworkModel& model);
  std::size_t dimension() const { return static_cast<std::size_t>(2 * v.size() - 1); }
  // [theta without reference, v]
  Eigen::VectorXd packed() const;
  void unpack(const Eigen::VectorXd& x);
};

// h(x) and its Jacobian for an arbitrary AC measurement list.
class AcMeasurementModel {
 public:
  AcMeasurementModel(const NetworkModel& model, const TopologyMatrix& topology,
                     std::vector<Measurement> layout);

  std::size_t measurement_count() const { return layout_.size(); }
  std::size_t state_dimension() const { return 2 * n_ - 1; }
  int reference_bus() const { return ref_ + 1; }

  Eigen::VectorXd evaluate(const StateVector& x) const;
  Eigen::MatrixXd jacobian(const StateVector& x) const;

 private:
  Eigen::Index theta_col(std::size_t bus_index) const;
  Eigen::Index v_col(std::size_t bus_index) const;

  std::vector<Measurement> layout_;
  std::vector<Branch> branches_;
  std::vector<BranchAdmittance> branch_y_;
  Eigen::MatrixXcd y_;
  std::size_t n_ = 0;
  std::size_t ref_ = 0;
};

// Noise-free measurement values for a state.
MeasurementSet measure(const NetworkModel& model, const TopologyMatrix& topology,
                       const StateVector& x, MeasurementSet layout);

struct AcEstimationOptions {
  double delta = 1e-6;  // max |x_k - x_{k-1}|
  int max_iter = 50;
  std::optional<StateVector> initial;  // flat start when absent
  std::optional<TopologyMatrix> topology;  // breaker topology when absent
};

struct EstimationResult {
  StateVector x_hat;
  Eigen::VectorXd residuals;    // z - h(x_hat)
  Eigen::VectorXd residual_sd;  // sqrt(diag(R - H G^-1 H^T)); 0 for critical measurements
  double j_value = 0.0;
  int iterations = 0;
  bool converged = false;

  Eigen::VectorXd normalized_residuals() const;
};

EstimationResult wls_estimate_ac(const NetworkModel& model, const MeasurementSet& measurements,
                                 const AcEstimationOptions& options = {});

// Linear model: active-power injections at every bus followed by from-end
// flows of in-service branches, angles of non-reference buses as state.
struct DcModel {
  Eigen::MatrixXd h;
  std::vector<std::string> labels;
  int reference_bus = 1;
};

DcModel dc_measurement_matrix(const NetworkModel& model, const TopologyMatrix& topology);

struct LinearEstimate {
  Eigen::VectorXd x_hat;
  Eigen::VectorXd residuals;
  double j_value = 0.0;
};

// Closed-form WLS via QR of the whitened system. Throws ObservabilityError
// when H is rank deficient.
LinearEstimate wls_estimate_dc(const Eigen::MatrixXd& h, const Eigen::VectorXd& z,
                               const Eigen::VectorXd& sigma);

double chi_square_statistic(const Eigen::VectorXd& residuals, const Eigen::VectorXd& sigma);

struct BddVerdict {
  bool flagged = false;
  double threshold = 0.0;
  double j_value = 0.0;
  std::optional<std::size_t> suspect;
};

BddVerdict bdd_classify(const EstimationResult& result, double threshold);

using ThresholdRule = std::function<double(int degrees_of_freedom)>;

struct BadDataRemoval {
  EstimationResult result;
  MeasurementSet remaining;
  std::vector<std::size_t> removed;  // indices into the original set
};

// Largest-normalized-residual elimination until J <= threshold(m - n).
BadDataRemoval iterative_bad_data_removal(const NetworkModel& model,
                                          const MeasurementSet& measurements,
                                          const ThresholdRule& threshold,
                                          const AcEstimationOptions& options = {});
BadDataRemoval iterative_bad_data_removal(const NetworkModel& model,
                                          const MeasurementSet& measurements, double threshold,
                                          const AcEstimationOptions& options = {});

}  // namespace gridsec
