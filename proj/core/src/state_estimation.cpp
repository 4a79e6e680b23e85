#include "gridsec/state_estimation.hpp"

#include <algorithm>
#include <cmath>

#include "gridsec/chi_square.hpp"
#include "gridsec/error.hpp"
#include "gridsec/power_equations.hpp"

namespace gridsec {

StateVector StateVector::flat(const NetworkModel& model) {
  const auto n = static_cast<Eigen::Index>(model.bus_count());
  return {Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(n), model.slack_bus()};
}

Eigen::VectorXd StateVector::packed() const {
  const Eigen::Index n = v.size();
  Eigen::VectorXd x(2 * n - 1);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i != reference_bus - 1) x(k++) = theta(i);
  }
  x.tail(n) = v;
  return x;
}

void StateVector::unpack(const Eigen::VectorXd& x) {
  const Eigen::Index n = v.size();
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    theta(i) = i == reference_bus - 1 ? 0.0 : x(k++);
  }
  v = x.tail(n);
}

AcMeasurementModel::AcMeasurementModel(const NetworkModel& model, const TopologyMatrix& topology,
                                       std::vector<Measurement> layout)
    : layout_(std::move(layout)),
      branches_(model.branches()),
      y_(admittance(model, topology).y),
      n_(model.bus_count()),
      ref_(model.index_of(model.slack_bus())) {
  for (std::size_t k = 0; k < branches_.size(); ++k) {
    BranchAdmittance ya{};
    if (topology.in_service(k)) ya = branch_admittance(branches_[k]);
    branch_y_.push_back(ya);
  }
}

Eigen::Index AcMeasurementModel::theta_col(std::size_t i) const {
  if (i == ref_) return -1;
  return static_cast<Eigen::Index>(i < ref_ ? i : i - 1);
}

Eigen::Index AcMeasurementModel::v_col(std::size_t i) const {
  return static_cast<Eigen::Index>(n_ - 1 + i);
}

Eigen::VectorXd AcMeasurementModel::evaluate(const StateVector& x) const {
  const ac::Injections s = ac::injections(y_, x.v, x.theta);
  Eigen::VectorXd h(static_cast<Eigen::Index>(layout_.size()));
  for (std::size_t r = 0; r < layout_.size(); ++r) {
    const Measurement& m = layout_[r];
    const auto row = static_cast<Eigen::Index>(r);
    if (!m.is_flow()) {
      const auto i = static_cast<Eigen::Index>(m.bus - 1);
      switch (m.kind) {
        case MeasurementKind::Vm: h(row) = x.v(i); break;
        case MeasurementKind::Pinj: h(row) = s.p(i); break;
        default: h(row) = s.q(i); break;
      }
      continue;
    }
    const Branch& br = branches_[m.branch];
    const auto f = static_cast<Eigen::Index>(br.from - 1);
    const auto t = static_cast<Eigen::Index>(br.to - 1);
    const ac::BranchFlow bf =
        ac::branch_flow(branch_y_[m.branch], x.v(f), x.v(t), x.theta(f), x.theta(t));
    const ac::EndFlow& e = m.end == BranchEnd::From ? bf.from : bf.to;
    h(row) = m.kind == MeasurementKind::Pflow ? e.p : e.q;
  }
  return h;
}

Eigen::MatrixXd AcMeasurementModel::jacobian(const StateVector& x) const {
  const ac::InjectionJacobian jac = ac::injection_jacobian(y_, x.v, x.theta);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(layout_.size()),
                                            static_cast<Eigen::Index>(state_dimension()));
  for (std::size_t r = 0; r < layout_.size(); ++r) {
    const Measurement& m = layout_[r];
    const auto row = static_cast<Eigen::Index>(r);
    if (m.kind == MeasurementKind::Vm) {
      h(row, v_col(static_cast<std::size_t>(m.bus - 1))) = 1.0;
      continue;
    }
    if (!m.is_flow()) {
      const auto i = static_cast<Eigen::Index>(m.bus - 1);
      const Eigen::MatrixXd& dth = m.kind == MeasurementKind::Pinj ? jac.dp_dtheta : jac.dq_dtheta;
      const Eigen::MatrixXd& dv = m.kind == MeasurementKind::Pinj ? jac.dp_dv : jac.dq_dv;
      for (std::size_t j = 0; j < n_; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (const Eigen::Index c = theta_col(j); c >= 0) h(row, c) = dth(i, jj);
        h(row, v_col(j)) = dv(i, jj);
      }
      continue;
    }
    const Branch& br = branches_[m.branch];
    const auto f = static_cast<std::size_t>(br.from - 1);
    const auto t = static_cast<std::size_t>(br.to - 1);
    const auto fi = static_cast<Eigen::Index>(f);
    const auto ti = static_cast<Eigen::Index>(t);
    const ac::EndFlowGradient g =
        m.end == BranchEnd::From
            ? ac::from_end_gradient(branch_y_[m.branch], x.v(fi), x.v(ti), x.theta(fi), x.theta(ti))
            : ac::to_end_gradient(branch_y_[m.branch], x.v(fi), x.v(ti), x.theta(fi), x.theta(ti));
    const double* d = m.kind == MeasurementKind::Pflow ? g.dp : g.dq;
    if (const Eigen::Index c = theta_col(f); c >= 0) h(row, c) += d[0];
    if (const Eigen::Index c = theta_col(t); c >= 0) h(row, c) += d[1];
    h(row, v_col(f)) += d[2];
    h(row, v_col(t)) += d[3];
  }
  return h;
}

MeasurementSet measure(const NetworkModel& model, const TopologyMatrix& topology,
                       const StateVector& x, MeasurementSet layout) {
  const AcMeasurementModel hm(model, topology, layout.entries);
  layout.set_values(hm.evaluate(x));
  return layout;
}

Eigen::VectorXd EstimationResult::normalized_residuals() const {
  Eigen::VectorXd rn = Eigen::VectorXd::Zero(residuals.size());
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    if (residual_sd(i) > 0.0) rn(i) = std::abs(residuals(i)) / residual_sd(i);
  }
  return rn;
}

EstimationResult wls_estimate_ac(const NetworkModel& model, const MeasurementSet& measurements,
                                 const AcEstimationOptions& options) {
  if (!(options.delta > 0.0)) throw std::invalid_argument("wls_estimate_ac: delta must be > 0");
  measurements.validate(model);
  const TopologyMatrix topo = options.topology ? *options.topology : topology_from_breakers(model);
  const AcMeasurementModel hm(model, topo, measurements.entries);
  const std::size_t m = measurements.size();
  const std::size_t n = hm.state_dimension();
  if (m < n) {
    throw ObservabilityError("unobservable: " + std::to_string(m) + " measurements for " +
                             std::to_string(n) + " states");
  }
  const Eigen::VectorXd z = measurements.values();
  const Eigen::VectorXd w = measurements.sigmas().array().square().inverse();

  EstimationResult res;
  res.x_hat = options.initial ? *options.initial : StateVector::flat(model);
  res.x_hat.reference_bus = hm.reference_bus();
  res.x_hat.theta(hm.reference_bus() - 1) = 0.0;

  Eigen::MatrixXd h;
  Eigen::LLT<Eigen::MatrixXd> gain;
  auto factor = [&](const Eigen::MatrixXd& hh) {
    gain.compute(hh.transpose() * w.asDiagonal() * hh);
    if (gain.info() != Eigen::Success) {
      throw ObservabilityError("unobservable: gain matrix is singular");
    }
  };
  for (int it = 1; it <= options.max_iter; ++it) {
    h = hm.jacobian(res.x_hat);
    factor(h);
    const Eigen::VectorXd r = z - hm.evaluate(res.x_hat);
    const Eigen::VectorXd dx = gain.solve(h.transpose() * w.cwiseProduct(r));
    if (!dx.allFinite()) throw ObservabilityError("unobservable: gain matrix is singular");
    res.x_hat.unpack(res.x_hat.packed() + dx);
    res.iterations = it;
    if (dx.cwiseAbs().maxCoeff() < options.delta) {
      res.converged = true;
      break;
    }
  }

  res.residuals = z - hm.evaluate(res.x_hat);
  res.j_value = chi_square_statistic(res.residuals, measurements.sigmas());
  h = hm.jacobian(res.x_hat);
  factor(h);
  const Eigen::MatrixXd ginv_ht = gain.solve(h.transpose());
  res.residual_sd.resize(static_cast<Eigen::Index>(m));
  const Eigen::VectorXd sig = measurements.sigmas();
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) {
    const double var = sig(i) * sig(i) - h.row(i).dot(ginv_ht.col(i));
    res.residual_sd(i) = var > 1e-10 * sig(i) * sig(i) ? std::sqrt(var) : 0.0;
  }
  return res;
}

DcModel dc_measurement_matrix(const NetworkModel& model, const TopologyMatrix& topology) {
  const std::size_t n = model.bus_count();
  const std::size_t ref = model.index_of(model.slack_bus());
  auto col = [&](std::size_t i) -> Eigen::Index {
    if (i == ref) return -1;
    return static_cast<Eigen::Index>(i < ref ? i : i - 1);
  };
  std::vector<std::size_t> live;
  for (std::size_t k = 0; k < model.branch_count(); ++k) {
    if (topology.in_service(k)) live.push_back(k);
  }
  DcModel dc;
  dc.reference_bus = model.slack_bus();
  dc.h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n + live.size()),
                               static_cast<Eigen::Index>(n - 1));
  for (std::size_t i = 0; i < n; ++i) dc.labels.push_back("Pinj@" + std::to_string(i + 1));
  for (std::size_t r = 0; r < live.size(); ++r) {
    const Branch& br = model.branch(live[r]);
    const double b = 1.0 / (br.x * br.tap);
    const auto f = static_cast<std::size_t>(br.from - 1);
    const auto t = static_cast<std::size_t>(br.to - 1);
    const auto row = static_cast<Eigen::Index>(n + r);
    const auto fr = static_cast<Eigen::Index>(f);
    const auto tr = static_cast<Eigen::Index>(t);
    if (const Eigen::Index c = col(f); c >= 0) {
      dc.h(row, c) += b;
      dc.h(fr, c) += b;
      dc.h(tr, c) -= b;
    }
    if (const Eigen::Index c = col(t); c >= 0) {
      dc.h(row, c) -= b;
      dc.h(fr, c) -= b;
      dc.h(tr, c) += b;
    }
    dc.labels.push_back("Pflow@" + std::to_string(br.from) + "-" + std::to_string(br.to));
  }
  return dc;
}

LinearEstimate wls_estimate_dc(const Eigen::MatrixXd& h, const Eigen::VectorXd& z,
                               const Eigen::VectorXd& sigma) {
  if (z.size() != h.rows() || sigma.size() != h.rows()) {
    throw std::invalid_argument("wls_estimate_dc: dimension mismatch");
  }
  const Eigen::VectorXd s = sigma.cwiseInverse();
  const Eigen::MatrixXd a = s.asDiagonal() * h;
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < h.cols()) {
    throw ObservabilityError("rank-deficient measurement matrix (rank " +
                             std::to_string(qr.rank()) + " < " + std::to_string(h.cols()) + ")");
  }
  LinearEstimate est;
  est.x_hat = qr.solve(s.cwiseProduct(z));
  est.residuals = z - h * est.x_hat;
  est.j_value = chi_square_statistic(est.residuals, sigma);
  return est;
}

double chi_square_statistic(const Eigen::VectorXd& residuals, const Eigen::VectorXd& sigma) {
  return residuals.cwiseQuotient(sigma).squaredNorm();
}

BddVerdict bdd_classify(const EstimationResult& result, double threshold) {
  BddVerdict v;
  v.threshold = threshold;
  v.j_value = result.j_value;
  v.flagged = result.j_value > threshold;
  if (v.flagged && result.residual_sd.size() == result.residuals.size()) {
    const Eigen::VectorXd rn = result.normalized_residuals();
    Eigen::Index idx = 0;
    if (rn.size() > 0 && rn.maxCoeff(&idx) > 0.0) v.suspect = static_cast<std::size_t>(idx);
  }
  return v;
}

BadDataRemoval iterative_bad_data_removal(const NetworkModel& model,
                                          const MeasurementSet& measurements,
                                          const ThresholdRule& threshold,
                                          const AcEstimationOptions& options) {
  BadDataRemoval out;
  out.remaining = measurements;
  std::vector<std::size_t> original(measurements.size());
  for (std::size_t i = 0; i < original.size(); ++i) original[i] = i;
  const std::size_t n = 2 * model.bus_count() - 1;
  for (;;) {
    out.result = wls_estimate_ac(model, out.remaining, options);
    const std::size_t m = out.remaining.size();
    if (out.result.j_value <= threshold(static_cast<int>(m - n))) return out;
    if (m - 1 <= n) {
      throw ObservabilityError("observability lost before the chi-square test passed (" +
                               std::to_string(out.removed.size()) + " removed)");
    }
    const Eigen::VectorXd rn = out.result.normalized_residuals();
    Eigen::Index idx = 0;
    if (!(rn.maxCoeff(&idx) > 0.0)) {
      throw ObservabilityError("no identifiable measurement left to remove");
    }
    const auto k = static_cast<std::size_t>(idx);
    out.removed.push_back(original[k]);
    original.erase(original.begin() + idx);
    out.remaining = out.remaining.without(k);
  }
}

BadDataRemoval iterative_bad_data_removal(const NetworkModel& model,
                                          const MeasurementSet& measurements, double threshold,
                                          const AcEstimationOptions& options) {
  return iterative_bad_data_removal(
      model, measurements, [threshold](int) { return threshold; }, options);
}

}  // namespace gridsec
