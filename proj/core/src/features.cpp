#include "gridsec/features.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "gridsec/error.hpp"

namespace gridsec {

const std::vector<std::string>& FeatureVector::names() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> n;
    for (const char* ch : {"V", "P", "Q"}) {
      for (std::size_t b = 1; b <= kFeatureBusCount; ++b) n.push_back(ch + std::to_string(b));
    }
    for (const char* s : {"mean_V", "std_V", "min_V", "max_V", "mean_P", "std_P", "min_P", "max_P"}) {
      n.emplace_back(s);
    }
    for (const char* s : {"rho_VP", "rho_VQ", "rho_PQ"}) n.emplace_back(s);
    for (const char* s : {"P_total", "Q_total", "PF", "V_stability", "P_imbalance"}) n.emplace_back(s);
    for (std::size_t k = 1; k < kFeatureBusCount; ++k) {
      n.push_back("dV" + std::to_string(k) + "_" + std::to_string(k + 1));
    }
    return n;
  }();
  return kNames;
}

bool FeatureVector::is_power(std::size_t j) {
  if (j >= kFeatureBusCount && j < 3 * kFeatureBusCount) return true;
  if (j >= FeatureBlocks::statistical + 4 && j < FeatureBlocks::correlation) return true;
  const std::size_t k = j - FeatureBlocks::physics;
  return j >= FeatureBlocks::physics && (k == 0 || k == 1 || k == 4);
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double saa = (da * da).sum();
  const double sbb = (db * db).sum();
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::clamp((da * db).sum() / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace {

double population_sd(const Eigen::VectorXd& x) {
  return std::sqrt((x.array() - x.mean()).square().mean());
}

}  // namespace

FeatureVector extract_features(const FixtureRecord& snapshot, double base_mva) {
  constexpr auto n = static_cast<Eigen::Index>(kFeatureBusCount);
  Eigen::VectorXd v(n), p(n), q(n);
  std::vector<char> seen(kFeatureBusCount, 0);
  for (const BusRow& row : snapshot.buses) {
    if (row.bus < 1 || row.bus > static_cast<int>(kFeatureBusCount)) {
      throw ModelError("feature extraction: unexpected bus " + std::to_string(row.bus));
    }
    const auto i = static_cast<Eigen::Index>(row.bus - 1);
    v(i) = row.v_pu;
    p(i) = row.p_mw / base_mva;
    q(i) = row.q_mvar / base_mva;
    seen[static_cast<std::size_t>(i)] = 1;
  }
  for (std::size_t i = 0; i < kFeatureBusCount; ++i) {
    if (!seen[i]) throw ModelError("feature extraction: missing channels for bus " + std::to_string(i + 1));
  }

  FeatureVector f;
  f.values.resize(static_cast<Eigen::Index>(kFeatureDim));
  f.values << v, p, q, v.mean(), population_sd(v), v.minCoeff(), v.maxCoeff(), p.mean(),
      population_sd(p), p.minCoeff(), p.maxCoeff(), pearson(v, p), pearson(v, q), pearson(p, q),
      Eigen::VectorXd::Zero(5), v.tail(n - 1) - v.head(n - 1);

  double losses = 0.0;
  for (const BranchRow& br : snapshot.branches) losses += br.loss_mw / base_mva;
  const double pt = p.sum();
  const double qt = q.sum();
  const double s = std::hypot(pt, qt);
  const double margin = std::min((v.array() - 0.95).minCoeff(), (1.05 - v.array()).minCoeff());
  f.values.segment<5>(static_cast<Eigen::Index>(FeatureBlocks::physics))
      << pt, qt, s > 0.0 ? std::abs(pt) / s : 1.0, margin, std::abs(pt - losses);
  return f;
}

BaselineStats fit_baseline(const std::vector<FeatureVector>& samples,
                           const std::vector<std::string>& sources,
                           const BaselineOptions& options) {
  if (samples.size() < 2) throw std::invalid_argument("fit_baseline needs at least two snapshots");
  const Eigen::Index d = samples.front().values.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(samples.size()), d);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].values.size() != d) throw std::invalid_argument("feature dimension mismatch");
    x.row(static_cast<Eigen::Index>(i)) = samples[i].values.transpose();
  }
  BaselineStats b;
  b.sources = sources;
  b.mu = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - b.mu.transpose();
  const Eigen::MatrixXd s = centered.transpose() * centered / static_cast<double>(x.rows() - 1);

  // Features that never move in training (slack V, zero-injection buses that
  // only carry rounding noise) carry no scale information and are left out.
  // The cutoff is relative to the largest mean in the same unit class so that
  // rescaling P and Q leaves the selection unchanged.
  double ref[2] = {0.0, 0.0};
  for (Eigen::Index j = 0; j < d; ++j) {
    double& r = ref[FeatureVector::is_power(static_cast<std::size_t>(j)) ? 1 : 0];
    r = std::max(r, std::abs(b.mu(j)));
  }
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(d);
  std::vector<Eigen::Index> live;
  b.constant.clear();
  for (Eigen::Index j = 0; j < d; ++j) {
    const double cut = options.constant_rel * ref[FeatureVector::is_power(static_cast<std::size_t>(j)) ? 1 : 0];
    if (std::sqrt(std::max(s(j, j), 0.0)) > cut) {
      scale(j) = std::sqrt(s(j, j));
      live.push_back(j);
    } else {
      b.constant.push_back(static_cast<std::size_t>(j));
    }
  }
  if (live.empty()) throw std::invalid_argument("fit_baseline: every feature is constant");
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index r : live) {
    for (Eigen::Index q : live) c(r, q) = s(r, q) / (scale(r) * scale(q));
  }
  const Eigen::MatrixXd c_live = c(live, live);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c_live, Eigen::EigenvaluesOnly);
  const double lo = std::max(eig.eigenvalues().minCoeff(), 0.0);
  const double hi = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  const double k = options.max_condition;
  b.lambda = std::max(options.min_lambda, (hi - k * lo) / (k - 1.0));
  Eigen::MatrixXd reg = c;
  for (Eigen::Index j : live) reg(j, j) += b.lambda;
  b.sigma = scale.asDiagonal() * reg * scale.asDiagonal();
  b.sigma = 0.5 * (b.sigma + b.sigma.transpose());

  for (const FeatureVector& f : samples) b.max_training_chi2 = std::max(b.max_training_chi2, feature_chi_square(f, b));
  b.threshold = b.max_training_chi2 * options.threshold_factor;
  return b;
}

double feature_chi_square(const FeatureVector& f, const BaselineStats& b) {
  Eigen::VectorXd diff = f.values - b.mu;
  for (std::size_t j : b.constant) diff(static_cast<Eigen::Index>(j)) = 0.0;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(b.sigma);
  return std::max(0.0, diff.dot(ldlt.solve(diff)));
}

std::string BaselineStats::to_json() const {
  nlohmann::json doc;
  doc["dimension"] = mu.size();
  doc["lambda"] = lambda;
  doc["sources"] = sources;
  doc["max_training_chi2"] = max_training_chi2;
  doc["threshold"] = threshold;
  doc["constant"] = constant;
  doc["mu"] = std::vector<double>(mu.data(), mu.data() + mu.size());
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < sigma.rows(); ++i) {
    rows.emplace_back(sigma.cols());
    for (Eigen::Index j = 0; j < sigma.cols(); ++j) rows.back()[static_cast<std::size_t>(j)] = sigma(i, j);
  }
  doc["sigma"] = rows;
  return doc.dump(1);
}

BaselineStats BaselineStats::from_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    BaselineStats b;
    const auto mu = doc.at("mu").get<std::vector<double>>();
    const auto rows = doc.at("sigma").get<std::vector<std::vector<double>>>();
    const auto d = static_cast<Eigen::Index>(mu.size());
    b.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), d);
    if (static_cast<Eigen::Index>(rows.size()) != d) throw ParseError("baseline: sigma shape");
    b.sigma.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != d) {
        throw ParseError("baseline: sigma shape");
      }
      for (Eigen::Index j = 0; j < d; ++j) b.sigma(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    b.lambda = doc.value("lambda", 0.0);
    b.sources = doc.value("sources", std::vector<std::string>{});
    b.max_training_chi2 = doc.value("max_training_chi2", 0.0);
    b.threshold = doc.value("threshold", 0.0);
    b.constant = doc.value("constant", std::vector<std::size_t>{});
    for (std::size_t j : b.constant) {
      if (j >= mu.size()) throw ParseError("baseline: constant index out of range");
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("baseline artifact: ") + e.what());
  }
}

}  // namespace gridsec
