#include "gridsec/detector.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "gridsec/error.hpp"
#include "gridsec/features.hpp"

namespace gridsec {

namespace {

std::string bus_subject(int bus) { return "bus " + std::to_string(bus); }

std::string branch_subject(int a, int b) {
  return "branch " + std::to_string(a) + "-" + std::to_string(b);
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

struct Aligned {
  std::vector<int> ids;
  Eigen::VectorXd v, p, q, vb, pb, qb;  // p.u.
};

Aligned align(const FixtureRecord& snap, const FixtureRecord& base, const NetworkModel& model) {
  const std::size_t n = model.bus_count();
  if (snap.buses.size() != n || base.buses.size() != n) {
    throw ModelError("snapshot and baseline must cover all " + std::to_string(n) + " buses");
  }
  Aligned a;
  const auto ni = static_cast<Eigen::Index>(n);
  a.v.resize(ni);
  a.p.resize(ni);
  a.q.resize(ni);
  a.vb.resize(ni);
  a.pb.resize(ni);
  a.qb.resize(ni);
  const double base_mva = model.base_mva();
  for (std::size_t i = 0; i < n; ++i) {
    const int id = static_cast<int>(i) + 1;
    const BusRow& s = snap.bus(id);
    const BusRow& b = base.bus(id);
    const auto k = static_cast<Eigen::Index>(i);
    a.ids.push_back(id);
    a.v(k) = s.v_pu;
    a.p(k) = s.p_mw / base_mva;
    a.q(k) = s.q_mvar / base_mva;
    a.vb(k) = b.v_pu;
    a.pb(k) = b.p_mw / base_mva;
    a.qb(k) = b.q_mvar / base_mva;
  }
  return a;
}

void measurement_rules(const Aligned& a, const NetworkModel& model, const RuleConfig& cfg,
                       std::vector<Finding>& out) {
  const Eigen::Index n = a.v.size();
  const Eigen::VectorXd dv = a.v - a.vb;
  const Eigen::VectorXd dp = a.p - a.pb;

  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(dv(i)) < cfg.sensitivity_min_dv || std::abs(dp(i)) < cfg.sensitivity_min_dp) continue;
    const double s = dp(i) / dv(i);
    if (s >= cfg.sensitivity_lo && s <= cfg.sensitivity_hi) continue;
    Finding f{RuleKind::SensitivityBound, Severity::Violation, bus_subject(a.ids[i]),
              "dP/dV = " + fmt(dp(i)) + "/" + fmt(dv(i)) + " = " + fmt(s, 3) + " outside [" +
                  fmt(cfg.sensitivity_lo, 2) + ", " + fmt(cfg.sensitivity_hi, 2) + "]",
              {{"bus", a.ids[i]}, {"dP", dp(i)}, {"dV", dv(i)}, {"sensitivity", s},
               {"lo", cfg.sensitivity_lo}, {"hi", cfg.sensitivity_hi}}, "", ""};
    out.push_back(std::move(f));
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const Bus& bus = model.bus(a.ids[i]);
    if (bus.kind != BusKind::Generator || std::abs(a.pb(i)) < cfg.ramp_min_base) continue;
    const double rel = dp(i) / std::abs(a.pb(i));
    if (std::abs(rel) <= cfg.ramp_limit) continue;
    out.push_back({RuleKind::RampRate, Severity::Violation, bus_subject(a.ids[i]),
                   "generator output " + fmt(a.pb(i)) + " -> " + fmt(a.p(i)) + " p.u. (" +
                       (rel > 0 ? "+" : "") + fmt(100.0 * rel, 1) + "% in one interval, limit " +
                       fmt(100.0 * cfg.ramp_limit, 0) + "%)",
                   {{"bus", a.ids[i]}, {"P_base", a.pb(i)}, {"P_new", a.p(i)},
                    {"relative_change", rel}, {"limit", cfg.ramp_limit}}, "", ""});
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const Bus& bus = model.bus(a.ids[i]);
    if (bus.kind != BusKind::Load || std::abs(a.pb(i)) < cfg.ramp_min_base) continue;
    const double rel_p = dp(i) / std::abs(a.pb(i));
    if (std::abs(rel_p) < cfg.zip_min_rel_dp) continue;
    // alpha relates consumed load to voltage, and load is minus the injection.
    const double rel_load = dp(i) / a.pb(i);
    const double rel_v = dv(i) / a.vb(i);
    std::string why;
    double alpha = std::numeric_limits<double>::infinity();
    if (std::abs(rel_v) < cfg.zip_min_rel_dv) {
      why = "with unchanged voltage";
    } else {
      alpha = rel_load / rel_v;
      if (alpha >= cfg.zip_alpha_lo && alpha <= cfg.zip_alpha_hi) continue;
      why = "implies alpha = " + fmt(alpha, 2);
    }
    out.push_back({RuleKind::ZipViolation, Severity::Violation, bus_subject(a.ids[i]),
                   "active power change " + fmt(100.0 * rel_p, 1) + "% " + why + ", ZIP range [" +
                       fmt(cfg.zip_alpha_lo, 1) + ", " + fmt(cfg.zip_alpha_hi, 1) + "]",
                   {{"bus", a.ids[i]}, {"relative_dP", rel_p}, {"relative_dV", rel_v},
                    {"alpha", std::isinf(alpha) ? 1e300 : alpha}}, "", ""});
  }

  {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = std::abs(dp(i));
      if (m >= cfg.compensation_lo && m <= cfg.compensation_hi &&
          std::abs(dv(i)) < cfg.zip_min_rel_dv) {
        members.push_back(i);
      }
    }
    if (static_cast<int>(members.size()) >= cfg.compensation_min_count) {
      double total = 0.0;
      for (auto i : members) total += std::abs(dp(i));
      double h = 0.0;
      for (auto i : members) {
        const double w = std::abs(dp(i)) / total;
        h -= w * std::log(w);
      }
      const double hmax = std::log(static_cast<double>(members.size()));
      if (h >= cfg.compensation_entropy_ratio * hmax) {
        std::string list;
        for (auto i : members) list += (list.empty() ? "" : ",") + std::to_string(a.ids[i]);
        out.push_back({RuleKind::CompensationEntropy, Severity::Violation, "buses " + list,
                       std::to_string(members.size()) + " small injection changes of near-equal "
                           "size (entropy " + fmt(h, 3) + " of max " + fmt(hmax, 3) + ")",
                       {{"count", static_cast<double>(members.size())}, {"entropy", h},
                        {"max_entropy", hmax}, {"total_dP", total}}, "", ""});
      }
    }
  }

  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double g = a.v(k + 1) - a.v(k);
    const double gb = a.vb(k + 1) - a.vb(k);
    if (std::abs(g) <= cfg.gradient_max || std::abs(g - gb) <= cfg.gradient_max) continue;
    out.push_back({RuleKind::GradientCoherence, Severity::Violation,
                   "buses " + std::to_string(a.ids[k]) + "-" + std::to_string(a.ids[k + 1]),
                   "voltage gradient " + fmt(std::abs(g)) + " p.u. exceeds " +
                       fmt(cfg.gradient_max, 3) + " (baseline " + fmt(gb) + ")",
                   {{"from_bus", a.ids[k]}, {"to_bus", a.ids[k + 1]}, {"gradient", std::abs(g)},
                    {"baseline_gradient", gb}, {"limit", cfg.gradient_max}}, "", ""});
  }

  const std::pair<const char*, std::pair<const Eigen::VectorXd*, const Eigen::VectorXd*>> pairs[] = {
      {"V-P", {&a.v, &a.p}}, {"V-Q", {&a.v, &a.q}}, {"P-Q", {&a.p, &a.q}}};
  const std::pair<const Eigen::VectorXd*, const Eigen::VectorXd*> base_pairs[] = {
      {&a.vb, &a.pb}, {&a.vb, &a.qb}, {&a.pb, &a.qb}};
  for (int k = 0; k < 3; ++k) {
    const double rho = pearson(*pairs[k].second.first, *pairs[k].second.second);
    const double rho_b = pearson(*base_pairs[k].first, *base_pairs[k].second);
    if (std::abs(rho - rho_b) <= cfg.correlation_shift_max) continue;
    out.push_back({RuleKind::CorrelationShift, Severity::Warning,
                   std::string("channels ") + pairs[k].first,
                   "across-bus correlation moved " + fmt(rho_b, 3) + " -> " + fmt(rho, 3),
                   {{"rho_base", rho_b}, {"rho", rho}, {"shift", rho - rho_b}}, "", ""});
  }
}

void record_rules(const FixtureRecord& snap, const FixtureRecord& base, const Aligned& a,
                  const RuleConfig& cfg, std::vector<Finding>& out) {
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    const double pb = base.bus(a.ids[i]).p_mw;
    const double ps = snap.bus(a.ids[i]).p_mw;
    if (std::abs(pb) <= cfg.sign_flip_min_mw || std::abs(ps) <= cfg.sign_flip_min_mw) continue;
    if ((pb > 0) == (ps > 0)) continue;
    out.push_back({RuleKind::SignFlip, Severity::Violation, bus_subject(a.ids[i]),
                   std::string(pb < 0 ? "load" : "generation") + " bus now reports " +
                       (ps < 0 ? "load" : "generation") + ": P " + fmt(pb, 1) + " -> " +
                       fmt(ps, 1) + " MW",
                   {{"bus", a.ids[i]}, {"P_base_mw", pb}, {"P_new_mw", ps}}, "", ""});
  }

  if (!snap.branches.empty() && !base.branches.empty()) {
    double lb = 0.0;
    double ls = 0.0;
    for (const BranchRow& r : base.branches) lb += r.loss_mw;
    for (const BranchRow& r : snap.branches) ls += r.loss_mw;
    if (lb > 0.0 && ls / lb >= cfg.loss_ratio_warn) {
      out.push_back({RuleKind::LossSurge, Severity::Warning, "system",
                     "losses " + fmt(lb, 2) + " -> " + fmt(ls, 2) + " MW (x" + fmt(ls / lb, 2) + ")",
                     {{"losses_base_mw", lb}, {"losses_mw", ls}, {"ratio", ls / lb}}, "", ""});
    }
  }

  for (const BranchRow& r : snap.branches) {
    if (r.status_from != r.status_to) {
      out.push_back({RuleKind::BreakerPairMismatch, Severity::Violation, branch_subject(r.from, r.to),
                     "terminal breakers disagree (" + to_string(r.status_from) + " / " +
                         to_string(r.status_to) + ")",
                     {{"from", r.from}, {"to", r.to}}, "", ""});
    }
    if (r.both_closed()) continue;
    if (std::abs(r.p_mw) <= cfg.open_flow_tol_mw && std::abs(r.q_mvar) <= cfg.open_flow_tol_mw) continue;
    out.push_back({RuleKind::OpenBreakerFlow, Severity::Violation, branch_subject(r.from, r.to),
                   "breaker shows Opened but the branch carries " + fmt(r.p_mw, 1) + " MW, " +
                       fmt(r.q_mvar, 1) + " Mvar",
                   {{"from", r.from}, {"to", r.to}, {"p_mw", r.p_mw}, {"q_mvar", r.q_mvar},
                    {"loss_mw", r.loss_mw}}, "", ""});
  }

  if (!snap.branches.empty()) {
    const IslandReport rep = analyze_record_islands(snap, cfg);
    for (const RecordIsland& isl : rep.islands) {
      if (isl.balanced) continue;
      std::string list;
      for (int b : isl.buses) list += (list.empty() ? "" : ",") + std::to_string(b);
      out.push_back({RuleKind::IslandBalance, Severity::Violation, "island {" + list + "}",
                     "injections minus losses leave " + fmt(isl.p_balance_mw, 2) + " MW unbalanced",
                     {{"imbalance_mw", isl.p_balance_mw}, {"buses", static_cast<double>(isl.buses.size())}}, "", ""});
    }
  }

  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double d = a.v(k) - a.vb(k);
    if (std::abs(d) < cfg.voltage_deviation_warn) continue;
    out.push_back({RuleKind::VoltageDeviation, Severity::Warning, bus_subject(a.ids[i]),
                   "V " + fmt(a.vb(k)) + " -> " + fmt(a.v(k)) + " p.u.",
                   {{"bus", a.ids[i]}, {"V_base", a.vb(k)}, {"V", a.v(k)}, {"dV", d}}, "", ""});
  }
}

}  // namespace

IslandReport analyze_record_islands(const FixtureRecord& record, const RuleConfig& config) {
  IslandReport rep;
  rep.has_branches = !record.branches.empty();
  std::map<int, int> parent;
  for (const BusRow& b : record.buses) parent[b.bus] = b.bus;
  auto find = [&](int x) {
    while (parent.at(x) != x) x = parent[x] = parent.at(parent.at(x));
    return x;
  };
  bool zero = rep.has_branches;
  for (const BranchRow& r : record.branches) {
    if (!parent.count(r.from) || !parent.count(r.to)) {
      throw ModelError("record branch " + std::to_string(r.from) + "-" + std::to_string(r.to) +
                       " references a missing bus");
    }
    if (r.status_from != r.status_to) rep.breakers_consistent = false;
    if (std::abs(r.p_mw) > config.open_flow_tol_mw || std::abs(r.q_mvar) > config.open_flow_tol_mw) {
      zero = false;
    }
    if (r.both_closed()) parent[find(r.from)] = find(r.to);
  }
  rep.all_flows_zero = zero;
  std::map<int, std::size_t> index;
  for (const BusRow& b : record.buses) {
    const int root = find(b.bus);
    if (!index.count(root)) {
      index[root] = rep.islands.size();
      rep.islands.emplace_back();
    }
    RecordIsland& isl = rep.islands[index[root]];
    isl.buses.push_back(b.bus);
    isl.p_balance_mw += b.p_mw;
  }
  for (const BranchRow& r : record.branches) {
    if (find(r.from) == find(r.to)) rep.islands[index[find(r.from)]].p_balance_mw -= r.loss_mw;
  }
  for (RecordIsland& isl : rep.islands) {
    std::sort(isl.buses.begin(), isl.buses.end());
    isl.balanced = std::abs(isl.p_balance_mw) <= config.island_balance_tol_mw;
    if (!isl.balanced) rep.all_balanced = false;
  }
  std::sort(rep.islands.begin(), rep.islands.end(),
            [](const RecordIsland& x, const RecordIsland& y) { return x.buses.front() < y.buses.front(); });
  return rep;
}

std::vector<Finding> rule_battery(const FixtureRecord& snapshot, const FixtureRecord& baseline,
                                  const NetworkModel& model, const RuleConfig& config) {
  const Aligned a = align(snapshot, baseline, model);
  std::vector<Finding> out;
  if (snapshot.origin == RecordOrigin::Measurements) measurement_rules(a, model, config, out);
  record_rules(snapshot, baseline, a, config, out);
  return out;
}

std::string to_string(DetectionClass c) {
  switch (c) {
    case DetectionClass::Normal: return "Normal";
    case DetectionClass::BadData: return "BadData";
    case DetectionClass::StealthAttack: return "StealthAttack";
    case DetectionClass::FdiPostSe: return "FdiPostSe";
    case DetectionClass::SystemStress: return "SystemStress";
    case DetectionClass::IslandingValid: return "IslandingValid";
  }
  return "?";
}

bool is_attack(DetectionClass c) {
  return c == DetectionClass::StealthAttack || c == DetectionClass::FdiPostSe;
}

bool is_record_level(RuleKind rule) {
  switch (rule) {
    case RuleKind::SignFlip:
    case RuleKind::OpenBreakerFlow:
    case RuleKind::IslandBalance:
    case RuleKind::BreakerPairMismatch:
      return true;
    default:
      return false;
  }
}

DetectionVerdict classify(const BddSummary& bdd, double feature_chi2,
                          std::vector<Finding> findings, const IslandReport& islands,
                          RecordOrigin origin) {
  DetectionVerdict v;
  v.bdd = bdd;
  v.bdd_chi2 = bdd.j_value;
  v.feature_chi2 = feature_chi2;
  v.findings = std::move(findings);

  const auto violations = [&](bool record_level) {
    return std::any_of(v.findings.begin(), v.findings.end(), [&](const Finding& f) {
      return f.severity == Severity::Violation && (!record_level || is_record_level(f.rule));
    });
  };
  if (bdd.flagged) {
    v.detection_class = DetectionClass::BadData;
  } else if (islands.has_branches && islands.all_flows_zero && islands.all_balanced &&
             islands.breakers_consistent) {
    // A fully de-energized network with every island balanced is a physical
    // state, whatever the channel-level rules say.
    v.detection_class = DetectionClass::IslandingValid;
  } else if (violations(false)) {
    v.detection_class = (origin == RecordOrigin::PostSe || violations(true))
                            ? DetectionClass::FdiPostSe
                            : DetectionClass::StealthAttack;
  } else if (std::any_of(v.findings.begin(), v.findings.end(),
                         [](const Finding& f) { return f.rule == RuleKind::LossSurge; })) {
    v.detection_class = DetectionClass::SystemStress;
  } else {
    v.detection_class = DetectionClass::Normal;
  }
  return v;
}

}  // namespace gridsec
