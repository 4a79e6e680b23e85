#include "gridsec/stealth_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "gridsec/error.hpp"
#include "gridsec/parallel.hpp"
#include "gridsec/state_estimation.hpp"

namespace gridsec {

namespace {

constexpr const char* kDetected = "Bad data detected";
constexpr const char* kStealth = "Stealth attack";
constexpr const char* kNerc = "NERC violation";

struct Baseline {
  MeasurementSet z;
  StateVector x;
  std::size_t vm_index = 0;
};

Baseline make_baseline(const NetworkModel& model, const FixtureRecord& record, int bus,
                       const NoiseModel& noise) {
  if (record.buses.size() != model.bus_count()) {
    throw ModelError("baseline record does not cover every bus");
  }
  Baseline b;
  b.z = bus_measurement_layout(model, noise);
  b.x = StateVector::flat(model);
  for (const BusRow& row : record.buses) {
    const auto i = static_cast<Eigen::Index>(model.index_of(row.bus));
    b.x.v(i) = row.v_pu;
    b.x.theta(i) = row.theta_deg * std::numbers::pi / 180.0;
  }
  b.x.theta.array() -= b.x.theta(model.index_of(model.slack_bus()));
  for (Measurement& m : b.z.entries) {
    const BusRow& row = record.bus(m.bus);
    switch (m.kind) {
      case MeasurementKind::Vm: m.value = row.v_pu; break;
      case MeasurementKind::Pinj: m.value = row.p_mw / model.base_mva(); break;
      default: m.value = row.q_mvar / model.base_mva(); break;
    }
  }
  b.vm_index = *b.z.find(MeasurementKind::Vm, bus);
  return b;
}

// J as a function of the substituted voltage magnitude.
std::function<double(double)> make_evaluator(const NetworkModel& model, const Baseline& base,
                                             SweepEstimator kind) {
  if (kind == SweepEstimator::Ac) {
    return [&model, &base](double vm) {
      MeasurementSet z = base.z;
      z.entries[base.vm_index].value = vm;
      AcEstimationOptions opt;
      opt.initial = base.x;
      try {
        const EstimationResult r = wls_estimate_ac(model, z, opt);
        return r.converged ? r.j_value : std::numeric_limits<double>::infinity();
      } catch (const ObservabilityError&) {
        throw;
      } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
      }
    };
  }
  const AcMeasurementModel hm(model, topology_from_breakers(model), base.z.entries);
  const Eigen::MatrixXd h = hm.jacobian(base.x);
  const Eigen::VectorXd w = base.z.sigmas().array().square().inverse();
  const Eigen::MatrixXd g = h.transpose() * w.asDiagonal() * h;
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw ObservabilityError("unobservable baseline");
  const auto m = static_cast<Eigen::Index>(base.z.size());
  // Residual projector S = I - H G^-1 H^T W.
  const Eigen::MatrixXd s =
      Eigen::MatrixXd::Identity(m, m) - h * llt.solve(h.transpose() * w.asDiagonal());
  const Eigen::VectorXd d0 = base.z.values() - hm.evaluate(base.x);
  const auto col = static_cast<Eigen::Index>(base.vm_index);
  const double v0 = base.x.v(static_cast<Eigen::Index>(base.z.entries[base.vm_index].bus - 1));
  return [s, w, d0, col, v0](double vm) {
    Eigen::VectorXd d = d0;
    d(col) += vm - v0;
    const Eigen::VectorXd r = s * d;
    return r.dot(w.cwiseProduct(r));
  };
}

}  // namespace

SweepResult sweep_stealth_range(const NetworkModel& model, const FixtureRecord& baseline, int bus,
                                const SweepOptions& options) {
  if (options.n_points < 2) throw std::invalid_argument("sweep needs at least two points");
  if (!(options.window_hi > options.window_lo)) throw std::invalid_argument("empty sweep window");
  const Bus& info = model.bus(bus);
  const Baseline base = make_baseline(model, baseline, bus, options.noise);
  const auto eval = make_evaluator(model, base, options.estimator);
  const double tau = options.threshold;
  const double original = baseline.bus(bus).v_pu;

  SweepResult out;
  out.range.bus = bus;
  out.range.kind = info.kind;
  out.range.original_v = original;

  const int np = options.n_points;
  const double step = (options.window_hi - options.window_lo) / (np - 1);
  std::vector<double> grid(static_cast<std::size_t>(np));
  std::vector<char> evades(grid.size());
  for (int k = 0; k < np; ++k) {
    const double vm = k == np - 1 ? options.window_hi : options.window_lo + k * step;
    grid[static_cast<std::size_t>(k)] = vm;
    SweepPoint p;
    p.bus = bus;
    p.attack_vm = vm;
    p.original_vm = original;
    p.j_value = eval(vm);
    p.detected = !(p.j_value <= tau);
    evades[static_cast<std::size_t>(k)] = !p.detected;
    const bool in_band = vm >= options.nerc_lo && vm <= options.nerc_hi;
    p.label = p.detected ? kDetected : (in_band ? kStealth : kNerc);
    out.points.push_back(p);
  }

  std::size_t k0 = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (std::abs(grid[k] - original) < std::abs(grid[k0] - original)) k0 = k;
  }
  auto mark_fragments = [&](double lo, double hi) {
    for (const SweepPoint& p : out.points) {
      if (p.label == kStealth && (p.attack_vm < lo || p.attack_vm > hi)) {
        out.range.fragmented = true;
      }
    }
  };
  if (!evades[k0]) {
    mark_fragments(1.0, 0.0);
    return out;
  }
  std::size_t a = k0;
  std::size_t b = k0;
  while (a > 0 && evades[a - 1]) --a;
  while (b + 1 < grid.size() && evades[b + 1]) ++b;

  // Bisection keeps `in` evading and `out` detected.
  auto edge = [&](double in, double outside) {
    for (int it = 0; it < options.refine_iterations; ++it) {
      const double mid = 0.5 * (in + outside);
      if (eval(mid) <= tau) {
        in = mid;
      } else {
        outside = mid;
      }
    }
    return in;
  };
  double lo = grid[a];
  double hi = grid[b];
  if (options.refine_edges) {
    if (a > 0) lo = edge(grid[a], grid[a - 1]);
    if (b + 1 < grid.size()) hi = edge(grid[b], grid[b + 1]);
  }
  const double start = std::max(lo, options.nerc_lo);
  const double end = std::min(hi, options.nerc_hi);
  if (start <= end) {
    out.range.empty = false;
    out.range.start = start;
    out.range.end = end;
    out.range.width = end - start;
    mark_fragments(start, end);
  } else {
    mark_fragments(1.0, 0.0);
  }
  return out;
}

std::vector<SweepResult> sweep_all_buses(const NetworkModel& model, const FixtureRecord& baseline,
                                         const SweepOptions& options, unsigned workers) {
  std::vector<SweepResult> results(model.bus_count());
  parallel_for(
      model.bus_count(),
      [&](std::size_t i) {
        results[i] = sweep_stealth_range(model, baseline, static_cast<int>(i) + 1, options);
      },
      workers);
  return results;
}

std::string sweep_log_csv(const std::vector<SweepResult>& results) {
  std::ostringstream out;
  out << "Bus,Attack_Vm,Original_Vm,Detected,Anomaly Detection\n";
  for (const SweepResult& r : results) {
    for (const SweepPoint& p : r.points) {
      out << p.bus << ',' << format_number(p.attack_vm) << ',' << format_number(p.original_vm)
          << ',' << (p.detected ? "TRUE" : "FALSE") << ',' << p.label << '\n';
    }
  }
  return out.str();
}

std::string range_summary_csv(const std::vector<SweepResult>& results) {
  std::ostringstream out;
  out << "Bus No.,Bus type,Stealth attack_start point,Stealth attack_end point,"
         "Stealth attack_width,Original voltage\n";
  for (const SweepResult& r : results) {
    const StealthRange& s = r.range;
    out << s.bus << ',' << to_string(s.kind) << ',';
    if (s.empty) {
      out << "N/A,N/A,N/A,";
    } else {
      out << format_number(s.start) << ',' << format_number(s.end) << ','
          << format_number(s.width) << ',';
    }
    out << format_number(s.original_v) << '\n';
  }
  return out.str();
}

}  // namespace gridsec
