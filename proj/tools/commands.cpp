#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "config.hpp"
#include "gridsec/attack_forge.hpp"
#include "gridsec/case_io.hpp"
#include "gridsec/chi_square.hpp"
#include "gridsec/error.hpp"
#include "gridsec/pipeline.hpp"
#include "gridsec/scenario_catalog.hpp"
#include "gridsec/som_diff.hpp"
#include "gridsec/state_estimation.hpp"

namespace gridsec::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Globals {
  std::string case_file;
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  bool paper_compat = false;
};

// Usage problems found after parsing (missing combinations of flags).
struct UsageError : Error {
  using Error::Error;
};

HarnessConfig make_config(const Globals& g) {
  HarnessConfig c = g.config_file.empty() ? HarnessConfig{} : load_config(g.config_file);
  if (g.paper_compat) apply_paper_compat(c);
  if (g.seed) c.seed = *g.seed;
  if (g.workers) c.workers = *g.workers;
  return c;
}

NetworkModel make_model(const Globals& g) {
  return g.case_file.empty() ? build_ieee14() : load_case_file(g.case_file);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::pair<int, int> parse_branch(const std::string& s) {
  const auto dash = s.find('-');
  if (dash == std::string::npos) throw UsageError("branch '" + s + "' should look like 2-4");
  try {
    return {std::stoi(s.substr(0, dash)), std::stoi(s.substr(dash + 1))};
  } catch (const std::exception&) {
    throw UsageError("branch '" + s + "' should look like 2-4");
  }
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

// ---- solve ----------------------------------------------------------------

struct SolveArgs {
  std::string scenario;
  std::string state;
  std::string output;
  bool no_q_limits = false;
};

void print_solution(const NetworkModel& model, const PowerFlowSolution& s) {
  std::cout << "converged in " << s.iterations << " iterations, max mismatch " << s.max_mismatch << " p.u.\n";
  std::cout << "bus      V(pu)   theta(deg)     P(MW)    Q(Mvar)\n";
  for (std::size_t i = 0; i < model.bus_count(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    char line[128];
    std::snprintf(line, sizeof line, "%3zu %10.6f %12.4f %9.3f %10.3f\n", i + 1, s.v(k),
                  s.theta(k) * 180.0 / std::numbers::pi, s.p_inj(k), s.q_inj(k));
    std::cout << line;
  }
  std::cout << "losses " << fixed(s.losses, 3) << " MW, islands " << s.islands.size();
  if (!s.q_limited.empty()) {
    std::cout << ", at Q limit:";
    for (int b : s.q_limited) std::cout << ' ' << b;
  }
  std::cout << '\n';
}

int cmd_solve(const Globals& g, const SolveArgs& a) {
  NetworkModel model = make_model(g);
  if (!a.state.empty()) {
    const FixtureRecord rec = load_record(a.state);
    Eigen::VectorXd v(static_cast<Eigen::Index>(model.bus_count()));
    Eigen::VectorXd th(v.size());
    for (std::size_t i = 0; i < model.bus_count(); ++i) {
      const BusRow& r = rec.bus(static_cast<int>(i) + 1);
      v(static_cast<Eigen::Index>(i)) = r.v_pu;
      th(static_cast<Eigen::Index>(i)) = r.theta_deg * std::numbers::pi / 180.0;
    }
    FixtureRecord out = record_at_state(model, topology_from_breakers(model), v, th,
                                        rec.source.empty() ? "state" : rec.source);
    out.origin = rec.origin;
    out.meta = rec.meta;
    out.bdd_chi2 = rec.bdd_chi2;
    write_text(a.output, record_to_csv(out));
    return kExitOk;
  }
  PowerFlowOptions opt;
  opt.enforce_q_limits = !a.no_q_limits;
  if (!a.scenario.empty()) {
    const ScenarioOutcome o = generate_scenario(model, find_scenario(a.scenario), opt);
    if (!o.ok()) {
      std::cerr << o.spec.id << ": " << o.error << '\n';
      return kExitDetected;
    }
    if (a.output.empty()) {
      print_solution(*o.model, *o.solution);
    } else {
      write_text(a.output, record_to_csv(*o.record));
    }
    return kExitOk;
  }
  const TopologyMatrix t = topology_from_breakers(model);
  const PowerFlowSolution s = solve(model, t, opt);
  if (a.output.empty()) {
    print_solution(model, s);
  } else {
    write_text(a.output, record_to_csv(record_from_solution(model, t, s, "base case")));
  }
  return kExitOk;
}

// ---- estimate -------------------------------------------------------------

struct EstimateArgs {
  std::string measurements;
  std::string record;
  bool noise = false;
  bool dc = false;
  bool remove_bad_data = false;
};

int cmd_estimate(const Globals& g, const EstimateArgs& a) {
  const HarnessConfig cfg = make_config(g);
  const NetworkModel model = make_model(g);
  MeasurementSet z;
  if (!a.measurements.empty()) {
    z = load_measurements(a.measurements, model);
  } else if (!a.record.empty()) {
    const FixtureRecord rec = load_record(a.record);
    z = full_measurement_layout(model, cfg.pipeline.noise);
    StateVector x = StateVector::flat(model);
    for (std::size_t i = 0; i < model.bus_count(); ++i) {
      const BusRow& r = rec.bus(static_cast<int>(i) + 1);
      x.v(static_cast<Eigen::Index>(i)) = r.v_pu;
      x.theta(static_cast<Eigen::Index>(i)) = r.theta_deg * std::numbers::pi / 180.0;
    }
    z = measure(model, topology_from_breakers(model), x, z);
  } else {
    const TopologyMatrix t = topology_from_breakers(model);
    const PowerFlowSolution s = solve(model, t);
    StateVector x = StateVector::flat(model);
    x.v = s.v;
    x.theta = s.theta;
    z = measure(model, t, x, full_measurement_layout(model, cfg.pipeline.noise));
  }
  if (a.noise) {
    std::mt19937_64 rng(cfg.seed);
    add_gaussian_noise(z, rng);
  }

  if (a.dc) {
    const DcModel dc = dc_measurement_matrix(model, topology_from_breakers(model));
    Eigen::VectorXd zp(dc.h.rows());
    Eigen::VectorXd sp(dc.h.rows());
    // DC channels: P injections then from-end P flows, taken from the set.
    std::size_t row = 0;
    for (const Measurement& m : z.entries) {
      if (m.kind != MeasurementKind::Pinj) continue;
      zp(static_cast<Eigen::Index>(row)) = m.value;
      sp(static_cast<Eigen::Index>(row++)) = m.sigma;
    }
    for (std::size_t k = 0; k < model.branch_count() && row < static_cast<std::size_t>(dc.h.rows()); ++k) {
      if (!model.branch(k).in_service()) continue;
      bool found = false;
      for (const Measurement& m : z.entries) {
        if (m.kind == MeasurementKind::Pflow && m.branch == k && m.end == BranchEnd::From) {
          zp(static_cast<Eigen::Index>(row)) = m.value;
          sp(static_cast<Eigen::Index>(row++)) = m.sigma;
          found = true;
          break;
        }
      }
      if (!found) throw UsageError("DC estimation needs from-end Pflow for every in-service branch");
    }
    if (row != static_cast<std::size_t>(dc.h.rows())) throw UsageError("DC estimation needs Pinj at every bus");
    const LinearEstimate e = wls_estimate_dc(dc.h, zp, sp);
    const int df = static_cast<int>(dc.h.rows() - dc.h.cols());
    const double tau = cfg.pipeline.paper_compat ? kPaperCompatThreshold : chi_square_threshold(df, cfg.pipeline.alpha);
    std::cout << "DC estimate, J = " << fixed(e.j_value, 4) << ", tau = " << fixed(tau, 4) << " (df " << df << ")\n";
    std::cout << "bus   theta(deg)\n";
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < model.bus_count(); ++i) {
      const int id = static_cast<int>(i) + 1;
      const double th = id == dc.reference_bus ? 0.0 : e.x_hat(k++) * 180.0 / std::numbers::pi;
      char line[64];
      std::snprintf(line, sizeof line, "%3d %12.4f\n", id, th);
      std::cout << line;
    }
    std::cout << (e.j_value > tau ? "bad data detected\n" : "no bad data detected\n");
    return e.j_value > tau ? kExitDetected : kExitOk;
  }

  const int df = static_cast<int>(z.size()) - static_cast<int>(2 * model.bus_count() - 1);
  const double tau = cfg.pipeline.paper_compat ? kPaperCompatThreshold : chi_square_threshold(df, cfg.pipeline.alpha);
  EstimationResult r;
  std::vector<std::string> removed;
  if (a.remove_bad_data) {
    const double alpha = cfg.pipeline.alpha;
    const bool compat = cfg.pipeline.paper_compat;
    const BadDataRemoval b = iterative_bad_data_removal(
        model, z, [&](int d) { return compat ? kPaperCompatThreshold : chi_square_threshold(d, alpha); });
    r = b.result;
    for (std::size_t i : b.removed) removed.push_back(measurement_label(z.entries[i], model));
  } else {
    r = wls_estimate_ac(model, z);
  }
  std::cout << "AC estimate, " << (r.converged ? "converged" : "NOT converged") << " in " << r.iterations
            << " iterations\n";
  std::cout << "bus      V(pu)   theta(deg)\n";
  for (Eigen::Index i = 0; i < r.x_hat.v.size(); ++i) {
    char line[96];
    std::snprintf(line, sizeof line, "%3ld %10.6f %12.4f\n", static_cast<long>(i + 1), r.x_hat.v(i),
                  r.x_hat.theta(i) * 180.0 / std::numbers::pi);
    std::cout << line;
  }
  std::cout << "J = " << fixed(r.j_value, 4) << ", tau = " << fixed(tau, 4) << " (df " << df << ")\n";
  for (const auto& l : removed) std::cout << "removed " << l << '\n';
  const bool flagged = r.j_value > tau && removed.empty();
  const BddVerdict v = bdd_classify(r, tau);
  if (flagged && v.suspect) std::cout << "largest normalized residual at " << measurement_label(z.entries[*v.suspect], model) << '\n';
  std::cout << (flagged || !removed.empty() ? "bad data detected\n" : "no bad data detected\n");
  return flagged || !removed.empty() ? kExitDetected : kExitOk;
}

// ---- attack ---------------------------------------------------------------

struct AttackArgs {
  std::string output;
  std::string record;
  std::string apply;
  // stealth
  int bus = 0;
  double dtheta_deg = 0.0;
  double dv = 0.0;
  bool ac = false;
  // 1b
  bool noise = false;
  // post-se
  std::string delta;
  // topology
  std::vector<std::string> flips;
};

void emit_attack(const NetworkModel& model, const AttackVector& a, const MeasurementSet& layout,
                 const AttackArgs& args) {
  if (!args.apply.empty()) {
    if (args.record.empty()) throw UsageError("--apply needs --record");
    FixtureRecord rec = apply_attack_to_record(load_record(args.record), a, layout, model.base_mva());
    rec.origin = RecordOrigin::Measurements;
    rec.source = provenance_name(a.provenance);
    save_record(rec, args.apply);
  }
  write_text(args.output, attack_to_json(a, layout, model));
}

int cmd_attack_stealth(const Globals& g, const AttackArgs& a) {
  const NetworkModel model = make_model(g);
  const TopologyMatrix t = topology_from_breakers(model);
  const MeasurementSet layout = bus_measurement_layout(model);
  if (a.bus < 1 || a.bus > static_cast<int>(model.bus_count())) throw UsageError("--bus out of range");
  if (!a.ac) {
    if (a.dv != 0.0) throw UsageError("the DC model has no voltage magnitudes; use --ac for --dv");
    const DcModel dc = dc_measurement_matrix(model, t);
    StateDelta c = StateDelta::zero(model.bus_count());
    c.dtheta(a.bus - 1) = a.dtheta_deg;
    const AttackVector av = stealth_from_state_delta(dc, c);
    json rows = json::array();
    for (Eigen::Index k = 0; k < av.deltas.size(); ++k) {
      if (av.deltas(k) != 0.0) rows.push_back({{"measurement", dc.labels[static_cast<std::size_t>(k)]}, {"delta", av.deltas(k)}});
    }
    write_text(a.output, json{{"model", "dc"}, {"provenance", provenance_name(av.provenance)}, {"components", rows}}.dump(2));
    return kExitOk;
  }
  StateVector x = StateVector::flat(model);
  if (!a.record.empty()) {
    const FixtureRecord rec = load_record(a.record);
    for (std::size_t i = 0; i < model.bus_count(); ++i) {
      x.v(static_cast<Eigen::Index>(i)) = rec.bus(static_cast<int>(i) + 1).v_pu;
      x.theta(static_cast<Eigen::Index>(i)) = rec.bus(static_cast<int>(i) + 1).theta_deg * std::numbers::pi / 180.0;
    }
  } else {
    const PowerFlowSolution s = solve(model, t);
    x.v = s.v;
    x.theta = s.theta;
  }
  StateDelta c = StateDelta::zero(model.bus_count());
  c.dtheta(a.bus - 1) = a.dtheta_deg;
  c.dv(a.bus - 1) = a.dv;
  const AttackVector av = stealth_from_state_delta(model, t, layout, x, c);
  emit_attack(model, av, layout, a);
  return kExitOk;
}

int cmd_attack_1a(const Globals& g, const AttackArgs& a) {
  const NetworkModel model = make_model(g);
  const MeasurementSet layout = bus_measurement_layout(model);
  emit_attack(model, build_scenario_1a(layout), layout, a);
  return kExitOk;
}

int cmd_attack_1b(const Globals& g, const AttackArgs& a) {
  const HarnessConfig cfg = make_config(g);
  const NetworkModel model = make_model(g);
  const MeasurementSet layout = bus_measurement_layout(model);
  Scenario1BOptions opt;
  opt.noise_amplitude = cfg.scenario_1b_noise;
  if (a.noise) opt.noise_seed = cfg.seed;
  emit_attack(model, build_scenario_1b(layout, opt), layout, a);
  return kExitOk;
}

int cmd_attack_post_se(const Globals& g, const AttackArgs& a) {
  const NetworkModel model = make_model(g);
  if (a.record.empty() || a.delta.empty()) throw UsageError("post-se needs --record and --delta");
  const FixtureRecord rec = load_record(a.record);
  const StateDelta d = state_delta_from_json(read_text(a.delta), model.bus_count());
  ManipulationResult r = manipulate_state_vector(rec, d, model);
  r.corrupted.source = rec.source + "+post-se";
  write_text(a.output, record_to_csv(r.corrupted));
  return kExitOk;
}

int cmd_attack_topology(const Globals& g, const AttackArgs& a) {
  if (a.record.empty() || a.flips.empty()) throw UsageError("topology needs --record and at least one --flip");
  const NetworkModel model = make_model(g);
  const FixtureRecord rec = load_record(a.record);
  std::set<std::pair<int, int>> flips;
  for (const auto& f : a.flips) {
    const auto b = parse_branch(f);
    if (!rec.find_branch(b.first, b.second)) throw UsageError("record has no branch " + f);
    flips.insert(b);
  }
  // Also check the T xor dT form against the model's branch list.
  std::set<std::size_t> idx;
  for (const auto& [x, y] : flips) {
    if (const auto k = model.try_find_branch(x, y)) idx.insert(*k);
  }
  (void)apply_topology_corruption(topology_from_breakers(model), idx);
  FixtureRecord out = corrupt_topology_record(rec, flips);
  out.source = rec.source + "+topology";
  write_text(a.output, record_to_csv(out));
  return kExitOk;
}

// ---- sweep ----------------------------------------------------------------

struct SweepArgs {
  std::string baseline;
  int bus = 0;
  bool all = false;
  std::optional<int> points;
  std::string estimator;
  std::string log;
  std::string summary;
};

int cmd_sweep(const Globals& g, const SweepArgs& a) {
  HarnessConfig cfg = make_config(g);
  if (a.points) cfg.sweep.n_points = *a.points;
  if (a.estimator == "linearized" || a.estimator == "dc") cfg.sweep.estimator = SweepEstimator::Linearized;
  else if (a.estimator == "ac") cfg.sweep.estimator = SweepEstimator::Ac;
  else if (!a.estimator.empty()) throw UsageError("--estimator must be ac or linearized");
  if (a.all == (a.bus != 0)) throw UsageError("give exactly one of --bus or --all-buses");
  const NetworkModel model = make_model(g);
  const FixtureRecord base = load_record(a.baseline);
  std::vector<SweepResult> results;
  if (a.all) {
    results = sweep_all_buses(model, base, cfg.sweep, cfg.workers);
  } else {
    results.push_back(sweep_stealth_range(model, base, a.bus, cfg.sweep));
  }
  const std::string log = sweep_log_csv(results);
  const std::string summary = range_summary_csv(results);
  if (!a.log.empty()) write_text(a.log, log);
  if (!a.summary.empty()) write_text(a.summary, summary);
  if (a.log.empty() && a.summary.empty()) write_text("-", a.all ? summary : log);
  return kExitOk;
}

// ---- baseline-fit ---------------------------------------------------------

BaselineStats fit_from_catalog(const NetworkModel& model, const HarnessConfig& cfg, std::ostream* log) {
  const auto outcomes = run_scenarios(model, scenario_catalog(), cfg.workers);
  std::vector<FeatureVector> samples;
  std::vector<std::string> sources;
  for (const ScenarioOutcome& o : outcomes) {
    if (!o.ok()) {
      if (log) *log << "skipping " << o.spec.id << ": " << o.error << '\n';
      continue;
    }
    samples.push_back(extract_features(*o.record, model.base_mva()));
    sources.push_back(o.spec.id);
  }
  return fit_baseline(samples, sources, cfg.features);
}

struct FitArgs {
  std::vector<std::string> records;
  std::string output;
};

int cmd_baseline_fit(const Globals& g, const FitArgs& a) {
  const HarnessConfig cfg = make_config(g);
  const NetworkModel model = make_model(g);
  BaselineStats b;
  if (a.records.empty()) {
    b = fit_from_catalog(model, cfg, &std::cerr);
  } else {
    std::vector<FeatureVector> samples;
    std::vector<std::string> sources;
    for (const auto& f : a.records) {
      const FixtureRecord r = load_record(f);
      samples.push_back(extract_features(r, model.base_mva()));
      sources.push_back(r.source.empty() ? f : r.source);
    }
    b = fit_baseline(samples, sources, cfg.features);
  }
  std::cerr << b.sources.size() << " snapshots, lambda " << b.lambda << ", threshold " << fixed(b.threshold, 4)
            << '\n';
  write_text(a.output, b.to_json());
  return kExitOk;
}

// ---- detect ---------------------------------------------------------------

struct DetectArgs {
  std::string baseline;
  std::string snapshot;
  std::string features;
  bool fit_features = false;
  bool text = false;
  std::string report;
};

int cmd_detect(const Globals& g, const DetectArgs& a) {
  HarnessConfig cfg = make_config(g);
  const NetworkModel model = make_model(g);
  if (!a.features.empty()) {
    cfg.pipeline.feature_baseline = BaselineStats::from_json(read_text(a.features));
  } else if (a.fit_features) {
    cfg.pipeline.feature_baseline = fit_from_catalog(model, cfg, nullptr);
  }
  const PipelineReport rep = run_pipeline(model, load_record(a.baseline), load_record(a.snapshot), cfg.pipeline);
  if (!a.report.empty()) write_text(a.report, report_json(rep));
  write_text("-", a.text ? report_text(rep) : verdict_json(rep.verdict));
  const DetectionClass c = rep.verdict.detection_class;
  return is_attack(c) || c == DetectionClass::BadData ? kExitDetected : kExitOk;
}

// ---- scenario -------------------------------------------------------------

struct ScenarioArgs {
  std::string id;
  bool all = false;
  std::string output_dir;
};

int cmd_scenario_list() {
  for (const ScenarioSpec& s : scenario_catalog()) {
    std::string actions;
    for (const Contingency& c : s.actions) actions += (actions.empty() ? "" : "; ") + describe(c);
    std::cout << s.id << "  " << s.description << (actions.empty() ? "" : "  [" + actions + "]") << '\n';
  }
  return kExitOk;
}

int cmd_scenario_run(const Globals& g, const ScenarioArgs& a) {
  const HarnessConfig cfg = make_config(g);
  const NetworkModel model = make_model(g);
  std::vector<ScenarioSpec> specs;
  if (a.all == !a.id.empty()) throw UsageError("give exactly one of --id or --all");
  if (a.all) {
    specs = scenario_catalog();
  } else {
    specs.push_back(find_scenario(a.id));
  }
  const auto outcomes = run_scenarios(model, specs, cfg.workers);
  if (!a.output_dir.empty()) fs::create_directories(a.output_dir);
  bool failures = false;
  for (const ScenarioOutcome& o : outcomes) {
    if (!o.ok()) {
      failures = true;
      std::cout << o.spec.id << "  FAILED  " << o.error << '\n';
      continue;
    }
    std::cout << o.spec.id << "  ok  " << o.solution->iterations << " it, losses " << fixed(o.solution->losses, 3)
              << " MW, islands " << o.solution->islands.size() << '\n';
    if (!a.output_dir.empty()) save_record(*o.record, fs::path(a.output_dir) / (o.spec.id + ".csv"));
  }
  return failures ? kExitDetected : kExitOk;
}

// ---- som ------------------------------------------------------------------

struct SomArgs {
  std::string dir;
  std::vector<std::string> files;
  std::size_t n = 3;
  bool all = false;
  std::string arrangement;
  std::string reference;
  std::string candidate;
  std::string output;
};

std::vector<som::SegmentDescriptor> segments_from(const std::string& dir, const std::vector<std::string>& files) {
  if (!dir.empty()) return som::load_segments(fs::path(dir));
  if (files.empty()) throw UsageError("give --dir or segment files");
  std::vector<fs::path> paths(files.begin(), files.end());
  return som::load_segments(paths);
}

int cmd_som_arrange(const Globals& g, const SomArgs& a) {
  const HarnessConfig cfg = make_config(g);
  const auto segs = segments_from(a.dir, a.files);
  const auto cons = som::generate_constraints(segs);
  som::SolveOptions opt;
  opt.max_solutions = cfg.som_max_solutions;
  const som::SolveResult r = som::solve_arrangement(segs, cons, a.n, opt);
  std::cerr << cons.size() << " constraints, " << r.solutions.size() << (r.truncated ? "+" : "")
            << " solution(s), " << r.nodes << " nodes\n";
  if (r.solutions.empty()) {
    std::cerr << "no arrangement satisfies every constraint\n";
    return kExitDetected;
  }
  if (a.all) {
    json arr = json::array();
    for (const auto& s : r.solutions) arr.push_back(json::parse(som::arrangement_to_json(s)));
    write_text(a.output, json{{"solutions", arr}, {"truncated", r.truncated}}.dump(2));
  } else {
    write_text(a.output, som::arrangement_to_json(r.solutions.front()));
  }
  return kExitOk;
}

int cmd_som_verify(const Globals&, const SomArgs& a) {
  if (a.arrangement.empty()) throw UsageError("verify needs --arrangement");
  const auto segs = segments_from(a.dir, a.files);
  const auto cons = som::generate_constraints(segs);
  const som::VerifyResult v = som::verify_arrangement(som::load_arrangement(a.arrangement), segs, cons);
  if (v.ok) {
    std::cout << "arrangement satisfies all " << cons.size() << " constraints\n";
    return kExitOk;
  }
  std::cout << "arrangement fails " << v.problems.size() << " check(s):\n";
  for (const auto& p : v.problems) std::cout << "  " << p << '\n';
  return kExitDetected;
}

int cmd_som_diff(const Globals& g, const SomArgs& a) {
  if (a.reference.empty() || a.candidate.empty()) throw UsageError("diff needs --reference and --candidate");
  const HarnessConfig cfg = make_config(g);
  const auto ref = som::load_segments(fs::path(a.reference));
  const auto cand = som::load_segments(fs::path(a.candidate));
  std::optional<som::GridArrangement> arr;
  if (!a.arrangement.empty()) arr = som::load_arrangement(a.arrangement);
  const auto findings = som::diff_against_reference(ref, arr, cand, cfg.som_diff);
  DetectionVerdict holder;
  holder.findings = findings;
  json out = json::parse(verdict_json(holder)).at("findings");
  write_text(a.output, out.dump(2));
  return findings.empty() ? kExitOk : kExitDetected;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Power-grid state estimation and false-data-injection analysis"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--case", g.case_file, "JSON case file (default: built-in IEEE 14-bus)")->check(CLI::ExistingFile);
  app.add_option("--config", g.config_file, "TOML-style config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for every randomized path");
  app.add_option("--workers", g.workers, "Worker threads (0 = hardware)");
  app.add_flag("--paper-compat", g.paper_compat, "Use tau = 89.5 and the published rule constants");

  int code = kExitOk;
  std::function<int()> action;

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Run AC power flow");
  solve_cmd->add_option("--scenario", solve_args.scenario, "Catalog scenario id (S01..S30)");
  solve_cmd->add_option("--state", solve_args.state, "Evaluate injections and flows at this record's V/theta")
      ->check(CLI::ExistingFile);
  solve_cmd->add_option("-o,--output", solve_args.output, "Write the result as a record CSV");
  solve_cmd->add_flag("--no-q-limits", solve_args.no_q_limits, "Ignore generator reactive limits");
  solve_cmd->callback([&] { action = [&] { return cmd_solve(g, solve_args); }; });

  EstimateArgs est_args;
  auto* est_cmd = app.add_subcommand("estimate", "Weighted least squares state estimation");
  auto* est_src = est_cmd->add_option("--measurements", est_args.measurements, "Measurement CSV")->check(CLI::ExistingFile);
  est_cmd->add_option("--record", est_args.record, "Measure a record's state instead")
      ->check(CLI::ExistingFile)
      ->excludes(est_src);
  est_cmd->add_flag("--noise", est_args.noise, "Add Gaussian noise (uses --seed)");
  est_cmd->add_flag("--dc", est_args.dc, "Linear DC estimator");
  est_cmd->add_flag("--remove-bad-data", est_args.remove_bad_data, "Largest normalized residual elimination");
  est_cmd->callback([&] { action = [&] { return cmd_estimate(g, est_args); }; });

  AttackArgs atk;
  auto* attack = app.add_subcommand("attack", "Forge attack vectors and corrupted records");
  attack->require_subcommand(1);
  auto common = [&](CLI::App* c) {
    c->add_option("-o,--output", atk.output, "Output file (default stdout)");
  };
  auto* stealth = attack->add_subcommand("stealth", "a = H c for a state shift at one bus");
  common(stealth);
  stealth->add_option("--bus", atk.bus, "Bus to shift")->required();
  stealth->add_option("--dtheta", atk.dtheta_deg, "Angle shift, degrees");
  stealth->add_option("--dv", atk.dv, "Magnitude shift, p.u. (AC only)");
  stealth->add_flag("--ac", atk.ac, "a = h(x + c) - h(x) on the AC model");
  stealth->add_option("--record", atk.record, "Operating point for --ac, or base for --apply")->check(CLI::ExistingFile);
  stealth->add_option("--apply", atk.apply, "Write --record with the attack added");
  stealth->callback([&] { action = [&] { return cmd_attack_stealth(g, atk); }; });
  auto* s1a = attack->add_subcommand("1a", "Coordinated attack of scenario 1A");
  common(s1a);
  s1a->add_option("--record", atk.record, "Base record for --apply")->check(CLI::ExistingFile);
  s1a->add_option("--apply", atk.apply, "Write --record with the attack added");
  s1a->callback([&] { action = [&] { return cmd_attack_1a(g, atk); }; });
  auto* s1b = attack->add_subcommand("1b", "Eight-point attack of scenario 1B");
  common(s1b);
  s1b->add_flag("--noise", atk.noise, "Add the seeded masking noise");
  s1b->add_option("--record", atk.record, "Base record for --apply")->check(CLI::ExistingFile);
  s1b->add_option("--apply", atk.apply, "Write --record with the attack added");
  s1b->callback([&] { action = [&] { return cmd_attack_1b(g, atk); }; });
  auto* post = attack->add_subcommand("post-se", "Manipulate a stored state vector");
  common(post);
  post->add_option("--record", atk.record, "Post-SE record")->required()->check(CLI::ExistingFile);
  post->add_option("--delta", atk.delta, "State delta JSON")->required()->check(CLI::ExistingFile);
  post->callback([&] { action = [&] { return cmd_attack_post_se(g, atk); }; });
  auto* topo = attack->add_subcommand("topology", "Invert stored breaker statuses");
  common(topo);
  topo->add_option("--record", atk.record, "Post-SE record")->required()->check(CLI::ExistingFile);
  topo->add_option("--flip", atk.flips, "Branch to invert, e.g. 2-4 (repeatable)")->required();
  topo->callback([&] { action = [&] { return cmd_attack_topology(g, atk); }; });

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Per-bus stealth range under the NERC band");
  sweep->add_option("--baseline", sw.baseline, "Baseline record")->required()->check(CLI::ExistingFile);
  sweep->add_option("--bus", sw.bus, "Bus to sweep");
  sweep->add_flag("--all-buses", sw.all, "Sweep every bus");
  sweep->add_option("--points", sw.points, "Grid points across the window");
  sweep->add_option("--estimator", sw.estimator, "ac or linearized");
  sweep->add_option("--log", sw.log, "Write the per-point log CSV");
  sweep->add_option("--summary", sw.summary, "Write the range summary CSV");
  sweep->callback([&] { action = [&] { return cmd_sweep(g, sw); }; });

  FitArgs fit;
  auto* fitc = app.add_subcommand("baseline-fit", "Fit feature mean and covariance");
  fitc->add_option("records", fit.records, "Normal records (default: the scenario catalog)");
  fitc->add_option("-o,--output", fit.output, "Baseline JSON");
  fitc->callback([&] { action = [&] { return cmd_baseline_fit(g, fit); }; });

  DetectArgs det;
  auto* detect = app.add_subcommand("detect", "Classify a snapshot against a baseline record");
  detect->add_option("--baseline", det.baseline, "Baseline record")->required()->check(CLI::ExistingFile);
  detect->add_option("--snapshot", det.snapshot, "Snapshot record")->required()->check(CLI::ExistingFile);
  auto* feat = detect->add_option("--features", det.features, "Feature baseline JSON")->check(CLI::ExistingFile);
  detect->add_flag("--fit-features", det.fit_features, "Fit the feature baseline from the catalog")->excludes(feat);
  detect->add_flag("--text", det.text, "Human-readable report instead of verdict JSON");
  detect->add_option("--report", det.report, "Also write the full JSON report here");
  detect->callback([&] { action = [&] { return cmd_detect(g, det); }; });

  ScenarioArgs sc;
  auto* scen = app.add_subcommand("scenario", "Contingency catalog");
  scen->require_subcommand(1);
  scen->add_subcommand("list", "List the catalog")->callback([&] { action = [] { return cmd_scenario_list(); }; });
  auto* srun = scen->add_subcommand("run", "Solve catalog scenarios");
  srun->add_option("--id", sc.id, "Scenario id");
  srun->add_flag("--all", sc.all, "Every scenario");
  srun->add_option("--output-dir", sc.output_dir, "Write one record CSV per scenario");
  srun->callback([&] { action = [&] { return cmd_scenario_run(g, sc); }; });

  SomArgs sa;
  auto* som = app.add_subcommand("som", "Set-of-Mark display segments");
  som->require_subcommand(1);
  auto* arrange = som->add_subcommand("arrange", "Solve the grid arrangement");
  arrange->add_option("--dir", sa.dir, "Directory of segment JSON files")->check(CLI::ExistingDirectory);
  arrange->add_option("segments", sa.files, "Segment files");
  arrange->add_option("--n", sa.n, "Grid side");
  arrange->add_flag("--all", sa.all, "Print every solution");
  arrange->add_option("-o,--output", sa.output, "Output file");
  arrange->callback([&] { action = [&] { return cmd_som_arrange(g, sa); }; });
  auto* verify = som->add_subcommand("verify", "Check an arrangement against the markers");
  verify->add_option("--dir", sa.dir, "Directory of segment JSON files")->check(CLI::ExistingDirectory);
  verify->add_option("segments", sa.files, "Segment files");
  verify->add_option("--arrangement", sa.arrangement, "Arrangement JSON")->required()->check(CLI::ExistingFile);
  verify->callback([&] { action = [&] { return cmd_som_verify(g, sa); }; });
  auto* diff = som->add_subcommand("diff", "Compare a display against the reference");
  diff->add_option("--reference", sa.reference, "Reference segment directory")->required()->check(CLI::ExistingDirectory);
  diff->add_option("--candidate", sa.candidate, "Candidate segment directory")->required()->check(CLI::ExistingDirectory);
  diff->add_option("--arrangement", sa.arrangement, "Reference arrangement JSON")->check(CLI::ExistingFile);
  diff->add_option("-o,--output", sa.output, "Output file");
  diff->callback([&] { action = [&] { return cmd_som_diff(g, sa); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }
  try {
    code = action ? action() : kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return code;
}

}  // namespace gridsec::cli
