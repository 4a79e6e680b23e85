#include "config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "gridsec/error.hpp"

namespace gridsec::cli {

namespace {

using Setter = std::function<void(HarnessConfig&, const std::string&)>;

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("config " + key + ": '" + s + "' is not a number");
  }
}

long long to_int(const std::string& key, const std::string& s) {
  const double v = to_double(key, s);
  if (v != static_cast<double>(static_cast<long long>(v))) {
    throw ParseError("config " + key + ": '" + s + "' is not an integer");
  }
  return static_cast<long long>(v);
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ParseError("config " + key + ": '" + s + "' is not a boolean");
}

template <typename T>
Setter real(T HarnessConfig::*group, double T::*field) {
  return [=](HarnessConfig& c, const std::string& v) { (c.*group).*field = to_double("", v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto rule = [&](const char* name, double RuleConfig::*f) {
      t[std::string("rules.") + name] = [=](HarnessConfig& c, const std::string& v) {
        c.pipeline.rules.*f = to_double(name, v);
      };
    };
    rule("sensitivity_lo", &RuleConfig::sensitivity_lo);
    rule("sensitivity_hi", &RuleConfig::sensitivity_hi);
    rule("sensitivity_min_dv", &RuleConfig::sensitivity_min_dv);
    rule("sensitivity_min_dp", &RuleConfig::sensitivity_min_dp);
    rule("ramp_limit", &RuleConfig::ramp_limit);
    rule("ramp_min_base", &RuleConfig::ramp_min_base);
    rule("zip_alpha_lo", &RuleConfig::zip_alpha_lo);
    rule("zip_alpha_hi", &RuleConfig::zip_alpha_hi);
    rule("zip_min_rel_dp", &RuleConfig::zip_min_rel_dp);
    rule("zip_min_rel_dv", &RuleConfig::zip_min_rel_dv);
    rule("compensation_lo", &RuleConfig::compensation_lo);
    rule("compensation_hi", &RuleConfig::compensation_hi);
    rule("compensation_entropy_ratio", &RuleConfig::compensation_entropy_ratio);
    rule("gradient_max", &RuleConfig::gradient_max);
    rule("correlation_shift_max", &RuleConfig::correlation_shift_max);
    rule("sign_flip_min_mw", &RuleConfig::sign_flip_min_mw);
    rule("loss_ratio_warn", &RuleConfig::loss_ratio_warn);
    rule("open_flow_tol_mw", &RuleConfig::open_flow_tol_mw);
    rule("island_balance_tol_mw", &RuleConfig::island_balance_tol_mw);
    rule("voltage_deviation_warn", &RuleConfig::voltage_deviation_warn);
    t["rules.compensation_min_count"] = [](HarnessConfig& c, const std::string& v) {
      c.pipeline.rules.compensation_min_count = static_cast<int>(to_int("compensation_min_count", v));
    };

    t["bdd.alpha"] = [](HarnessConfig& c, const std::string& v) { c.pipeline.alpha = to_double("alpha", v); };
    t["bdd.paper_compat"] = [](HarnessConfig& c, const std::string& v) {
      c.pipeline.paper_compat = to_bool("paper_compat", v);
    };
    t["bdd.recorded_df"] = [](HarnessConfig& c, const std::string& v) {
      c.pipeline.recorded_df = static_cast<int>(to_int("recorded_df", v));
    };
    t["bdd.sigma_v"] = [](HarnessConfig& c, const std::string& v) { c.pipeline.noise.sigma_v = to_double("sigma_v", v); };
    t["bdd.sigma_power"] = [](HarnessConfig& c, const std::string& v) {
      c.pipeline.noise.sigma_power = to_double("sigma_power", v);
    };

    t["sweep.points"] = [](HarnessConfig& c, const std::string& v) {
      c.sweep.n_points = static_cast<int>(to_int("points", v));
    };
    t["sweep.window_lo"] = real(&HarnessConfig::sweep, &SweepOptions::window_lo);
    t["sweep.window_hi"] = real(&HarnessConfig::sweep, &SweepOptions::window_hi);
    t["sweep.nerc_lo"] = real(&HarnessConfig::sweep, &SweepOptions::nerc_lo);
    t["sweep.nerc_hi"] = real(&HarnessConfig::sweep, &SweepOptions::nerc_hi);
    t["sweep.threshold"] = real(&HarnessConfig::sweep, &SweepOptions::threshold);
    t["sweep.sigma_v"] = [](HarnessConfig& c, const std::string& v) { c.sweep.noise.sigma_v = to_double("sigma_v", v); };
    t["sweep.sigma_power"] = [](HarnessConfig& c, const std::string& v) {
      c.sweep.noise.sigma_power = to_double("sigma_power", v);
    };
    t["sweep.estimator"] = [](HarnessConfig& c, const std::string& v) {
      if (v == "ac") {
        c.sweep.estimator = SweepEstimator::Ac;
      } else if (v == "linearized" || v == "dc") {
        c.sweep.estimator = SweepEstimator::Linearized;
      } else {
        throw ParseError("config estimator: expected ac or linearized, got '" + v + "'");
      }
    };
    t["sweep.refine_edges"] = [](HarnessConfig& c, const std::string& v) {
      c.sweep.refine_edges = to_bool("refine_edges", v);
    };
    t["sweep.refine_iterations"] = [](HarnessConfig& c, const std::string& v) {
      c.sweep.refine_iterations = static_cast<int>(to_int("refine_iterations", v));
    };

    t["features.max_condition"] = real(&HarnessConfig::features, &BaselineOptions::max_condition);
    t["features.min_lambda"] = real(&HarnessConfig::features, &BaselineOptions::min_lambda);
    t["features.constant_rel"] = real(&HarnessConfig::features, &BaselineOptions::constant_rel);
    t["features.threshold_factor"] = real(&HarnessConfig::features, &BaselineOptions::threshold_factor);

    t["som.voltage_tolerance"] = real(&HarnessConfig::som_diff, &som::DiffOptions::voltage_tolerance);
    t["som.max_solutions"] = [](HarnessConfig& c, const std::string& v) {
      c.som_max_solutions = static_cast<std::size_t>(to_int("max_solutions", v));
    };

    t["attack.scenario_1b_noise"] = [](HarnessConfig& c, const std::string& v) {
      c.scenario_1b_noise = to_double("scenario_1b_noise", v);
    };
    t["run.workers"] = [](HarnessConfig& c, const std::string& v) {
      c.workers = static_cast<unsigned>(to_int("workers", v));
    };
    t["run.seed"] = [](HarnessConfig& c, const std::string& v) {
      c.seed = static_cast<std::uint64_t>(to_int("seed", v));
    };
    return t;
  }();
  return table;
}

}  // namespace

HarnessConfig parse_config(const std::string& text) {
  HarnessConfig config;
  std::istringstream in(text);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML{}.from_config(in);
  } catch (const CLI::Error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  for (const CLI::ConfigItem& item : items) {
    // CLI11 emits section open/close markers as items named "++" and "--".
    if (item.name == "++" || item.name == "--") continue;
    const std::string key = item.fullname();
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError("config: unknown key '" + key + "'");
    if (item.inputs.size() != 1) throw ParseError("config " + key + ": expected a single value");
    try {
      it->second(config, item.inputs.front());
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()) + " (" + key + ")");
    }
  }
  return config;
}

HarnessConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_paper_compat(HarnessConfig& config) {
  config.pipeline.paper_compat = true;
  config.sweep.threshold = kPaperCompatThreshold;
  config.pipeline.rules = RuleConfig{};
}

}  // namespace gridsec::cli
