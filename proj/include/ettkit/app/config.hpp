/**
 * @file config.hpp
 * @brief JSON scenario configuration: parsing, validation and materialisation.
 *
 * Relative file paths are resolved against the configuration file's directory.
 * Validation errors are ConfigErrors whose message starts with the field path.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ettkit/app/scenarios.hpp"
#include "ettkit/error.hpp"
#include "ettkit/neural/siren_json.hpp"
#include "ettkit/symexpr/graph_json.hpp"
#include "ettkit/taylor/jet_transport.hpp"
#include "ettkit/uq/distribution.hpp"

namespace ettkit {

struct ObservableConfig {
  enum class Kind { state, norm, time, expression };
  std::string name;
  Kind kind = Kind::state;
  std::vector<std::size_t> states;
  ExprGraph graph;  ///< for expression observables: arity of the system
};

struct TrainConfig {
  std::string dataset;  ///< CSV path; empty when synthesising
  std::vector<double> synth_params;
  double synth_dt = 0.5;
  std::size_t synth_points = 10;
  std::size_t steps = 100;
  double lr = 1e-2;
  std::string trainable = "net";  ///< net | physical | all
  std::size_t batch_segments = 0;
  bool resume = false;
};

struct ScenarioConfig {
  Scenario scenario;
  std::vector<double> x0;
  std::vector<double> theta;
  ExprGraph event;
  std::optional<double> fixed_time;
  double t_max = 10.0;
  VarySpec vary;
  std::size_t order = 4;
  double tol = 1e-15;
  std::optional<DistributionSpec> distribution;
  std::vector<ObservableConfig> observables;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  std::size_t moment_order = 4;
  std::size_t surrogate_samples = 100000;
  std::vector<double> probabilities = {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99};
  std::map<std::string, std::vector<double>> thresholds;
  std::size_t histogram_bins = 0;

  std::size_t mc_samples = 1000;
  std::vector<double> mc_radii;

  double sim_t_end = 10.0;
  double sim_dt = 0.1;
  bool sim_stop_at_event = true;

  TrainConfig train;
};

namespace detail {

class Fields {
 public:
  Fields(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError(name("") + ": expected an object");
    }
  }

  [[nodiscard]] bool has(const char* key) const { return j_.contains(key) && !j_[key].is_null(); }
  [[nodiscard]] const nlohmann::json& raw(const char* key) const {
    if (!has(key)) {
      throw ConfigError(name(key) + ": missing");
    }
    return j_[key];
  }
  [[nodiscard]] std::string name(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  [[nodiscard]] double number(const char* key, std::optional<double> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      throw ConfigError(name(key) + ": missing");
    }
    if (!j_[key].is_number()) throw ConfigError(name(key) + ": expected a number");
    return j_[key].get<double>();
  }
  [[nodiscard]] std::uint64_t uint(const char* key, std::optional<std::uint64_t> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      throw ConfigError(name(key) + ": missing");
    }
    const auto& v = j_[key];
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) throw ConfigError(name(key) + ": expected a non-negative integer");
    return j_[key].get<std::uint64_t>();
  }
  [[nodiscard]] bool boolean(const char* key, bool def) const {
    if (!has(key)) return def;
    if (!j_[key].is_boolean()) throw ConfigError(name(key) + ": expected true or false");
    return j_[key].get<bool>();
  }
  [[nodiscard]] std::string string(const char* key, std::optional<std::string> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      throw ConfigError(name(key) + ": missing");
    }
    if (!j_[key].is_string()) throw ConfigError(name(key) + ": expected a string");
    return j_[key].get<std::string>();
  }
  [[nodiscard]] std::vector<double> numbers(const char* key) const {
    const auto& a = raw(key);
    if (!a.is_array()) throw ConfigError(name(key) + ": expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number()) throw ConfigError(name(key) + "[" + std::to_string(i) + "]: expected a number");
      v.push_back(a[i].get<double>());
    }
    return v;
  }
  [[nodiscard]] Fields object(const char* key) const { return Fields(raw(key), name(key)); }

 private:
  const nlohmann::json& j_;
  std::string path_;
};

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path q(p);
  return (q.is_absolute() ? q : base / q).lexically_normal().string();
}

inline nlohmann::json read_json_file(const std::string& path, const std::string& field) {
  std::ifstream is(path);
  if (!is) {
    throw ConfigError(field + ": cannot read " + path);
  }
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(field + ": malformed JSON in " + path + " (" + e.what() + ")");
  }
}

/// Index of a state or parameter given by name or number.
inline std::size_t lookup(const nlohmann::json& v, const std::vector<std::string>& names, const std::string& field) {
  if (v.is_number_integer() && (v.is_number_unsigned() || v.get<std::int64_t>() >= 0)) {
    const auto i = v.get<std::size_t>();
    if (i >= names.size()) throw ConfigError(field + ": index " + std::to_string(i) + " out of range");
    return i;
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == s) return i;
    }
    throw ConfigError(field + ": unknown name '" + s + "'");
  }
  throw ConfigError(field + ": expected a name or an index");
}

inline std::vector<std::size_t> lookup_list(const Fields& f, const char* key, const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  if (!f.has(key)) return out;
  const auto& a = f.raw(key);
  if (!a.is_array()) throw ConfigError(f.name(key) + ": expected an array");
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.push_back(lookup(a[i], names, f.name(key) + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline NetChoice parse_net(const Fields& f, const std::filesystem::path& base) {
  NetChoice c;
  if (f.has("file")) {
    c.kind = NetChoice::Kind::given;
    const auto path = resolve(base, f.string("file"));
    c.weights = siren_from_json(read_json_file(path, f.name("file")), f.name("file"));
    return c;
  }
  const auto init = f.string("init", "default");
  if (init == "zero") {
    c.kind = NetChoice::Kind::zero;
  } else if (init == "siren") {
    c.kind = NetChoice::Kind::siren;
    c.seed = f.uint("seed", 0);
    c.scale = f.number("scale", 1.0);
  } else if (init != "default") {
    throw ConfigError(f.name("init") + ": expected zero, siren or default");
  }
  return c;
}

inline ExprGraph parse_event(const Fields& f, const OdeSystem& sys, const std::filesystem::path& base,
                             std::optional<double>& fixed_time) {
  const std::size_t n = sys.dim();
  const auto type = f.string("type");
  if (type == "hyperplane") {
    const auto normal = f.numbers("normal");
    if (normal.size() != n) {
      throw ConfigError(f.name("normal") + ": expected " + std::to_string(n) + " entries");
    }
    const double offset = f.number("offset", 0.0);
    return make_expression(n, 0, [&](ExprGraph& g) {
      Expr acc = g.constant(-offset);
      for (std::size_t i = 0; i < n; ++i) {
        acc = acc + normal[i] * g.var(i);
      }
      return acc;
    });
  }
  if (type == "sphere") {
    const auto centre = f.numbers("center");
    if (centre.empty() || centre.size() > n) {
      throw ConfigError(f.name("center") + ": expected 1.." + std::to_string(n) + " entries");
    }
    const double r = f.number("radius");
    if (!(r > 0.0)) throw ConfigError(f.name("radius") + ": must be positive");
    return make_expression(n, 0, [&](ExprGraph& g) {
      Expr acc = g.constant(-r * r);
      for (std::size_t i = 0; i < centre.size(); ++i) {
        const Expr d = g.var(i) - centre[i];
        acc = acc + d * d;
      }
      return acc;
    });
  }
  if (type == "expression") {
    ExprGraph g;
    try {
      g = graph_from_json(read_json_file(resolve(base, f.string("file")), f.name("file")));
    } catch (const DimensionError& e) {
      throw ConfigError(f.name("file") + ": " + e.what());
    }
    if (g.n_vars() != n || g.n_params() > sys.n_params() || g.roots().size() != 1) {
      throw ConfigError(f.name("file") + ": event graph must have " + std::to_string(n) +
                        " variables, at most " + std::to_string(sys.n_params()) + " parameters and one root");
    }
    return g;
  }
  if (type == "siren_surface") {
    const auto path = resolve(base, f.string("file"));
    const auto net = siren_from_json(read_json_file(path, f.name("file")), f.name("file"));
    if (net.n_in() > n) {
      throw ConfigError(f.name("file") + ": surface network has more inputs than the system has states");
    }
    const auto out = f.uint("output", 0);
    if (out >= net.n_out()) throw ConfigError(f.name("output") + ": out of range");
    ExprGraph g(n, 0);
    std::vector<Expr> in;
    for (std::size_t i = 0; i < net.n_in(); ++i) {
      in.push_back(g.var(i));
    }
    g.set_roots({emit_siren(g, net, in)[out].id()});
    return g;
  }
  if (type == "fixed_time") {
    const double T = f.number("T");
    if (!(T > 0.0)) throw ConfigError(f.name("T") + ": must be positive");
    fixed_time = T;
    return make_expression(n, 0, [&](ExprGraph& g) { return g.time() - T; });
  }
  throw ConfigError(f.name("type") + ": expected hyperplane, sphere, expression, siren_surface or fixed_time");
}

inline std::vector<ObservableConfig> parse_observables(const Fields& top, const OdeSystem& sys,
                                                       const std::filesystem::path& base) {
  std::vector<ObservableConfig> out;
  if (!top.has("observables")) {
    return out;
  }
  const auto& arr = top.raw("observables");
  if (!arr.is_array()) throw ConfigError("observables: expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const Fields f(arr[i], "observables[" + std::to_string(i) + "]");
    ObservableConfig o;
    o.name = f.string("name");
    if (f.has("state")) {
      o.kind = ObservableConfig::Kind::state;
      o.states = {lookup(f.raw("state"), sys.state_names(), f.name("state"))};
    } else if (f.has("norm")) {
      o.kind = ObservableConfig::Kind::norm;
      o.states = lookup_list(f, "norm", sys.state_names());
      if (o.states.empty()) throw ConfigError(f.name("norm") + ": expected at least one state");
    } else if (f.boolean("time", false)) {
      o.kind = ObservableConfig::Kind::time;
    } else if (f.has("file")) {
      o.kind = ObservableConfig::Kind::expression;
      o.graph = graph_from_json(read_json_file(resolve(base, f.string("file")), f.name("file")));
      if (o.graph.n_vars() != sys.dim() || o.graph.roots().size() != 1) {
        throw ConfigError(f.name("file") + ": observable graph must have the system arity and one root");
      }
    } else {
      throw ConfigError(f.name("") + ": expected one of state, norm, time or file");
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace detail

/// Parses and validates a configuration; `base` resolves relative paths.
[[nodiscard]] inline ScenarioConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base = ".") {
  const detail::Fields top(j, "");
  ScenarioConfig c;

  NetChoice net;
  if (top.has("net")) {
    net = detail::parse_net(top.object("net"), base);
  }
  const auto sysf = top.object("system");
  if (sysf.has("id")) {
    c.scenario = make_scenario(sysf.string("id"), net);
  } else if (sysf.has("graph")) {
    const auto path = detail::resolve(base, sysf.string("graph"));
    ExprGraph g = graph_from_json(detail::read_json_file(path, sysf.name("graph")));
    std::vector<double> defaults = sysf.has("params") ? sysf.numbers("params") : std::vector<double>(g.n_params(), 0.0);
    if (defaults.size() != g.n_params()) {
      throw ConfigError(sysf.name("params") + ": expected " + std::to_string(g.n_params()) + " entries");
    }
    try {
      c.scenario.id = "graph";
      c.scenario.sys = OdeSystem(std::move(g), defaults);
    } catch (const DimensionError& e) {
      throw ConfigError(sysf.name("graph") + ": " + e.what());
    }
    c.scenario.x0.assign(c.scenario.sys.dim(), 0.0);
    for (std::size_t k = 0; k < defaults.size(); ++k) {
      c.scenario.physical_params.push_back(k);
    }
  } else {
    throw ConfigError("system: expected id or graph");
  }
  const OdeSystem& sys = c.scenario.sys;
  const std::size_t n = sys.dim();

  c.theta = sys.param_defaults();
  if (top.has("params")) {
    const auto& p = top.raw("params");
    if (!p.is_object()) throw ConfigError("params: expected an object of name: value");
    for (const auto& [key, val] : p.items()) {
      const auto k = detail::lookup(nlohmann::json(key), sys.param_names(), "params." + key);
      if (!val.is_number()) throw ConfigError("params." + key + ": expected a number");
      c.theta[k] = val.get<double>();
    }
  }

  c.x0 = top.has("x0") ? top.numbers("x0") : c.scenario.x0;
  if (c.x0.size() != n) {
    throw ConfigError("x0: expected " + std::to_string(n) + " entries, got " + std::to_string(c.x0.size()));
  }

  c.t_max = top.number("t_max", c.scenario.t_end);
  if (!(c.t_max > 0.0)) throw ConfigError("t_max: must be positive");
  if (top.has("event")) {
    c.event = detail::parse_event(top.object("event"), sys, base, c.fixed_time);
  } else {
    c.event = c.scenario.event;
  }

  if (top.has("vary")) {
    const auto v = top.object("vary");
    c.vary.states = detail::lookup_list(v, "states", sys.state_names());
    c.vary.params = detail::lookup_list(v, "params", sys.param_names());
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      c.vary.states.push_back(i);
    }
  }
  try {
    c.vary.validate(n, sys.n_params());
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("vary: ") + e.what());
  }

  const auto order = top.uint("order", 4);
  if (order < 1 || order > 255) throw ConfigError("order: must be in [1, 255]");
  c.order = order;
  c.tol = top.number("tol", 1e-15);
  if (!(c.tol > 0.0 && c.tol <= 1e-3)) throw ConfigError("tol: must lie in (0, 1e-3]");
  c.seed = top.uint("seed", 0);
  c.threads = top.uint("threads", 1);
  if (c.threads < 1) throw ConfigError("threads: must be at least 1");

  if (top.has("distribution")) {
    c.distribution = distribution_from_json(top.raw("distribution"), "distribution");
    if (c.distribution->size() != c.vary.size()) {
      throw ConfigError("distribution: expected one marginal per varied input (" + std::to_string(c.vary.size()) +
                        ")");
    }
  }
  c.observables = detail::parse_observables(top, sys, base);

  if (top.has("uq")) {
    const auto u = top.object("uq");
    c.moment_order = u.uint("moment_order", 4);
    if (c.moment_order < 1) throw ConfigError("uq.moment_order: must be at least 1");
    c.surrogate_samples = u.uint("samples", c.surrogate_samples);
    if (c.surrogate_samples < 1) throw ConfigError("uq.samples: must be positive");
    if (u.has("quantiles")) {
      c.probabilities = u.numbers("quantiles");
      for (double p : c.probabilities) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("uq.quantiles: probabilities must lie in [0, 1]");
      }
    }
    if (u.has("thresholds")) {
      const auto& t = u.raw("thresholds");
      if (!t.is_object()) throw ConfigError("uq.thresholds: expected an object of output: [values]");
      const detail::Fields tf(t, "uq.thresholds");
      for (const auto& [key, val] : t.items()) {
        c.thresholds[key] = tf.numbers(key.c_str());
      }
    }
    c.histogram_bins = u.uint("histogram_bins", 0);
  }

  if (top.has("mc")) {
    const auto m = top.object("mc");
    c.mc_samples = m.uint("samples", c.mc_samples);
    if (c.mc_samples < 1) throw ConfigError("mc.samples: must be positive");
    if (m.has("radii")) {
      c.mc_radii = m.numbers("radii");
      if (c.mc_radii.size() != c.vary.size()) {
        throw ConfigError("mc.radii: expected " + std::to_string(c.vary.size()) + " entries");
      }
      for (double r : c.mc_radii) {
        if (!(r >= 0.0)) throw ConfigError("mc.radii: entries must be non-negative");
      }
    }
  }
  if (c.mc_radii.empty() && c.distribution) {
    for (const auto& mg : c.distribution->marginals) {
      c.mc_radii.push_back(mg.kind == Marginal::Kind::gaussian ? 3.0 * mg.scale : mg.scale);
    }
  }

  c.sim_t_end = c.t_max;
  if (top.has("simulate")) {
    const auto s = top.object("simulate");
    c.sim_t_end = s.number("t_end", c.t_max);
    c.sim_dt = s.number("dt", c.sim_dt);
    c.sim_stop_at_event = s.boolean("stop_at_event", true);
    if (!(c.sim_t_end > 0.0)) throw ConfigError("simulate.t_end: must be positive");
    if (!(c.sim_dt > 0.0)) throw ConfigError("simulate.dt: must be positive");
  }

  if (top.has("train")) {
    const auto t = top.object("train");
    if (t.has("dataset")) {
      c.train.dataset = detail::resolve(base, t.string("dataset"));
    } else if (t.has("synthesize")) {
      const auto s = t.object("synthesize");
      c.train.synth_params = c.theta;
      if (s.has("params")) {
        const auto& p = s.raw("params");
        if (!p.is_object()) throw ConfigError("train.synthesize.params: expected an object of name: value");
        for (const auto& [key, val] : p.items()) {
          const auto k = detail::lookup(nlohmann::json(key), sys.param_names(), "train.synthesize.params." + key);
          if (!val.is_number()) throw ConfigError("train.synthesize.params." + key + ": expected a number");
          c.train.synth_params[k] = val.get<double>();
        }
      }
      c.train.synth_dt = s.number("dt", 0.5);
      c.train.synth_points = s.uint("points", 10);
      if (!(c.train.synth_dt > 0.0)) throw ConfigError("train.synthesize.dt: must be positive");
      if (c.train.synth_points < 1) throw ConfigError("train.synthesize.points: must be positive");
    } else {
      throw ConfigError("train: expected dataset or synthesize");
    }
    c.train.steps = t.uint("steps", 100);
    c.train.lr = t.number("lr", 1e-2);
    if (!(c.train.lr > 0.0)) throw ConfigError("train.lr: must be positive");
    c.train.trainable = t.string("trainable", c.scenario.net_in_params ? "net" : "physical");
    if (c.train.trainable != "net" && c.train.trainable != "physical" && c.train.trainable != "all") {
      throw ConfigError("train.trainable: expected net, physical or all");
    }
    if (c.train.trainable == "net" && !c.scenario.net_in_params) {
      throw ConfigError("train.trainable: this system has no trainable network weights");
    }
    c.train.batch_segments = t.uint("batch_segments", 0);
    c.train.resume = t.boolean("resume", false);
  }
  return c;
}

[[nodiscard]] inline ScenarioConfig load_config(const std::string& path) {
  const auto j = detail::read_json_file(path, "--config");
  return parse_config(j, std::filesystem::path(path).parent_path());
}

/// Parameter indices selected by train.trainable.
[[nodiscard]] inline std::vector<std::size_t> trainable_indices(const ScenarioConfig& c) {
  std::vector<std::size_t> k;
  const auto& s = c.scenario;
  if (c.train.trainable != "net") {
    k = s.physical_params;
  }
  if (c.train.trainable != "physical" && s.net_in_params) {
    for (std::size_t i = 0; i < s.net->n_params(); ++i) {
      k.push_back(s.net_offset + i);
    }
  }
  return k;
}

}  // namespace ettkit
