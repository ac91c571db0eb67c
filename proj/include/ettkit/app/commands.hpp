/**
 * @file commands.hpp
 * @brief The CLI subcommands as library calls writing into an output directory.
 *
 * Files written (all names fixed):
 *   simulate     trajectory.csv, simulate.json
 *   ett          ett.json
 *   uq           uq.json
 *   mc-validate  mc.json
 *   train        train_log.csv, params.json, weights.json (when the net is trained),
 *                dataset.csv (when synthesised)
 * Each returns a short human-readable summary.
 */
#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ettkit/app/config.hpp"
#include "ettkit/ett.hpp"
#include "ettkit/neural.hpp"
#include "ettkit/taylor.hpp"
#include "ettkit/training.hpp"
#include "ettkit/uq.hpp"

namespace ettkit {

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) {
    throw ConfigError("--out: cannot write " + p.string());
  }
  os << text;
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

inline const ExprGraph& require_event(const ScenarioConfig& c) {
  if (c.event.roots().size() != 1) {
    throw ConfigError("event: missing");
  }
  return c.event;
}

inline TaylorOptions taylor_options(const ScenarioConfig& c) {
  TaylorOptions o;
  o.tol = c.tol;
  return o;
}

inline EttResult load_or_compute_ett(const ScenarioConfig& c, const std::optional<std::string>& ett_path);

}  // namespace detail

[[nodiscard]] inline EttResult run_ett_compute(const ScenarioConfig& c) {
  EttOptions o;
  o.tol = c.tol;
  o.t_max = c.t_max;
  return compute_ett(c.scenario.sys, detail::require_event(c), c.x0, c.theta, c.vary, c.order, o);
}

inline EttResult detail::load_or_compute_ett(const ScenarioConfig& c, const std::optional<std::string>& ett_path) {
  if (!ett_path) {
    return run_ett_compute(c);
  }
  auto r = ett_from_json(read_json_file(*ett_path, "--ett"));
  if (r.x_event.size() != c.scenario.sys.dim() || r.theta.size() != c.scenario.sys.n_params()) {
    throw ConfigError("--ett: expansion does not match the configured system");
  }
  return r;
}

inline std::string run_simulate(const ScenarioConfig& c, const std::filesystem::path& out) {
  const auto& sys = c.scenario.sys;
  const auto opt = detail::taylor_options(c);
  double t_stop = c.sim_t_end;
  nlohmann::json summary;
  summary["t_end"] = c.sim_t_end;
  summary["event"] = nullptr;
  if (c.sim_stop_at_event && c.event.roots().size() == 1) {
    const auto hit = detect_event(sys, c.event, c.x0, std::span<const double>(c.theta), 0.0, c.sim_t_end, opt);
    t_stop = hit.t;
    summary["event"] = {{"t", hit.t}, {"x", hit.x}, {"residual", hit.residual}};
  }
  const auto traj = propagate(sys, c.x0, c.theta, 0.0, t_stop, opt);
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double t = c.sim_dt * static_cast<double>(i);
    if (t >= t_stop) break;
    grid.push_back(t);
  }
  grid.push_back(t_stop);
  std::ostringstream csv;
  write_trajectory_csv(csv, traj, grid, sys.state_names());
  detail::write_text(out / "trajectory.csv", csv.str());
  summary["t_stop"] = t_stop;
  summary["terminal"] = traj.terminal;
  summary["steps"] = traj.step_count;
  summary["states"] = sys.state_names();
  detail::write_json(out / "simulate.json", summary);
  std::ostringstream msg;
  msg.precision(17);
  msg << "simulated " << c.scenario.id << " to t = " << t_stop << " in " << traj.step_count << " steps"
      << (summary["event"].is_null() ? "" : " (event)") << '\n';
  return msg.str();
}

inline std::string run_ett(const ScenarioConfig& c, const std::filesystem::path& out) {
  const auto r = run_ett_compute(c);
  detail::write_json(out / "ett.json", ett_to_json(r));
  std::ostringstream msg;
  msg.precision(17);
  msg << "t* = " << r.t_star << '\n'
      << "coefficients per output: " << ett_coefficient_count(r.n_inputs(), r.order) << " (m = " << r.n_inputs()
      << ", k = " << r.order << ")\n";
  return msg.str();
}

/// Observables of the configuration as polynomials in the input deviations.
[[nodiscard]] inline PolyMap observable_map(const ScenarioConfig& c, const EttResult& r) {
  std::vector<TruncatedPoly> polys;
  std::vector<std::string> labels;
  const auto& names = c.scenario.sys.state_names();
  const std::size_t n = r.x_event.size();
  if (c.observables.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      polys.push_back(r.ett_map[i]);
      labels.push_back(names[i]);
    }
    polys.push_back(r.dT_poly + r.t_star);
    labels.push_back("t");
    return PolyMap(std::move(polys), std::move(labels));
  }
  for (const auto& o : c.observables) {
    switch (o.kind) {
      case ObservableConfig::Kind::state:
        polys.push_back(r.ett_map[o.states[0]]);
        break;
      case ObservableConfig::Kind::time:
        polys.push_back(r.dT_poly + r.t_star);
        break;
      case ObservableConfig::Kind::norm: {
        auto g = make_expression(n, 0, [&](ExprGraph& h) {
          Expr acc = h.constant(0.0);
          for (auto i : o.states) {
            acc = acc + h.var(i) * h.var(i);
          }
          return sqrt(acc);
        });
        polys.push_back(compose_observable(g, r));
        break;
      }
      case ObservableConfig::Kind::expression:
        polys.push_back(compose_observable(o.graph, r));
        break;
    }
    labels.push_back(o.name);
  }
  return PolyMap(std::move(polys), std::move(labels));
}

inline std::string run_uq(const ScenarioConfig& c, const std::filesystem::path& out,
                          const std::optional<std::string>& ett_path = std::nullopt) {
  if (!c.distribution) {
    throw ConfigError("distribution: missing (needed by uq)");
  }
  const auto r = detail::load_or_compute_ett(c, ett_path);
  if (r.n_inputs() != c.distribution->size()) {
    throw ConfigError("distribution: expected one marginal per expansion input (" + std::to_string(r.n_inputs()) +
                      ")");
  }
  const auto map = observable_map(c, r);
  const auto moments = propagate_moments(map, *c.distribution, c.moment_order);
  SurrogateOptions so;
  so.n = c.surrogate_samples;
  so.seed = c.seed;
  so.threads = c.threads;
  so.probabilities = c.probabilities;
  so.histogram_bins = c.histogram_bins;
  for (const auto& [label, values] : c.thresholds) {
    const auto& labels = map.labels();
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
      throw ConfigError("uq.thresholds." + label + ": no such output");
    }
    so.output_thresholds.resize(labels.size());
    so.output_thresholds[static_cast<std::size_t>(it - labels.begin())] = values;
  }
  const auto sur = surrogate_quantiles(map, *c.distribution, so);
  auto j = uq_report_to_json(moments, &sur);
  j["distribution"] = distribution_to_json(*c.distribution);
  j["inputs"] = r.input_labels;
  detail::write_json(out / "uq.json", j);
  std::ostringstream msg;
  msg.precision(10);
  for (std::size_t i = 0; i < map.size(); ++i) {
    msg << map.labels()[i] << ": mean " << moments.mean[i] << ", std " << std::sqrt(moments.covariance[i][i])
        << '\n';
  }
  return msg.str();
}

inline std::string run_mc_validate(const ScenarioConfig& c, const std::filesystem::path& out,
                                   const std::optional<std::string>& ett_path = std::nullopt) {
  const auto r = detail::load_or_compute_ett(c, ett_path);
  if (c.mc_radii.size() != r.n_inputs()) {
    throw ConfigError("mc.radii: expected " + std::to_string(r.n_inputs()) +
                      " entries (or a distribution to derive them from)");
  }
  McOptions mo;
  mo.threads = c.threads;
  mo.tol = c.tol;
  mo.t_max = c.t_max;
  const auto rep =
      validate_mc(r, c.scenario.sys, detail::require_event(c), box_sampler(c.mc_radii, c.seed), c.mc_samples, mo);
  auto j = mc_report_to_json(rep);
  j["radii"] = c.mc_radii;
  j["seed"] = c.seed;
  j["order"] = r.order;
  detail::write_json(out / "mc.json", j);
  std::ostringstream msg;
  msg.precision(6);
  msg << rep.succeeded << "/" << rep.requested << " samples; max abs state error " << rep.max_abs_state
      << ", max rel " << rep.max_rel_state << '\n';
  return msg.str();
}

/// Observations of the configured system sampled every dt from x0.
[[nodiscard]] inline Dataset synthesize_dataset(const OdeSystem& sys, const std::vector<double>& theta,
                                                std::vector<double> x0, double dt, std::size_t points,
                                                const TaylorOptions& opt = {}) {
  Dataset d;
  d.t.push_back(0.0);
  d.x.push_back(x0);
  for (std::size_t i = 1; i <= points; ++i) {
    const double t0 = dt * static_cast<double>(i - 1);
    const double t1 = dt * static_cast<double>(i);
    x0 = propagate(sys, x0, theta, t0, t1, opt).terminal;
    d.t.push_back(t1);
    d.x.push_back(x0);
  }
  return d;
}

inline nlohmann::json params_to_json(const OdeSystem& sys, const std::vector<double>& theta, std::size_t step) {
  return {{"names", sys.param_names()}, {"theta", theta}, {"step", step}};
}

inline std::string run_train(const ScenarioConfig& c, const std::filesystem::path& out) {
  const auto& sys = c.scenario.sys;
  const auto opt = detail::taylor_options(c);
  if (c.train.dataset.empty() && c.train.synth_params.empty()) {
    throw ConfigError("train: missing (needs dataset or synthesize)");
  }
  Dataset data;
  if (!c.train.dataset.empty()) {
    data = read_dataset_csv(c.train.dataset);
    data.validate(sys.dim());
  } else {
    data = synthesize_dataset(sys, c.train.synth_params, c.x0, c.train.synth_dt, c.train.synth_points, opt);
    std::ostringstream csv;
    write_dataset_csv(csv, data);
    detail::write_text(out / "dataset.csv", csv.str());
  }
  const auto idx = trainable_indices(c);
  const AdjointModel model(sys, idx, opt, c.threads);

  TrainOptions to;
  to.steps = c.train.steps;
  to.lr = c.train.lr;
  to.seed = c.seed;
  to.batch_segments = c.train.batch_segments;
  std::vector<double> theta = c.theta;
  const auto log_path = out / "train_log.csv";
  const auto params_path = out / "params.json";
  bool resuming = false;
  if (c.train.resume && std::filesystem::exists(log_path) && std::filesystem::exists(params_path)) {
    const auto pj = detail::read_json_file(params_path.string(), "train.resume");
    theta = pj.at("theta").get<std::vector<double>>();
    if (theta.size() != sys.n_params()) {
      throw ConfigError("train.resume: params.json does not match the system");
    }
    const auto log = read_train_log(log_path.string());
    to.start_step = log.empty() ? 0 : log.back().step;
    resuming = true;
  }
  std::ofstream log(log_path, resuming ? std::ios::app : std::ios::trunc);
  if (!log) {
    throw ConfigError("--out: cannot write " + log_path.string());
  }
  if (!resuming) {
    write_train_log_header(log);
  }
  bool first = true;
  auto on_step = [&](const TrainLogEntry& e) {
    if (!(resuming && first)) {
      write_train_log_row(log, e);
    }
    first = false;
  };
  auto save = [&](const std::vector<double>& th, std::size_t step) {
    detail::write_json(params_path, params_to_json(sys, th, step));
    if (c.scenario.net_in_params) {
      SirenNet net = *c.scenario.net;
      net.set_params(std::span<const double>(th).subspan(c.scenario.net_offset, net.n_params()));
      detail::write_json(out / "weights.json", siren_to_json(net));
    }
  };
  TrainResult res;
  try {
    res = train(model, theta, data, to, on_step);
  } catch (const DivergenceError& e) {
    log.flush();
    save(e.result.theta, e.result.history.back().step);
    throw;
  }
  log.flush();
  save(res.theta, res.history.back().step);
  std::ostringstream msg;
  msg.precision(10);
  msg << "steps " << to.start_step << ".." << res.history.back().step << ": loss " << res.history.front().loss
      << " -> " << res.history.back().loss << '\n';
  return msg.str();
}

}  // namespace ettkit
