/**
 * @file ett_json.hpp
 * @brief JSON form of EttResult and of Monte Carlo validation reports.
 */
#pragma once

#include <json.hpp>

#include "ettkit/ett/compute.hpp"
#include "ettkit/ett/validate.hpp"
#include "ettkit/polyalg/poly_json.hpp"

namespace ettkit {

[[nodiscard]] inline nlohmann::json ett_to_json(const EttResult& r, CoeffConvention conv = CoeffConvention::taylor) {
  nlohmann::json j;
  j["t_star"] = r.t_star;
  j["x_event"] = r.x_event;
  j["vary"] = {{"states", r.vary.states}, {"params", r.vary.params}, {"labels", r.input_labels}};
  j["order"] = r.order;
  j["coefficients_per_output"] = ett_coefficient_count(r.n_inputs(), r.order);
  j["nominal"] = {{"x0", r.x0}, {"theta", r.theta}};
  j["dT_poly"] = poly_to_json(r.dT_poly, conv);
  auto outs = nlohmann::json::array();
  for (std::size_t i = 0; i < r.ett_map.size(); ++i) {
    auto o = poly_to_json(r.ett_map[i], conv);
    o["label"] = r.ett_map.labels()[i];
    outs.push_back(std::move(o));
  }
  j["outputs"] = std::move(outs);
  return j;
}

[[nodiscard]] inline EttResult ett_from_json(const nlohmann::json& j) {
  try {
    EttResult r;
    r.t_star = j.at("t_star").get<double>();
    r.x_event = j.at("x_event").get<std::vector<double>>();
    r.vary.states = j.at("vary").at("states").get<std::vector<std::size_t>>();
    r.vary.params = j.at("vary").at("params").get<std::vector<std::size_t>>();
    r.input_labels = j.at("vary").value("labels", std::vector<std::string>{});
    r.order = j.at("order").get<std::size_t>();
    r.x0 = j.at("nominal").at("x0").get<std::vector<double>>();
    r.theta = j.at("nominal").at("theta").get<std::vector<double>>();
    r.dT_poly = poly_from_json(j.at("dT_poly"));
    std::vector<TruncatedPoly> outs;
    std::vector<std::string> labels;
    for (const auto& o : j.at("outputs")) {
      outs.push_back(poly_from_json(o));
      labels.push_back(o.value("label", "y" + std::to_string(labels.size())));
    }
    r.ett_map = PolyMap(std::move(outs), std::move(labels));
    if (r.ett_map.nvars() != r.vary.size() || r.dT_poly.nvars() != r.vary.size()) {
      throw ConfigError("ETT file: polynomial variable count does not match vary");
    }
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("ETT file: ") + ex.what());
  } catch (const DimensionError& ex) {
    throw ConfigError(std::string("ETT file: ") + ex.what());
  }
}

[[nodiscard]] inline nlohmann::json mc_report_to_json(const McReport& rep) {
  nlohmann::json j;
  j["requested"] = rep.requested;
  j["succeeded"] = rep.succeeded;
  j["failed_samples"] = rep.failed;
  auto comps = nlohmann::json::array();
  for (const auto& c : rep.components) {
    comps.push_back({{"label", c.label},
                     {"max_abs", c.max_abs},
                     {"median_abs", c.median_abs},
                     {"max_rel", c.max_rel},
                     {"median_rel", c.median_rel}});
  }
  j["components"] = std::move(comps);
  j["max_abs_state"] = rep.max_abs_state;
  j["max_rel_state"] = rep.max_rel_state;
  return j;
}

}  // namespace ettkit
