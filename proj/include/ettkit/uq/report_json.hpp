/**
 * @file report_json.hpp
 * @brief JSON report combining exact moments and surrogate sampling.
 */
#pragma once

#include <json.hpp>

#include "ettkit/uq/moments.hpp"
#include "ettkit/uq/surrogate.hpp"

namespace ettkit {

[[nodiscard]] inline nlohmann::json uq_report_to_json(const MomentReport& m, const SurrogateReport* s = nullptr) {
  nlohmann::json j;
  j["labels"] = m.labels;
  j["mean"] = m.mean;
  j["covariance"] = m.covariance;
  nlohmann::json higher = nlohmann::json::object();
  for (std::size_t order = 3; order <= m.q; ++order) {
    std::vector<double> col;
    for (const auto& row : m.central) {
      col.push_back(row[order]);
    }
    higher["m" + std::to_string(order)] = col;
  }
  j["higher_moments"] = std::move(higher);
  if (s == nullptr) {
    return j;
  }
  nlohmann::json quant = nlohmann::json::object();
  for (std::size_t pi = 0; pi < s->probabilities.size(); ++pi) {
    std::vector<double> col;
    for (const auto& o : s->outputs) {
      col.push_back(o.quantiles[pi]);
    }
    quant[nlohmann::json(s->probabilities[pi]).dump()] = col;
  }
  j["quantiles"] = std::move(quant);
  auto exc = nlohmann::json::array();
  auto hist = nlohmann::json::object();
  nlohmann::json sample_moments = {{"mean", nlohmann::json::array()},
                                   {"m2", nlohmann::json::array()},
                                   {"m3", nlohmann::json::array()}};
  for (const auto& o : s->outputs) {
    for (const auto& e : o.exceedance) {
      exc.push_back({{"output", o.label}, {"threshold", e.threshold}, {"p", e.p}, {"ci95", {e.ci_lo, e.ci_hi}}});
    }
    if (!o.histogram.counts.empty()) {
      hist[o.label] = {{"edges", o.histogram.edges}, {"counts", o.histogram.counts}};
    }
    sample_moments["mean"].push_back(o.mean);
    sample_moments["m2"].push_back(o.m2);
    sample_moments["m3"].push_back(o.m3);
  }
  j["exceedance"] = std::move(exc);
  j["surrogate"] = {{"n", s->n}, {"seed", s->seed}, {"moments", std::move(sample_moments)}};
  if (!hist.empty()) {
    j["histograms"] = std::move(hist);
  }
  return j;
}

}  // namespace ettkit
