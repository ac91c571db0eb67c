/**
 * @file poly_json.hpp
 * @brief JSON export/import of truncated polynomials.
 *
 * Format: {"nvars": n, "order": k, "terms": [{"exponents": [...], "coeff": c}, ...]}
 * with terms in graded-lex order. Doubles are written as shortest round-trip
 * decimals by nlohmann::json.
 */
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "ettkit/error.hpp"
#include "ettkit/polyalg/truncated_poly.hpp"

namespace ettkit {

enum class CoeffConvention {
  taylor,      ///< (1/alpha!) d^alpha f, the storage convention
  derivative,  ///< d^alpha f
};

[[nodiscard]] inline nlohmann::json poly_to_json(const TruncatedPoly& p,
                                                 CoeffConvention conv = CoeffConvention::taylor) {
  p.require_valid();
  nlohmann::json j;
  j["nvars"] = p.nvars();
  j["order"] = p.order();
  if (conv == CoeffConvention::derivative) {
    j["convention"] = "derivative";
  }
  auto terms = nlohmann::json::array();
  const auto& b = p.basis();
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto e = b.exponents(i);
    std::vector<int> exps(e.begin(), e.end());
    const double c = conv == CoeffConvention::taylor ? p[i] : p[i] * b.factorial(i);
    terms.push_back({{"exponents", exps}, {"coeff", c}});
  }
  j["terms"] = std::move(terms);
  return j;
}

[[nodiscard]] inline TruncatedPoly poly_from_json(const nlohmann::json& j) {
  try {
    const auto nvars = j.at("nvars").get<std::size_t>();
    const auto order = j.at("order").get<std::size_t>();
    const bool deriv = j.contains("convention") && j.at("convention").get<std::string>() == "derivative";
    TruncatedPoly p(nvars, order);
    const auto& b = p.basis();
    for (const auto& t : j.at("terms")) {
      const auto exps = t.at("exponents").get<std::vector<int>>();
      if (exps.size() != nvars) {
        throw ConfigError("polynomial term has " + std::to_string(exps.size()) + " exponents, expected " +
                          std::to_string(nvars));
      }
      int deg = 0;
      for (int e : exps) {
        if (e < 0) {
          throw ConfigError("negative exponent in polynomial term");
        }
        deg += e;
      }
      if (static_cast<std::size_t>(deg) > order) {
        throw ConfigError("polynomial term degree exceeds order");
      }
      const std::size_t r = b.rank(std::span<const int>(exps));
      double c = t.at("coeff").get<double>();
      if (deriv) {
        c /= b.factorial(r);
      }
      p[r] = c;
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed polynomial JSON: ") + e.what());
  }
}

}  // namespace ettkit
