/**
 * @file siren_json.hpp
 * @brief Weight files: {sizes, omega0, bounds: {min, max}, layers: [{W, b}]}.
 */
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ettkit/error.hpp"
#include "ettkit/neural/siren.hpp"

namespace ettkit {

[[nodiscard]] inline nlohmann::json siren_to_json(const SirenNet& net) {
  nlohmann::json j;
  j["sizes"] = net.sizes();
  j["omega0"] = net.omega0();
  j["bounds"] = {{"min", net.bounds_min()}, {"max", net.bounds_max()}};
  auto layers = nlohmann::json::array();
  for (const auto& L : net.layers()) {
    auto W = nlohmann::json::array();
    for (std::size_t r = 0; r < L.rows; ++r) {
      W.push_back(std::vector<double>(L.W.begin() + static_cast<std::ptrdiff_t>(r * L.cols),
                                      L.W.begin() + static_cast<std::ptrdiff_t>((r + 1) * L.cols)));
    }
    layers.push_back({{"W", std::move(W)}, {"b", L.b}});
  }
  j["layers"] = std::move(layers);
  return j;
}

namespace detail {

inline std::vector<double> number_array(const nlohmann::json& j, const std::string& at) {
  if (!j.is_array()) {
    throw ConfigError(at + ": expected an array of numbers");
  }
  std::vector<double> v;
  for (const auto& e : j) {
    if (!e.is_number()) {
      throw ConfigError(at + ": expected an array of numbers");
    }
    v.push_back(e.get<double>());
  }
  return v;
}

inline const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& at) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(at + "." + key + ": missing");
  }
  return j[key];
}

}  // namespace detail

[[nodiscard]] inline SirenNet siren_from_json(const nlohmann::json& j, const std::string& where = "weights") {
  const auto& js = detail::field(j, "sizes", where);
  if (!js.is_array()) {
    throw ConfigError(where + ".sizes: expected an array of positive integers");
  }
  std::vector<std::size_t> sizes;
  for (const auto& s : js) {
    if (!s.is_number_unsigned()) {
      throw ConfigError(where + ".sizes: expected an array of positive integers");
    }
    sizes.push_back(s.get<std::size_t>());
  }
  const auto& jw = detail::field(j, "omega0", where);
  if (!jw.is_number()) {
    throw ConfigError(where + ".omega0: expected a number");
  }
  const auto& jb = detail::field(j, "bounds", where);
  auto lo = detail::number_array(detail::field(jb, "min", where + ".bounds"), where + ".bounds.min");
  auto hi = detail::number_array(detail::field(jb, "max", where + ".bounds"), where + ".bounds.max");
  const auto& jl = detail::field(j, "layers", where);
  if (!jl.is_array()) {
    throw ConfigError(where + ".layers: expected an array");
  }
  std::vector<SirenLayer> layers;
  for (std::size_t l = 0; l < jl.size(); ++l) {
    const std::string at = where + ".layers[" + std::to_string(l) + "]";
    const auto& rows = detail::field(jl[l], "W", at);
    if (!rows.is_array()) {
      throw ConfigError(at + ".W: expected a 2D array");
    }
    SirenLayer L;
    L.rows = rows.size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto row = detail::number_array(rows[r], at + ".W[" + std::to_string(r) + "]");
      if (r == 0) {
        L.cols = row.size();
      } else if (row.size() != L.cols) {
        throw ConfigError(at + ".W: ragged rows");
      }
      L.W.insert(L.W.end(), row.begin(), row.end());
    }
    L.b = detail::number_array(detail::field(jl[l], "b", at), at + ".b");
    layers.push_back(std::move(L));
  }
  try {
    return SirenNet(std::move(sizes), jw.get<double>(), std::move(lo), std::move(hi), std::move(layers));
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

inline void save_siren(const SirenNet& net, const std::string& path) {
  std::ofstream os(path);
  if (!os) {
    throw ConfigError("cannot write weights file " + path);
  }
  os << siren_to_json(net).dump(2) << '\n';
}

[[nodiscard]] inline SirenNet load_siren(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("cannot read weights file " + path);
  }
  std::stringstream ss;
  ss << is.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": malformed JSON (" + e.what() + ")");
  }
  return siren_from_json(j, path);
}

}  // namespace ettkit
