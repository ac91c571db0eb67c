/**
 * @file dataset.hpp
 * @brief Observation series (t_i, x_i) and their CSV form "t,x_0,...,x_{n-1}".
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ettkit/error.hpp"

namespace ettkit {

struct Dataset {
  std::vector<double> t;
  std::vector<std::vector<double>> x;

  [[nodiscard]] std::size_t size() const noexcept { return t.size(); }
  [[nodiscard]] std::size_t segments() const noexcept { return t.empty() ? 0 : t.size() - 1; }
  [[nodiscard]] std::size_t dim() const noexcept { return x.empty() ? 0 : x.front().size(); }

  void validate(std::size_t n_states) const {
    if (t.size() < 2 || x.size() != t.size()) {
      throw ConfigError("dataset: need at least two observations with one state each");
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (x[i].size() != n_states) {
        throw ConfigError("dataset row " + std::to_string(i) + ": expected " + std::to_string(n_states) + " states");
      }
      if (!std::isfinite(t[i])) {
        throw ConfigError("dataset row " + std::to_string(i) + ": non-finite time");
      }
      if (i > 0 && !(t[i] > t[i - 1])) {
        throw ConfigError("dataset row " + std::to_string(i) + ": times must be strictly increasing");
      }
    }
  }
};

inline void write_dataset_csv(std::ostream& os, const Dataset& d) {
  os.precision(17);
  os << 't';
  for (std::size_t i = 0; i < d.dim(); ++i) {
    os << ",x_" << i;
  }
  os << '\n';
  for (std::size_t r = 0; r < d.size(); ++r) {
    os << d.t[r];
    for (double v : d.x[r]) {
      os << ',' << v;
    }
    os << '\n';
  }
}

[[nodiscard]] inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("cannot read dataset " + path);
  }
  Dataset d;
  std::string line;
  std::getline(is, line);  // header
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) {
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (used != cell.size()) {
          throw std::invalid_argument(cell);
        }
      } catch (const std::exception&) {
        throw ConfigError(path + " row " + std::to_string(row) + ": '" + cell + "' is not a number");
      }
    }
    if (vals.size() < 2) {
      throw ConfigError(path + " row " + std::to_string(row) + ": expected t and at least one state");
    }
    d.t.push_back(vals.front());
    d.x.emplace_back(vals.begin() + 1, vals.end());
    ++row;
  }
  if (d.size() > 0) {
    d.validate(d.dim());
  }
  return d;
}

}  // namespace ettkit
