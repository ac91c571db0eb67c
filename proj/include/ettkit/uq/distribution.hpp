/**
 * @file distribution.hpp
 * @brief Independent zero-mean input marginals and their raw moment tables.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ettkit/error.hpp"
#include "ettkit/polyalg/truncated_poly.hpp"
#include "ettkit/rng.hpp"

namespace ettkit {

/// Largest total degree supported by moment tables.
inline constexpr std::size_t kMaxMomentDegree = 64;

struct Marginal {
  enum class Kind { gaussian, uniform };
  Kind kind = Kind::gaussian;
  double scale = 1.0;  ///< sigma for gaussian, half-width a for uniform

  [[nodiscard]] static Marginal gaussian(double sigma) { return {Kind::gaussian, sigma}; }
  [[nodiscard]] static Marginal uniform(double half_width) { return {Kind::uniform, half_width}; }

  /// E[d^p]: sigma^p (p-1)!! or a^p / (p+1) for even p, zero for odd p.
  [[nodiscard]] double raw_moment(std::size_t p) const {
    if (p % 2 == 1) {
      return 0.0;
    }
    double m = 1.0;
    if (kind == Kind::gaussian) {
      for (std::size_t j = 1; j < p; j += 2) {
        m *= static_cast<double>(j) * scale * scale;
      }
      return m;
    }
    for (std::size_t j = 0; j < p; ++j) {
      m *= scale;
    }
    return m / static_cast<double>(p + 1);
  }

  /// Draw for sample stream `rng`, variable slot j.
  [[nodiscard]] double sample(const CounterRng& rng, std::size_t j) const {
    if (kind == Kind::gaussian) {
      return scale * rng.normal(j);
    }
    return rng.uniform(2 * j, -scale, scale);
  }
};

struct DistributionSpec {
  std::vector<Marginal> marginals;

  [[nodiscard]] std::size_t size() const noexcept { return marginals.size(); }

  void validate() const {
    if (marginals.empty()) {
      throw ConfigError("distribution: at least one marginal is required");
    }
    for (std::size_t i = 0; i < marginals.size(); ++i) {
      if (!(marginals[i].scale > 0.0) || !std::isfinite(marginals[i].scale)) {
        throw ConfigError("distribution.marginals[" + std::to_string(i) + "]: scale must be positive and finite");
      }
    }
  }

  /// Scales every marginal by s.
  [[nodiscard]] DistributionSpec scaled(double s) const {
    DistributionSpec d = *this;
    for (auto& m : d.marginals) {
      m.scale *= s;
    }
    return d;
  }
};

/// E[d^alpha] for all |alpha| <= max_degree, factorised over independent marginals.
class MomentTable {
 public:
  MomentTable(const DistributionSpec& d, std::size_t max_degree) : max_degree_(max_degree) {
    d.validate();
    if (max_degree < 1 || max_degree > kMaxMomentDegree) {
      throw BudgetError("moment table degree " + std::to_string(max_degree) + " outside [1, " +
                        std::to_string(kMaxMomentDegree) + "]");
    }
    for (const auto& m : d.marginals) {
      std::vector<double> row(max_degree + 1);
      for (std::size_t p = 0; p <= max_degree; ++p) {
        row[p] = m.raw_moment(p);
      }
      table_.push_back(std::move(row));
    }
  }

  [[nodiscard]] std::size_t nvars() const noexcept { return table_.size(); }
  [[nodiscard]] std::size_t max_degree() const noexcept { return max_degree_; }

  /// Marginal moment E[d_i^p].
  [[nodiscard]] double marginal(std::size_t i, std::size_t p) const { return table_.at(i).at(p); }

  template <class Int>
  [[nodiscard]] double operator()(std::span<const Int> alpha) const {
    if (alpha.size() != table_.size()) {
      throw DimensionError("moment multi-index arity mismatch");
    }
    double m = 1.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      const auto a = static_cast<std::size_t>(alpha[i]);
      if (a > max_degree_) {
        throw BudgetError("moment degree exceeds the table");
      }
      m *= table_[i][a];
      if (m == 0.0) {
        return 0.0;
      }
    }
    return m;
  }

  /// E[p(d)] = sum_alpha c_alpha E[d^alpha].
  [[nodiscard]] double expect(const TruncatedPoly& p) const {
    if (p.nvars() != nvars()) {
      throw DimensionError("expectation: polynomial has " + std::to_string(p.nvars()) + " variables, distribution " +
                           std::to_string(nvars()));
    }
    if (p.order() > max_degree_) {
      throw BudgetError("expectation: polynomial order exceeds the moment table");
    }
    const auto& b = p.basis();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] != 0.0) {
        acc += p[i] * (*this)(b.exponents(i));
      }
    }
    return acc;
  }

 private:
  std::size_t max_degree_;
  std::vector<std::vector<double>> table_;
};

[[nodiscard]] inline MomentTable raw_moments(const DistributionSpec& d, std::size_t max_total_degree) {
  return MomentTable(d, max_total_degree);
}

[[nodiscard]] inline nlohmann::json distribution_to_json(const DistributionSpec& d) {
  auto arr = nlohmann::json::array();
  for (const auto& m : d.marginals) {
    if (m.kind == Marginal::Kind::gaussian) {
      arr.push_back({{"kind", "gaussian"}, {"sigma", m.scale}});
    } else {
      arr.push_back({{"kind", "uniform"}, {"half_width", m.scale}});
    }
  }
  return arr;
}

[[nodiscard]] inline DistributionSpec distribution_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) {
    throw ConfigError(where + ": expected an array of marginals");
  }
  DistributionSpec d;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& m = j[i];
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (!m.is_object() || !m.contains("kind") || !m["kind"].is_string()) {
      throw ConfigError(at + ".kind: missing or not a string");
    }
    const auto kind = m["kind"].get<std::string>();
    if (kind == "gaussian") {
      if (!m.contains("sigma") || !m["sigma"].is_number()) {
        throw ConfigError(at + ".sigma: missing or not a number");
      }
      d.marginals.push_back(Marginal::gaussian(m["sigma"].get<double>()));
    } else if (kind == "uniform") {
      if (!m.contains("half_width") || !m["half_width"].is_number()) {
        throw ConfigError(at + ".half_width: missing or not a number");
      }
      d.marginals.push_back(Marginal::uniform(m["half_width"].get<double>()));
    } else {
      throw ConfigError(at + ".kind: unknown distribution '" + kind + "' (expected gaussian or uniform)");
    }
  }
  try {
    d.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return d;
}

}  // namespace ettkit
