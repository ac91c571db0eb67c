/**
 * @file moments.hpp
 * @brief Exact output moments of polynomial maps under independent inputs,
 *        and observables composed onto event-map expansions.
 */
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ettkit/ett/compute.hpp"
#include "ettkit/polyalg/poly_map.hpp"
#include "ettkit/uq/distribution.hpp"

namespace ettkit {

struct MomentReport {
  std::vector<std::string> labels;
  std::size_t q = 0;
  std::vector<double> mean;
  std::vector<std::vector<double>> covariance;
  /// central[i][j] = E[(P_i - mean_i)^j] for j = 0..q.
  std::vector<std::vector<double>> central;
};

/**
 * Means, covariance and central moments up to order q.  Powers and products
 * are formed in the order q k space of the inputs, so no term is truncated.
 */
[[nodiscard]] inline MomentReport propagate_moments(const PolyMap& map, const DistributionSpec& d, std::size_t q,
                                                    std::size_t budget = 2000000) {
  d.validate();
  if (map.nvars() != d.size()) {
    throw DimensionError("propagate_moments: map has " + std::to_string(map.nvars()) + " inputs, distribution " +
                         std::to_string(d.size()));
  }
  if (q < 1) {
    throw ConfigError("propagate_moments: moment order must be at least 1");
  }
  const std::size_t k = map.order();
  const std::size_t lifted = k * std::max<std::size_t>(q, 2);
  if (lifted > kMaxMomentDegree) {
    throw BudgetError("moment order " + std::to_string(q) + " at expansion order " + std::to_string(k) +
                      " needs degree " + std::to_string(lifted) + " > " + std::to_string(kMaxMomentDegree));
  }
  double count = 1.0;
  for (std::size_t i = 1; i <= lifted; ++i) {
    count = count * static_cast<double>(map.nvars() + i) / static_cast<double>(i);
  }
  if (count > static_cast<double>(budget)) {
    throw BudgetError("moment propagation needs " + std::to_string(static_cast<unsigned long long>(count)) +
                      " coefficients per product (cap " + std::to_string(budget) + ")");
  }
  const MomentTable table(d, lifted);
  const std::size_t n = map.size();

  MomentReport rep;
  rep.labels = map.labels();
  rep.q = q;
  std::vector<TruncatedPoly> centred;
  for (std::size_t i = 0; i < n; ++i) {
    const TruncatedPoly p = map[i].with_order(lifted);
    const double mu = table.expect(p);
    rep.mean.push_back(mu);
    centred.push_back(p - mu);
  }
  rep.covariance.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double c = table.expect(centred[i] * centred[j]);
      rep.covariance[i][j] = c;
      rep.covariance[j][i] = c;
    }
  }
  rep.central.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    auto& row = rep.central[i];
    row.push_back(1.0);
    row.push_back(0.0);
    TruncatedPoly power = centred[i];
    for (std::size_t j = 2; j <= q; ++j) {
      power = power * centred[i];
      row.push_back(j == 2 ? rep.covariance[i][i] : table.expect(power));
    }
    row.resize(q + 1);
  }
  return rep;
}

[[nodiscard]] inline MomentReport propagate_moments(const TruncatedPoly& p, const DistributionSpec& d, std::size_t q) {
  return propagate_moments(PolyMap({p}), d, q);
}

/**
 * Expansion of obs(event state) in the input deviations.  The observable may
 * read the system parameters (held at their nominal values) and the time,
 * which is replaced by t* + dT.
 */
[[nodiscard]] inline TruncatedPoly compose_observable(const ExprGraph& obs, const EttResult& r) {
  if (obs.n_vars() != r.ett_map.size()) {
    throw DimensionError("observable arity " + std::to_string(obs.n_vars()) + " does not match the event state (" +
                         std::to_string(r.ett_map.size()) + ")");
  }
  if (obs.n_params() > r.theta.size()) {
    throw DimensionError("observable uses more parameters than the system provides");
  }
  const TruncatedPoly& like = r.ett_map[0];
  std::vector<TruncatedPoly> theta;
  for (std::size_t j = 0; j < obs.n_params(); ++j) {
    theta.push_back(TruncatedPoly::constant_like(like, r.theta[j]));
  }
  const TruncatedPoly t = r.dT_poly + r.t_star;
  const NodeId root = obs.root();
  return obs.eval<TruncatedPoly>(std::span<const NodeId>(&root, 1), r.ett_map.outputs(), theta, t, like)[0];
}

}  // namespace ettkit
