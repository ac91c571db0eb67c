/**
 * @file jet_transport.hpp
 * @brief Flow expansion in initial-state and parameter deviations, obtained by
 *        integrating over the truncated polynomial algebra.
 */
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ettkit/error.hpp"
#include "ettkit/polyalg/poly_map.hpp"
#include "ettkit/taylor/integrator.hpp"

namespace ettkit {

/// Deviation variables: varied states first (in listed order), then varied parameters.
struct VarySpec {
  std::vector<std::size_t> states;
  std::vector<std::size_t> params;

  [[nodiscard]] std::size_t size() const noexcept { return states.size() + params.size(); }

  [[nodiscard]] std::vector<std::string> labels(const OdeSystem& sys) const {
    std::vector<std::string> out;
    for (auto i : states) {
      out.push_back("d" + sys.state_names().at(i));
    }
    for (auto j : params) {
      out.push_back("d" + sys.param_names().at(j));
    }
    return out;
  }

  void validate(std::size_t n_states, std::size_t n_params) const {
    std::vector<char> seen_s(n_states, 0), seen_p(n_params, 0);
    for (auto i : states) {
      if (i >= n_states || seen_s[i]++) {
        throw ConfigError("vary.states: index " + std::to_string(i) + " is out of range or repeated");
      }
    }
    for (auto j : params) {
      if (j >= n_params || seen_p[j]++) {
        throw ConfigError("vary.params: index " + std::to_string(j) + " is out of range or repeated");
      }
    }
    if (size() == 0) {
      throw ConfigError("vary: at least one state or parameter must be varied");
    }
  }
};

/// Default cap on coefficients per polynomial.
inline constexpr std::size_t kDefaultCoeffBudget = 2000000;

inline void check_coeff_budget(std::size_t m, std::size_t k, std::size_t budget) {
  if (k < 1 || k > kMaxPolyOrder) {
    throw ConfigError("expansion order must be in [1, " + std::to_string(kMaxPolyOrder) + "]");
  }
  double count = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    count = count * static_cast<double>(m + i) / static_cast<double>(i);
  }
  if (count > static_cast<double>(budget)) {
    throw BudgetError("expansion with " + std::to_string(m) + " variables at order " + std::to_string(k) + " needs " +
                      std::to_string(static_cast<unsigned long long>(count)) + " coefficients per polynomial (cap " +
                      std::to_string(budget) + ")");
  }
}

/// Initial polynomial state and parameters: varied entries become (nominal + delta_j).
struct PolyInputs {
  std::vector<TruncatedPoly> x;
  std::vector<TruncatedPoly> theta;
};

[[nodiscard]] inline PolyInputs make_poly_inputs(std::span<const double> x0, std::span<const double> theta,
                                                 const VarySpec& vary, std::size_t k, std::size_t extra_vars = 0) {
  const std::size_t m = vary.size() + extra_vars;
  PolyInputs in;
  for (double v : x0) {
    in.x.push_back(TruncatedPoly::constant(m, k, v));
  }
  for (double v : theta) {
    in.theta.push_back(TruncatedPoly::constant(m, k, v));
  }
  std::size_t var = 0;
  for (auto i : vary.states) {
    in.x[i] = TruncatedPoly::variable(m, k, var++, x0[i]);
  }
  for (auto j : vary.params) {
    in.theta[j] = TruncatedPoly::variable(m, k, var++, theta[j]);
  }
  return in;
}

/// Order-k expansion of x(t1) about (x0, theta) in the deviations selected by `vary`.
[[nodiscard]] inline PolyMap jet_transport(const OdeSystem& sys, std::span<const double> x0,
                                           std::span<const double> theta, const VarySpec& vary, std::size_t k,
                                           double t0, double t1, TaylorOptions opt = {},
                                           std::size_t budget = kDefaultCoeffBudget) {
  if (x0.size() != sys.dim() || theta.size() != sys.n_params()) {
    throw DimensionError("jet_transport: state/parameter arity mismatch");
  }
  vary.validate(sys.dim(), sys.n_params());
  check_coeff_budget(vary.size(), k, budget);
  auto in = make_poly_inputs(x0, theta, vary, k);
  opt.keep_dense = false;
  auto traj = propagate<TruncatedPoly>(sys, std::move(in.x), std::span<const TruncatedPoly>(in.theta), t0, t1, opt);
  return PolyMap(std::move(traj.terminal), sys.state_names());
}

[[nodiscard]] inline PolyMap jet_transport(const OdeSystem& sys, const std::vector<double>& x0,
                                           const std::vector<double>& theta, const VarySpec& vary, std::size_t k,
                                           double t0, double t1, const TaylorOptions& opt = {}) {
  return jet_transport(sys, std::span<const double>(x0), std::span<const double>(theta), vary, k, t0, t1, opt);
}

}  // namespace ettkit
