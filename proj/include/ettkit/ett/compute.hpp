/**
 * @file compute.hpp
 * @brief Expansion of the event map x(t*(x0, theta); x0, theta) and of the
 *        trigger time in initial-state and parameter deviations.
 */
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ettkit/error.hpp"
#include "ettkit/polyalg/poly_map.hpp"
#include "ettkit/symexpr/ode_system.hpp"
#include "ettkit/taylor/events.hpp"
#include "ettkit/taylor/jet_transport.hpp"

namespace ettkit {

struct EttOptions {
  double tol = 1e-15;
  double t_max = 100.0;
  std::size_t budget = kDefaultCoeffBudget;
};

struct EttResult {
  double t_star = 0.0;
  std::vector<double> x_event;
  TruncatedPoly dT_poly;  ///< trigger-time deviation, zero constant part
  PolyMap ett_map;        ///< event state, constant parts equal x_event
  VarySpec vary;
  std::size_t order = 0;
  std::vector<double> x0;     ///< nominal initial state
  std::vector<double> theta;  ///< nominal parameters
  std::vector<std::string> input_labels;

  [[nodiscard]] std::size_t n_inputs() const noexcept { return vary.size(); }
};

/// sum_{i=1..k} C(m+i-1, i): non-constant coefficients per output in m deviations at order k.
[[nodiscard]] inline std::size_t ett_coefficient_count(std::size_t m, std::size_t k) {
  std::size_t total = 0;
  for (std::size_t i = 1; i <= k; ++i) {
    total += static_cast<std::size_t>(binomial(m + i - 1, i));
  }
  return total;
}

namespace detail {

/// (delta_0, ..., delta_{m-2}, 0): drops the last input of an m-variable map.
[[nodiscard]] inline PolyMap drop_last_input(std::size_t m, std::size_t k) {
  std::vector<TruncatedPoly> sub;
  for (std::size_t v = 0; v + 1 < m; ++v) {
    sub.push_back(TruncatedPoly::variable(m - 1, k, v));
  }
  sub.push_back(TruncatedPoly::zero(m - 1, k));
  return PolyMap(std::move(sub));
}

}  // namespace detail

/**
 * Pipeline: nominal event detection gives T = t*; the system is rewritten in
 * tau = t / T with the event value eps as an extra state; polynomial
 * integration over tau in [0, 1] with T = t* + dT an extra deviation variable
 * gives (x, eps)(dvary, dT); exchanging dT with the eps output and setting
 * the eps deviation to zero pins the final state to the manifold.
 */
[[nodiscard]] inline EttResult compute_ett(const OdeSystem& sys, const ExprGraph& e, std::span<const double> x0,
                                           std::span<const double> theta, const VarySpec& vary, std::size_t k,
                                           const EttOptions& opt = {}) {
  const std::size_t n = sys.dim();
  if (x0.size() != n || theta.size() != sys.n_params()) {
    throw DimensionError("compute_ett: state/parameter arity mismatch");
  }
  vary.validate(n, sys.n_params());
  const std::size_t m = vary.size() + 1;
  check_coeff_budget(m, k, opt.budget);

  TaylorOptions topt;
  topt.tol = opt.tol;
  topt.keep_dense = false;
  const EventHit hit = detect_event(sys, e, std::vector<double>(x0.begin(), x0.end()), theta, 0.0, opt.t_max, topt);
  if (!(hit.t > 0.0)) {
    throw EventError("event trigger time must be positive");
  }

  const OdeSystem aug = build_augmented_event_system(sys, e);
  auto in = make_poly_inputs(x0, theta, vary, k, 1);
  in.theta.push_back(TruncatedPoly::variable(m, k, m - 1, hit.t));

  const std::span<const TruncatedPoly> ev_theta(in.theta.data(), e.n_params());
  const NodeId er = e.root();
  auto eps0 = e.eval<TruncatedPoly>(std::span<const NodeId>(&er, 1), in.x, ev_theta, TruncatedPoly::constant(m, k, 0.0),
                                    in.x.front());
  in.x.push_back(std::move(eps0[0]));

  auto traj = propagate<TruncatedPoly>(aug, std::move(in.x), std::span<const TruncatedPoly>(in.theta), 0.0, 1.0, topt);
  const PolyMap swapped = partial_invert(PolyMap(std::move(traj.terminal)), m - 1, n);
  const PolyMap drop = detail::drop_last_input(m, k);

  EttResult r;
  r.t_star = hit.t;
  r.dT_poly = compose(swapped[n], drop);
  std::vector<TruncatedPoly> outs;
  outs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    outs.push_back(compose(swapped[i], drop));
  }
  r.ett_map = PolyMap(std::move(outs), sys.state_names());
  r.x_event = r.ett_map.constants();
  r.vary = vary;
  r.order = k;
  r.x0.assign(x0.begin(), x0.end());
  r.theta.assign(theta.begin(), theta.end());
  r.input_labels = vary.labels(sys);
  return r;
}

[[nodiscard]] inline EttResult compute_ett(const OdeSystem& sys, const ExprGraph& e, const std::vector<double>& x0,
                                           const std::vector<double>& theta, const VarySpec& vary, std::size_t k,
                                           const EttOptions& opt = {}) {
  return compute_ett(sys, e, std::span<const double>(x0), std::span<const double>(theta), vary, k, opt);
}

struct EventPrediction {
  std::vector<double> x;
  double t = 0.0;
};

/// Event state and trigger time predicted by the expansion at the given deviations.
[[nodiscard]] inline EventPrediction evaluate_event_map(const EttResult& r, std::span<const double> dev) {
  if (dev.size() != r.n_inputs()) {
    throw DimensionError("evaluate_event_map: expected " + std::to_string(r.n_inputs()) + " deviations, got " +
                         std::to_string(dev.size()));
  }
  EventPrediction p;
  p.x = r.ett_map.evaluate(dev);
  p.t = r.t_star + r.dT_poly.evaluate(dev);
  return p;
}

/// Perturbed (x0, theta) for a deviation vector in VarySpec order.
[[nodiscard]] inline std::pair<std::vector<double>, std::vector<double>> apply_deviation(const EttResult& r,
                                                                                        std::span<const double> dev) {
  auto x = r.x0;
  auto th = r.theta;
  std::size_t v = 0;
  for (auto i : r.vary.states) {
    x[i] += dev[v++];
  }
  for (auto j : r.vary.params) {
    th[j] += dev[v++];
  }
  return {std::move(x), std::move(th)};
}

}  // namespace ettkit
