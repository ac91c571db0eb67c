/**
 * @file scenarios.hpp
 * @brief Built-in systems with nominal states, default events and optional
 *        SIREN terms.
 *
 * All scenarios are nondimensional:
 *  - linear_decay       x' = -a x, event x = 1
 *  - free_fall          unit mass, length and g; event at height 0
 *  - harmonic_oscillator unit frequency; event x = 0
 *  - lotka_volterra_siren populations in arbitrary units, time in cycle units;
 *                       x' = alpha x - beta x y + N_0, y' = delta x y - gamma y + N_1
 *  - cr3bp_siren        planar restricted three-body problem in the rotating
 *                       frame, unit separation, unit total mass, unit mean
 *                       motion; H = H_cr3bp(q, p) + N(q); sphere event around
 *                       the secondary
 *  - double_integrator_siren x'' = -x - 1.4 x' + N(x, x'); hyperplane x = 0.5
 *  - siren_circle       outward spiral hitting the zero set of a SIREN that
 *                       approximates the unit circle
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ettkit/error.hpp"
#include "ettkit/neural/siren.hpp"
#include "ettkit/symexpr/ode_system.hpp"

namespace ettkit {

/// How the scenario's network is populated.
struct NetChoice {
  enum class Kind { scenario_default, zero, siren, given };
  Kind kind = Kind::scenario_default;
  std::uint64_t seed = 0;
  double scale = 1.0;  ///< multiplies the output layer after initialisation
  std::optional<SirenNet> weights;
};

struct Scenario {
  std::string id;
  OdeSystem sys;
  std::vector<double> x0;
  ExprGraph event;  ///< default event function e(x, theta, t)
  double t_end = 10.0;  ///< default horizon for simulation and event search
  std::optional<ExprGraph> hamiltonian{};
  std::optional<SirenNet> net{};
  bool net_in_params = false;  ///< net weights are system parameters starting at net_offset
  std::size_t net_offset = 0;
  std::vector<std::size_t> physical_params{};
};

inline const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids = {"linear_decay",        "free_fall",   "harmonic_oscillator",
                                               "lotka_volterra_siren", "cr3bp_siren", "double_integrator_siren",
                                               "siren_circle"};
  return ids;
}

inline constexpr double kCr3bpMu = 0.01215;

/**
 * 2 -> 2 -> 1 SIREN whose zero set approximates the circle of radius r
 * centred at the origin: cos neurons with small frequency s give
 * (2/s^2)(1 - cos(s z)) = z^2 + O(s^2 z^4) on normalised inputs z.
 */
[[nodiscard]] inline SirenNet siren_circle_net(double r, double half_width = 2.0, double s = 0.05,
                                               double omega0 = 30.0) {
  auto net = SirenNet::zeros({2, 2, 1}, omega0, {-half_width, -half_width}, {half_width, half_width});
  const double w = s / omega0;
  const double c = 2.0 / (s * s);
  const double rz = r / half_width;
  const double half_pi = std::numbers::pi / 2.0;
  // layer 0: W = diag(w), b = pi/2 -> sin(s z + pi/2) = cos(s z)
  // layer 1: -c (cos(s z_x) + cos(s z_y)) + 2 c - rz^2, scaled back to physical units
  const double back = half_width * half_width;
  net.set_params(std::vector<double>{w, 0.0, 0.0, w, half_pi, half_pi, -c * back, -c * back,
                                     (2.0 * c - rz * rz) * back});
  return net;
}

namespace detail {

inline SirenNet pick_net(const NetChoice& choice, const std::vector<std::size_t>& sizes, std::vector<double> lo,
                         std::vector<double> hi, NetChoice::Kind fallback, std::uint64_t default_seed,
                         double default_scale) {
  NetChoice c = choice;
  if (c.kind == NetChoice::Kind::scenario_default) {
    c.kind = fallback;
    c.seed = default_seed;
    c.scale = default_scale;
  }
  switch (c.kind) {
    case NetChoice::Kind::given: {
      const SirenNet& w = *c.weights;
      if (w.sizes().front() != sizes.front() || w.sizes().back() != sizes.back()) {
        throw ConfigError("net weights: scenario needs " + std::to_string(sizes.front()) + " inputs and " +
                          std::to_string(sizes.back()) + " outputs");
      }
      return w;
    }
    case NetChoice::Kind::zero:
      return SirenNet::zeros(sizes, 30.0, std::move(lo), std::move(hi));
    default: {
      auto net = siren_init(sizes, 30.0, std::move(lo), std::move(hi), c.seed);
      auto p = net.params();
      const auto& last = net.layers().back();
      const std::size_t tail = last.W.size() + last.b.size();
      for (std::size_t k = p.size() - tail; k < p.size(); ++k) {
        p[k] *= c.scale;
      }
      net.set_params(p);
      return net;
    }
  }
}

inline std::vector<Expr> net_terms(ExprGraph& g, const SirenNet& net, const std::vector<Expr>& in,
                                   std::optional<std::size_t> offset) {
  return emit_siren(g, net, std::span<const Expr>(in), offset);
}

inline ExprGraph state_level(std::size_t n, std::size_t i, double level) {
  return make_expression(n, 0, [&](ExprGraph& g) { return g.var(i) - level; });
}

inline Scenario linear_decay() {
  ExprGraph g(1, 1);
  g.set_roots({-(g.param(0) * g.var(0))});
  Scenario s{"linear_decay", OdeSystem(std::move(g), {1.0}, {"x"}, {"a"}), {2.0}, state_level(1, 0, 1.0), 5.0};
  s.physical_params = {0};
  return s;
}

inline Scenario free_fall() {
  ExprGraph g(2, 1);
  g.set_roots({g.var(1), -g.param(0)});
  Scenario s{"free_fall", OdeSystem(std::move(g), {1.0}, {"x", "v"}, {"g"}), {1.0, 0.0}, state_level(2, 0, 0.0), 5.0};
  s.physical_params = {0};
  return s;
}

inline Scenario harmonic_oscillator() {
  auto h = make_expression(2, 1, [](ExprGraph& g) {
    return 0.5 * (g.param(0) * g.param(0) * g.var(0) * g.var(0) + g.var(1) * g.var(1));
  });
  auto sys = hamiltonian_system(h, 1, {1.0}, {"omega"});
  Scenario s{"harmonic_oscillator", OdeSystem(sys.graph(), {1.0}, {"x", "v"}, {"omega"}), {1.0, 0.0},
             state_level(2, 0, 0.0), 10.0, h};
  s.physical_params = {0};
  return s;
}

inline Scenario lotka_volterra_siren(const NetChoice& choice) {
  const SirenNet net = pick_net(choice, {2, 4, 2}, {0.0, 0.0}, {6.0, 6.0}, NetChoice::Kind::zero, 0, 1.0);
  const std::size_t np = 4 + net.n_params();
  ExprGraph g(2, np);
  const Expr x = g.var(0);
  const Expr y = g.var(1);
  const auto n = net_terms(g, net, {x, y}, std::size_t{4});
  g.set_roots({g.param(0) * x - g.param(1) * x * y + n[0], g.param(3) * x * y - g.param(2) * y + n[1]});
  std::vector<double> theta = {1.0, 0.5, 0.75, 0.25};
  std::vector<std::string> names = {"alpha", "beta", "gamma", "delta"};
  const auto w = net.params();
  theta.insert(theta.end(), w.begin(), w.end());
  for (std::size_t k = 0; k < w.size(); ++k) {
    names.push_back("w" + std::to_string(k));
  }
  Scenario s{"lotka_volterra_siren", OdeSystem(std::move(g), theta, {"x", "y"}, names), {2.0, 1.0},
             make_expression(2, 0, [](ExprGraph& h) { return h.time() - 5.0; }), 5.0};
  s.net = net;
  s.net_in_params = true;
  s.net_offset = 4;
  s.physical_params = {0, 1, 2, 3};
  return s;
}

inline Scenario cr3bp_siren(const NetChoice& choice) {
  const SirenNet net = pick_net(choice, {2, 8, 1}, {-1.5, -1.5}, {1.5, 1.5}, NetChoice::Kind::siren, 1, 0.01);
  ExprGraph h(4, 1);
  const Expr x = h.var(0), y = h.var(1), px = h.var(2), py = h.var(3);
  const Expr mu = h.param(0);
  const Expr r1 = sqrt((x + mu) * (x + mu) + y * y);
  const Expr r2 = sqrt((x - 1.0 + mu) * (x - 1.0 + mu) + y * y);
  const Expr classical = 0.5 * (px * px + py * py) + px * y - py * x - (1.0 - mu) / r1 - mu / r2;
  const auto n = net_terms(h, net, {x, y}, std::nullopt);
  h.set_roots({(classical + n[0]).id()});
  auto sys = hamiltonian_system(h, 2, {kCr3bpMu}, {"mu"});
  // sphere of radius 0.03 around the secondary
  auto event = make_expression(4, 1, [](ExprGraph& g) {
    const Expr dx = g.var(0) - 1.0 + g.param(0);
    return dx * dx + g.var(1) * g.var(1) - 0.03 * 0.03;
  });
  // at rest in the rotating frame 0.1 above the secondary: px = -y, py = x
  const double x0 = 1.0 - kCr3bpMu;
  const double y0 = 0.1;
  Scenario s{"cr3bp_siren",
             OdeSystem(sys.graph(), {kCr3bpMu}, {"x", "y", "px", "py"}, {"mu"}),
             {x0, y0, -y0, x0},
             std::move(event),
             5.0,
             h};
  s.net = net;
  s.physical_params = {0};
  return s;
}

inline Scenario double_integrator_siren(const NetChoice& choice) {
  const SirenNet net = pick_net(choice, {2, 8, 1}, {-1.5, -1.5}, {1.5, 1.5}, NetChoice::Kind::siren, 2, 1.0);
  ExprGraph g(2, 2);
  const Expr x = g.var(0), v = g.var(1);
  const auto n = net_terms(g, net, {x, v}, std::nullopt);
  g.set_roots({v, -(g.param(0) * x) - g.param(1) * v + n[0]});
  Scenario s{"double_integrator_siren", OdeSystem(std::move(g), {1.0, 1.4}, {"x", "v"}, {"kp", "kd"}), {1.0, 0.0},
             state_level(2, 0, 0.5), 10.0};
  s.net = net;
  s.physical_params = {0, 1};
  return s;
}

inline Scenario siren_circle(const NetChoice& choice) {
  SirenNet net = choice.kind == NetChoice::Kind::given ? *choice.weights : siren_circle_net(1.0);
  if (net.n_in() != 2 || net.n_out() < 1) {
    throw ConfigError("net weights: siren_circle needs a 2-input surface network");
  }
  ExprGraph g(2, 1);
  const Expr x = g.var(0), y = g.var(1);
  g.set_roots({g.param(0) * x - y, x + g.param(0) * y});
  ExprGraph e(2, 0);
  const auto out = emit_siren(e, net, std::vector<Expr>{e.var(0), e.var(1)});
  e.set_roots({out[0].id()});
  Scenario s{"siren_circle", OdeSystem(std::move(g), {0.1}, {"x", "y"}, {"growth"}), {0.5, 0.0}, std::move(e), 20.0};
  s.net = net;
  s.physical_params = {0};
  return s;
}

}  // namespace detail

[[nodiscard]] inline Scenario make_scenario(const std::string& id, const NetChoice& net = {}) {
  if (net.kind == NetChoice::Kind::given && !net.weights) {
    throw ConfigError("net weights: missing network");
  }
  if (id == "linear_decay") return detail::linear_decay();
  if (id == "free_fall") return detail::free_fall();
  if (id == "harmonic_oscillator") return detail::harmonic_oscillator();
  if (id == "lotka_volterra_siren") return detail::lotka_volterra_siren(net);
  if (id == "cr3bp_siren") return detail::cr3bp_siren(net);
  if (id == "double_integrator_siren") return detail::double_integrator_siren(net);
  if (id == "siren_circle") return detail::siren_circle(net);
  std::string known;
  for (const auto& s : scenario_ids()) {
    known += (known.empty() ? "" : ", ") + s;
  }
  throw ConfigError("system.id: unknown scenario '" + id + "' (known: " + known + ")");
}

}  // namespace ettkit
