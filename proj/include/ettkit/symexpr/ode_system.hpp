/**
 * @file ode_system.hpp
 * @brief ODE right-hand sides as expression graphs, Hamiltonian systems and the
 *        time-normalised event-tracking augmentation.
 */
#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ettkit/error.hpp"
#include "ettkit/symexpr/expr_graph.hpp"

namespace ettkit {

/// x' = f(x, theta, t); the graph roots are the components of f.
class OdeSystem {
 public:
  OdeSystem() = default;

  OdeSystem(ExprGraph graph, std::vector<double> param_defaults, std::vector<std::string> state_names = {},
            std::vector<std::string> param_names = {})
      : graph_(std::move(graph)),
        params_(std::move(param_defaults)),
        state_names_(std::move(state_names)),
        param_names_(std::move(param_names)) {
    const std::size_t n = graph_.roots().size();
    if (n == 0 || n != graph_.n_vars()) {
      throw DimensionError("ODE system needs one root per state: " + std::to_string(n) + " roots for " +
                           std::to_string(graph_.n_vars()) + " states");
    }
    if (params_.size() != graph_.n_params()) {
      throw DimensionError("ODE system declares " + std::to_string(graph_.n_params()) + " parameters but " +
                           std::to_string(params_.size()) + " defaults were given");
    }
    if (state_names_.empty()) {
      for (std::size_t i = 0; i < n; ++i) {
        state_names_.push_back("x" + std::to_string(i));
      }
    }
    if (param_names_.empty()) {
      for (std::size_t j = 0; j < params_.size(); ++j) {
        param_names_.push_back("p" + std::to_string(j));
      }
    }
    if (state_names_.size() != n || param_names_.size() != params_.size()) {
      throw DimensionError("ODE system name lists do not match its dimensions");
    }
  }

  [[nodiscard]] std::size_t dim() const noexcept { return graph_.n_vars(); }
  [[nodiscard]] std::size_t n_params() const noexcept { return params_.size(); }
  [[nodiscard]] const ExprGraph& graph() const noexcept { return graph_; }
  [[nodiscard]] const std::vector<NodeId>& rhs() const noexcept { return graph_.roots(); }
  [[nodiscard]] const std::vector<double>& param_defaults() const noexcept { return params_; }
  [[nodiscard]] const std::vector<std::string>& state_names() const noexcept { return state_names_; }
  [[nodiscard]] const std::vector<std::string>& param_names() const noexcept { return param_names_; }

  void set_param_defaults(std::vector<double> p) {
    if (p.size() != params_.size()) {
      throw DimensionError("parameter vector has the wrong length");
    }
    params_ = std::move(p);
  }

  [[nodiscard]] std::size_t param_index(const std::string& name) const {
    for (std::size_t j = 0; j < param_names_.size(); ++j) {
      if (param_names_[j] == name) {
        return j;
      }
    }
    throw ConfigError("unknown parameter '" + name + "'");
  }
  [[nodiscard]] std::size_t state_index(const std::string& name) const {
    for (std::size_t i = 0; i < state_names_.size(); ++i) {
      if (state_names_[i] == name) {
        return i;
      }
    }
    throw ConfigError("unknown state '" + name + "'");
  }

  /// f(x, theta, t) over reals.
  [[nodiscard]] std::vector<double> operator()(std::span<const double> x, std::span<const double> theta,
                                               double t) const {
    return graph_.eval(x, theta, t);
  }

 private:
  ExprGraph graph_;
  std::vector<double> params_;
  std::vector<std::string> state_names_;
  std::vector<std::string> param_names_;
};

/**
 * Canonical equations q' = dH/dp, p' = -dH/dq for a Hamiltonian over
 * states (q_0..q_{n-1}, p_0..p_{n-1}).
 */
[[nodiscard]] inline OdeSystem hamiltonian_system(const ExprGraph& hamiltonian, std::size_t n_dof,
                                                  std::vector<double> param_defaults = {},
                                                  std::vector<std::string> param_names = {}) {
  if (hamiltonian.n_vars() != 2 * n_dof) {
    throw DimensionError("Hamiltonian has arity " + std::to_string(hamiltonian.n_vars()) + ", expected " +
                         std::to_string(2 * n_dof));
  }
  if (param_defaults.empty()) {
    param_defaults.assign(hamiltonian.n_params(), 0.0);
  }
  ExprGraph g = hamiltonian;
  const NodeId h = g.root();
  std::vector<NodeId> rhs(2 * n_dof);
  for (std::size_t i = 0; i < n_dof; ++i) {
    rhs[i] = g.diff(h, Wrt::var(n_dof + i));
    rhs[n_dof + i] = g.make(Op::neg, g.diff(h, Wrt::var(i)));
  }
  g.set_roots(rhs);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n_dof; ++i) {
    names.push_back("q" + std::to_string(i));
  }
  for (std::size_t i = 0; i < n_dof; ++i) {
    names.push_back("p" + std::to_string(i));
  }
  return OdeSystem(std::move(g), std::move(param_defaults), std::move(names), std::move(param_names));
}

/**
 * Augmented system in normalised time tau = t / T, tau in [0, 1]:
 *   x'   = T f(x, theta, tau T)
 *   eps' = T (de/dt + grad_x e . f)
 * State eps is appended after x; T is appended as the last parameter.
 * Along a solution eps(tau) = e(x(tau T), theta, tau T) when eps(0) = e(x0, theta, 0).
 */
[[nodiscard]] inline OdeSystem build_augmented_event_system(const OdeSystem& sys, const ExprGraph& event) {
  const std::size_t n = sys.dim();
  const std::size_t np = sys.n_params();
  if (event.n_vars() != n || event.n_params() > np) {
    throw DimensionError("event function arity (" + std::to_string(event.n_vars()) + " states, " +
                         std::to_string(event.n_params()) + " parameters) is incompatible with the system");
  }
  ExprGraph ev = event;
  const NodeId e = ev.root();
  std::vector<NodeId> ev_roots;
  ev_roots.push_back(ev.diff(e, Wrt::time()));
  for (std::size_t i = 0; i < n; ++i) {
    ev_roots.push_back(ev.diff(e, Wrt::var(i)));
  }

  ExprGraph aug(n + 1, np + 1);
  const Expr period = aug.param(np);
  const NodeId t_of_tau = aug.make(Op::mul, aug.time().id(), period.id());
  auto leaf = [&aug, t_of_tau](const Node& node) -> NodeId {
    switch (node.op) {
      case Op::var: return aug.var(static_cast<std::size_t>(node.index)).id();
      case Op::param: return aug.param(static_cast<std::size_t>(node.index)).id();
      default: return t_of_tau;
    }
  };
  const auto f = aug.import(sys.graph(), std::span<const NodeId>(sys.rhs()), leaf);
  const auto de = aug.import(ev, std::span<const NodeId>(ev_roots), leaf);

  std::vector<NodeId> rhs;
  rhs.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    rhs.push_back(aug.make(Op::mul, period.id(), f[i]));
  }
  NodeId rate = de[0];
  for (std::size_t i = 0; i < n; ++i) {
    rate = aug.make(Op::add, rate, aug.make(Op::mul, de[1 + i], f[i]));
  }
  rhs.push_back(aug.make(Op::mul, period.id(), rate));
  aug.set_roots(std::move(rhs));

  auto params = sys.param_defaults();
  params.push_back(1.0);
  auto pnames = sys.param_names();
  pnames.push_back("T");
  auto snames = sys.state_names();
  snames.push_back("eps");
  return OdeSystem(std::move(aug), std::move(params), std::move(snames), std::move(pnames));
}

/// Builds a one-root graph with the arity of `sys` from a callback over handles.
template <class Fn>
[[nodiscard]] ExprGraph make_expression(std::size_t n_vars, std::size_t n_params, Fn&& body) {
  ExprGraph g(n_vars, n_params);
  const Expr root = body(g);
  g.set_roots({root.id()});
  return g;
}

}  // namespace ettkit
