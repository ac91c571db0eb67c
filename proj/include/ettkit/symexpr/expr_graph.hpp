/**
 * @file expr_graph.hpp
 * @brief Hash-consed expression DAG with evaluation over any scalar algebra
 *        and symbolic differentiation.
 *
 * Nodes are appended after their children, so node ids are a topological
 * order. Constant folding happens only when a node is created.
 */
#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ettkit/error.hpp"
#include "ettkit/polyalg/elementary.hpp"
#include "ettkit/scalar.hpp"

namespace ettkit {

using NodeId = std::uint32_t;

enum class Op : std::uint8_t { var, param, time, constant, add, sub, mul, div, neg, sin, cos, exp, log, sqrt, powi };

[[nodiscard]] constexpr std::string_view op_name(Op op) noexcept {
  switch (op) {
    case Op::var: return "var";
    case Op::param: return "param";
    case Op::time: return "time";
    case Op::constant: return "const";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::neg: return "neg";
    case Op::sin: return "sin";
    case Op::cos: return "cos";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::sqrt: return "sqrt";
    case Op::powi: return "powi";
  }
  return "?";
}

[[nodiscard]] constexpr int op_arity(Op op) noexcept {
  switch (op) {
    case Op::var:
    case Op::param:
    case Op::time:
    case Op::constant:
      return 0;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
      return 2;
    default:
      return 1;
  }
}

struct Node {
  Op op = Op::constant;
  NodeId lhs = 0;
  NodeId rhs = 0;
  double value = 0.0;      ///< constant payload
  std::int32_t index = 0;  ///< var/param index or integer exponent

  friend bool operator==(const Node&, const Node&) = default;
};

/// Differentiation target.
struct Wrt {
  enum class Kind : std::uint8_t { var, param, time };
  Kind kind = Kind::var;
  std::size_t index = 0;

  [[nodiscard]] static Wrt var(std::size_t i) { return {Kind::var, i}; }
  [[nodiscard]] static Wrt param(std::size_t j) { return {Kind::param, j}; }
  [[nodiscard]] static Wrt time() { return {Kind::time, 0}; }
};

class ExprGraph;

/// Lightweight handle used to build graphs with ordinary operator syntax.
class Expr {
 public:
  Expr(ExprGraph* g, NodeId id) : g_(g), id_(id) {}
  [[nodiscard]] NodeId id() const noexcept { return id_; }
  [[nodiscard]] ExprGraph& graph() const noexcept { return *g_; }

 private:
  ExprGraph* g_;
  NodeId id_;
};

class ExprGraph {
 public:
  ExprGraph() = default;
  ExprGraph(std::size_t n_vars, std::size_t n_params) : n_vars_(n_vars), n_params_(n_params) {}

  [[nodiscard]] std::size_t n_vars() const noexcept { return n_vars_; }
  [[nodiscard]] std::size_t n_params() const noexcept { return n_params_; }
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] const Node& node(NodeId id) const { return nodes_.at(id); }
  [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }

  [[nodiscard]] const std::vector<NodeId>& roots() const noexcept { return roots_; }
  void set_roots(std::vector<NodeId> roots) {
    for (auto r : roots) {
      check_id(r);
    }
    roots_ = std::move(roots);
  }
  void set_roots(std::initializer_list<Expr> roots) {
    std::vector<NodeId> ids;
    for (const auto& e : roots) {
      ids.push_back(e.id());
    }
    set_roots(std::move(ids));
  }
  NodeId add_root(NodeId id) {
    check_id(id);
    roots_.push_back(id);
    return id;
  }
  /// The single root of a scalar expression.
  [[nodiscard]] NodeId root() const {
    if (roots_.size() != 1) {
      throw DimensionError("expression graph has " + std::to_string(roots_.size()) + " roots, expected 1");
    }
    return roots_.front();
  }

  // Leaf construction.
  Expr var(std::size_t i) {
    if (i >= n_vars_) {
      throw DimensionError("variable index " + std::to_string(i) + " >= declared arity " + std::to_string(n_vars_));
    }
    return {this, intern({Op::var, 0, 0, 0.0, static_cast<std::int32_t>(i)})};
  }
  Expr param(std::size_t j) {
    if (j >= n_params_) {
      throw DimensionError("parameter index " + std::to_string(j) + " >= declared count " + std::to_string(n_params_));
    }
    return {this, intern({Op::param, 0, 0, 0.0, static_cast<std::int32_t>(j)})};
  }
  Expr time() { return {this, intern({Op::time, 0, 0, 0.0, 0})}; }
  Expr constant(double c) { return {this, make_constant(c)}; }
  Expr wrap(NodeId id) {
    check_id(id);
    return {this, id};
  }

  /// Creates (or reuses) a node, applying construction-time constant folding.
  NodeId make(Op op, NodeId a = 0, NodeId b = 0, std::int32_t exponent = 0) {
    const int ar = op_arity(op);
    if (ar == 0) {
      throw DimensionError("make: leaf nodes are created through var/param/time/constant");
    }
    check_id(a);
    if (ar == 2) {
      check_id(b);
    } else {
      b = 0;
    }
    const bool ca = is_const(a);
    const bool cb = ar == 2 && is_const(b);
    if (ca && (ar == 1 || cb)) {
      return make_constant(fold(op, value(a), ar == 2 ? value(b) : 0.0, exponent));
    }
    switch (op) {
      case Op::add:
        if (is_value(a, 0.0)) return b;
        if (is_value(b, 0.0)) return a;
        break;
      case Op::sub:
        if (is_value(b, 0.0)) return a;
        if (is_value(a, 0.0)) return make(Op::neg, b);
        if (a == b) return make_constant(0.0);
        break;
      case Op::mul:
        if (is_value(a, 0.0) || is_value(b, 0.0)) return make_constant(0.0);
        if (is_value(a, 1.0)) return b;
        if (is_value(b, 1.0)) return a;
        if (is_value(a, -1.0)) return make(Op::neg, b);
        if (is_value(b, -1.0)) return make(Op::neg, a);
        break;
      case Op::div:
        if (is_value(a, 0.0)) return make_constant(0.0);
        if (is_value(b, 1.0)) return a;
        break;
      case Op::neg:
        if (nodes_[a].op == Op::neg) return nodes_[a].lhs;
        break;
      case Op::powi:
        if (exponent == 0) return make_constant(1.0);
        if (exponent == 1) return a;
        break;
      default:
        break;
    }
    return intern({op, a, b, 0.0, op == Op::powi ? exponent : 0});
  }

  /// Symbolic derivative of `root`; new nodes are appended to this graph.
  NodeId diff(NodeId root, Wrt wrt) {
    check_id(root);
    const auto reach = reachable(std::span<const NodeId>(&root, 1));
    std::vector<NodeId> d(root + 1, 0);
    const NodeId zero = make_constant(0.0);
    const NodeId one = make_constant(1.0);
    for (NodeId id = 0; id <= root; ++id) {
      if (!reach[id]) {
        continue;
      }
      const Node n = nodes_[id];
      switch (n.op) {
        case Op::var:
          d[id] = (wrt.kind == Wrt::Kind::var && static_cast<std::size_t>(n.index) == wrt.index) ? one : zero;
          break;
        case Op::param:
          d[id] = (wrt.kind == Wrt::Kind::param && static_cast<std::size_t>(n.index) == wrt.index) ? one : zero;
          break;
        case Op::time:
          d[id] = wrt.kind == Wrt::Kind::time ? one : zero;
          break;
        case Op::constant:
          d[id] = zero;
          break;
        case Op::add:
          d[id] = make(Op::add, d[n.lhs], d[n.rhs]);
          break;
        case Op::sub:
          d[id] = make(Op::sub, d[n.lhs], d[n.rhs]);
          break;
        case Op::neg:
          d[id] = make(Op::neg, d[n.lhs]);
          break;
        case Op::mul:
          d[id] = make(Op::add, make(Op::mul, d[n.lhs], n.rhs), make(Op::mul, n.lhs, d[n.rhs]));
          break;
        case Op::div:
          // (a' - (a/b) b') / b
          d[id] = make(Op::div, make(Op::sub, d[n.lhs], make(Op::mul, id, d[n.rhs])), n.rhs);
          break;
        case Op::sin:
          d[id] = make(Op::mul, make(Op::cos, n.lhs), d[n.lhs]);
          break;
        case Op::cos:
          d[id] = make(Op::neg, make(Op::mul, make(Op::sin, n.lhs), d[n.lhs]));
          break;
        case Op::exp:
          d[id] = make(Op::mul, id, d[n.lhs]);
          break;
        case Op::log:
          d[id] = make(Op::div, d[n.lhs], n.lhs);
          break;
        case Op::sqrt:
          d[id] = make(Op::div, d[n.lhs], make(Op::mul, make_constant(2.0), id));
          break;
        case Op::powi:
          d[id] = make(Op::mul,
                       make(Op::mul, make_constant(static_cast<double>(n.index)), make(Op::powi, n.lhs, 0, n.index - 1)),
                       d[n.lhs]);
          break;
      }
    }
    return d[root];
  }

  /// Copies the sub-graphs of `src` below `src_roots` into this graph; leaves are mapped by `leaf`.
  std::vector<NodeId> import(const ExprGraph& src, std::span<const NodeId> src_roots,
                             const std::function<NodeId(const Node&)>& leaf) {
    const auto reach = src.reachable(src_roots);
    std::vector<NodeId> map(src.size(), 0);
    for (NodeId id = 0; id < src.size(); ++id) {
      if (!reach[id]) {
        continue;
      }
      const Node& n = src.nodes_[id];
      switch (n.op) {
        case Op::var:
        case Op::param:
        case Op::time:
          map[id] = leaf(n);
          break;
        case Op::constant:
          map[id] = make_constant(n.value);
          break;
        default:
          map[id] = make(n.op, map[n.lhs], op_arity(n.op) == 2 ? map[n.rhs] : 0, n.index);
          break;
      }
    }
    std::vector<NodeId> out;
    out.reserve(src_roots.size());
    for (auto r : src_roots) {
      out.push_back(map[r]);
    }
    return out;
  }

  /// Identity import: every leaf maps to the same leaf here (arity must cover src).
  std::vector<NodeId> import(const ExprGraph& src, std::span<const NodeId> src_roots) {
    return import(src, src_roots, [this](const Node& n) { return same_leaf(n); });
  }

  NodeId same_leaf(const Node& n) {
    switch (n.op) {
      case Op::var: return var(static_cast<std::size_t>(n.index)).id();
      case Op::param: return param(static_cast<std::size_t>(n.index)).id();
      default: return time().id();
    }
  }

  /// Marks every node reachable from `roots`.
  [[nodiscard]] std::vector<char> reachable(std::span<const NodeId> roots) const {
    std::vector<char> mark(nodes_.size(), 0);
    for (auto r : roots) {
      check_id(r);
      mark[r] = 1;
    }
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      if (!mark[i]) {
        continue;
      }
      const Node& n = nodes_[i];
      const int ar = op_arity(n.op);
      if (ar >= 1) {
        mark[n.lhs] = 1;
      }
      if (ar == 2) {
        mark[n.rhs] = 1;
      }
    }
    return mark;
  }

  [[nodiscard]] bool depends_on(NodeId root, Wrt wrt) const {
    const auto reach = reachable(std::span<const NodeId>(&root, 1));
    for (NodeId id = 0; id < nodes_.size(); ++id) {
      if (!reach[id]) {
        continue;
      }
      const Node& n = nodes_[id];
      if ((n.op == Op::var && wrt.kind == Wrt::Kind::var && static_cast<std::size_t>(n.index) == wrt.index) ||
          (n.op == Op::param && wrt.kind == Wrt::Kind::param && static_cast<std::size_t>(n.index) == wrt.index) ||
          (n.op == Op::time && wrt.kind == Wrt::Kind::time)) {
        return true;
      }
    }
    return false;
  }

  /**
   * Evaluates `roots` over the scalar algebra S; each reachable node is
   * computed once. `like` fixes the variable space of constants.
   */
  template <class S>
  [[nodiscard]] std::vector<S> eval(std::span<const NodeId> roots, std::span<const S> x, std::span<const S> theta,
                                    const S& t, const S& like) const {
    using std::cos;
    using std::exp;
    using std::log;
    using std::sin;
    using std::sqrt;
    using T = ScalarTraits<S>;
    if (x.size() < n_vars_ || theta.size() < n_params_) {
      throw DimensionError("eval: got " + std::to_string(x.size()) + " variables and " + std::to_string(theta.size()) +
                           " parameters, graph needs " + std::to_string(n_vars_) + " and " + std::to_string(n_params_));
    }
    const auto reach = reachable(roots);
    std::vector<S> val(nodes_.size());
    for (NodeId id = 0; id < nodes_.size(); ++id) {
      if (!reach[id]) {
        continue;
      }
      const Node& n = nodes_[id];
      try {
        switch (n.op) {
          case Op::var: val[id] = x[static_cast<std::size_t>(n.index)]; break;
          case Op::param: val[id] = theta[static_cast<std::size_t>(n.index)]; break;
          case Op::time: val[id] = t; break;
          case Op::constant: val[id] = T::constant(like, n.value); break;
          case Op::add: val[id] = val[n.lhs] + val[n.rhs]; break;
          case Op::sub: val[id] = val[n.lhs] - val[n.rhs]; break;
          case Op::mul: val[id] = val[n.lhs] * val[n.rhs]; break;
          case Op::div:
            if (T::value(val[n.rhs]) == 0.0) {
              throw DomainError("division by a quantity with zero value");
            }
            val[id] = val[n.lhs] / val[n.rhs];
            break;
          case Op::neg: val[id] = -val[n.lhs]; break;
          case Op::sin: val[id] = sin(val[n.lhs]); break;
          case Op::cos: val[id] = cos(val[n.lhs]); break;
          case Op::exp: val[id] = exp(val[n.lhs]); break;
          case Op::log:
            if (!(T::value(val[n.lhs]) > 0.0)) {
              throw DomainError("log of a non-positive value");
            }
            val[id] = log(val[n.lhs]);
            break;
          case Op::sqrt:
            if (T::value(val[n.lhs]) < 0.0) {
              throw DomainError("sqrt of a negative value");
            }
            val[id] = sqrt(val[n.lhs]);
            break;
          case Op::powi:
            if (n.index < 0 && T::value(val[n.lhs]) == 0.0) {
              throw DomainError("negative power of zero");
            }
            val[id] = powi(val[n.lhs], n.index);
            break;
        }
      } catch (const DomainError& e) {
        throw DomainError("node " + std::to_string(id) + " (" + std::string(op_name(n.op)) + "): " + e.what());
      }
    }
    std::vector<S> out;
    out.reserve(roots.size());
    for (auto r : roots) {
      out.push_back(val[r]);
    }
    return out;
  }

  /// Evaluates all roots.
  template <class S>
  [[nodiscard]] std::vector<S> eval(std::span<const S> x, std::span<const S> theta, const S& t) const {
    const S& like = !x.empty() ? x.front() : (!theta.empty() ? theta.front() : t);
    return eval<S>(std::span<const NodeId>(roots_), x, theta, t, like);
  }

  [[nodiscard]] std::vector<double> eval(std::span<const double> x, std::span<const double> theta = {},
                                         double t = 0.0) const {
    return eval<double>(std::span<const NodeId>(roots_), x, theta, t, t);
  }

  /// Rebuilds the hash-consing index after nodes were loaded verbatim.
  void load_nodes(std::size_t n_vars, std::size_t n_params, std::vector<Node> nodes, std::vector<NodeId> roots) {
    n_vars_ = n_vars;
    n_params_ = n_params;
    for (NodeId id = 0; id < nodes.size(); ++id) {
      const Node& n = nodes[id];
      const int ar = op_arity(n.op);
      if ((ar >= 1 && n.lhs >= id) || (ar == 2 && n.rhs >= id)) {
        throw ConfigError("graph node " + std::to_string(id) + " references a later node");
      }
      if ((n.op == Op::var && (n.index < 0 || static_cast<std::size_t>(n.index) >= n_vars)) ||
          (n.op == Op::param && (n.index < 0 || static_cast<std::size_t>(n.index) >= n_params))) {
        throw ConfigError("graph node " + std::to_string(id) + " index exceeds declared arity");
      }
    }
    nodes_ = std::move(nodes);
    intern_.clear();
    for (NodeId id = 0; id < nodes_.size(); ++id) {
      intern_.emplace(nodes_[id], id);
    }
    for (auto r : roots) {
      if (r >= nodes_.size()) {
        throw ConfigError("graph root " + std::to_string(r) + " out of range");
      }
    }
    roots_ = std::move(roots);
  }

  [[nodiscard]] bool is_const(NodeId id) const { return nodes_[id].op == Op::constant; }
  [[nodiscard]] double value(NodeId id) const { return nodes_[id].value; }

 private:
  struct NodeHash {
    std::size_t operator()(const Node& n) const noexcept {
      std::size_t h = static_cast<std::size_t>(n.op);
      auto mix = [&h](std::uint64_t v) { h ^= std::hash<std::uint64_t>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
      mix(n.lhs);
      mix(n.rhs);
      mix(std::bit_cast<std::uint64_t>(n.value));
      mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(n.index)));
      return h;
    }
  };

  NodeId intern(const Node& n) {
    auto [it, inserted] = intern_.try_emplace(n, static_cast<NodeId>(nodes_.size()));
    if (inserted) {
      nodes_.push_back(n);
    }
    return it->second;
  }

  NodeId make_constant(double c) { return intern({Op::constant, 0, 0, c, 0}); }

  [[nodiscard]] bool is_value(NodeId id, double v) const { return is_const(id) && nodes_[id].value == v; }

  void check_id(NodeId id) const {
    if (id >= nodes_.size()) {
      throw DimensionError("node id " + std::to_string(id) + " out of range");
    }
  }

  static double fold(Op op, double a, double b, std::int32_t exponent) {
    switch (op) {
      case Op::add: return a + b;
      case Op::sub: return a - b;
      case Op::mul: return a * b;
      case Op::div:
        if (b == 0.0) throw DomainError("constant division by zero");
        return a / b;
      case Op::neg: return -a;
      case Op::sin: return std::sin(a);
      case Op::cos: return std::cos(a);
      case Op::exp: return std::exp(a);
      case Op::log:
        if (!(a > 0.0)) throw DomainError("log of a non-positive constant");
        return std::log(a);
      case Op::sqrt:
        if (a < 0.0) throw DomainError("sqrt of a negative constant");
        return std::sqrt(a);
      case Op::powi:
        if (exponent < 0 && a == 0.0) throw DomainError("negative power of zero constant");
        return powi(a, exponent);
      default: return 0.0;
    }
  }

  std::size_t n_vars_ = 0;
  std::size_t n_params_ = 0;
  std::vector<Node> nodes_;
  std::vector<NodeId> roots_;
  std::unordered_map<Node, NodeId, NodeHash> intern_;
};

// Operator sugar on handles.
namespace detail {
inline Expr binary(Op op, const Expr& a, const Expr& b) {
  if (&a.graph() != &b.graph()) {
    throw DimensionError("expressions belong to different graphs");
  }
  return {&a.graph(), a.graph().make(op, a.id(), b.id())};
}
inline Expr unary(Op op, const Expr& a, std::int32_t k = 0) { return {&a.graph(), a.graph().make(op, a.id(), 0, k)}; }
}  // namespace detail

inline Expr operator+(const Expr& a, const Expr& b) { return detail::binary(Op::add, a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return detail::binary(Op::sub, a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return detail::binary(Op::mul, a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return detail::binary(Op::div, a, b); }
inline Expr operator-(const Expr& a) { return detail::unary(Op::neg, a); }
inline Expr operator+(const Expr& a, double c) { return a + a.graph().constant(c); }
inline Expr operator+(double c, const Expr& a) { return a.graph().constant(c) + a; }
inline Expr operator-(const Expr& a, double c) { return a - a.graph().constant(c); }
inline Expr operator-(double c, const Expr& a) { return a.graph().constant(c) - a; }
inline Expr operator*(const Expr& a, double c) { return a * a.graph().constant(c); }
inline Expr operator*(double c, const Expr& a) { return a.graph().constant(c) * a; }
inline Expr operator/(const Expr& a, double c) { return a / a.graph().constant(c); }
inline Expr operator/(double c, const Expr& a) { return a.graph().constant(c) / a; }
inline Expr sin(const Expr& a) { return detail::unary(Op::sin, a); }
inline Expr cos(const Expr& a) { return detail::unary(Op::cos, a); }
inline Expr exp(const Expr& a) { return detail::unary(Op::exp, a); }
inline Expr log(const Expr& a) { return detail::unary(Op::log, a); }
inline Expr sqrt(const Expr& a) { return detail::unary(Op::sqrt, a); }
inline Expr powi(const Expr& a, int n) { return detail::unary(Op::powi, a, n); }

}  // namespace ettkit
