/**
 * @file jet_engine.hpp
 * @brief Time-Taylor coefficients of an ODE solution by automatic
 *        differentiation of the right-hand side expression graph.
 *
 * For each order m the m-th normalised derivative of every graph node is
 * obtained from lower-order ones (Cauchy products and the usual recurrences
 * for div, exp, log, sqrt, sin/cos and powers), then x^(m+1) = f^(m)/(m+1).
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ettkit/error.hpp"
#include "ettkit/scalar.hpp"
#include "ettkit/symexpr/ode_system.hpp"

namespace ettkit {

/// jet[k][i] is the k-th Taylor coefficient (d^k x_i/dt^k / k!) of state i.
template <class S>
using TimeJet = std::vector<std::vector<S>>;

template <class S>
class JetEngine {
 public:
  JetEngine(const OdeSystem& sys, std::size_t order) : sys_(&sys), order_(order) {
    if (order < 2) {
      throw DimensionError("time-jet order must be at least 2");
    }
    const ExprGraph& g = sys.graph();
    reach_ = g.reachable(std::span<const NodeId>(sys.rhs()));
    time_const_.assign(g.size(), 0);
    for (NodeId id = 0; id < g.size(); ++id) {
      const Node& n = g.node(id);
      const int ar = op_arity(n.op);
      switch (n.op) {
        case Op::var:
        case Op::time:
          time_const_[id] = 0;
          break;
        case Op::param:
        case Op::constant:
          time_const_[id] = 1;
          break;
        default:
          time_const_[id] = time_const_[n.lhs] && (ar == 1 || time_const_[n.rhs]);
          break;
      }
    }
    ser_.assign(g.size(), std::vector<S>(order + 1));
    aux_.assign(g.size(), {});
    for (NodeId id = 0; id < g.size(); ++id) {
      if (!reach_[id] || time_const_[id]) {
        continue;
      }
      const Node& n = g.node(id);
      if (n.op == Op::sin || n.op == Op::cos) {
        aux_[id].assign(1, std::vector<S>(order + 1));
      } else if (n.op == Op::powi && n.index >= 2) {
        aux_[id].assign(static_cast<std::size_t>(n.index - 1), std::vector<S>(order + 1));
      }
    }
  }

  [[nodiscard]] std::size_t order() const noexcept { return order_; }

  /// Taylor coefficients of the solution through (t, x) up to order().
  void compute(std::span<const S> x, std::span<const S> theta, double t, TimeJet<S>& jet) {
    const ExprGraph& g = sys_->graph();
    const std::size_t n = sys_->dim();
    if (x.size() != n || theta.size() != sys_->n_params()) {
      throw DimensionError("jet engine: state/parameter arity mismatch");
    }
    const S& like = x.front();
    const S zero = ScalarTraits<S>::constant(like, 0.0);
    jet.resize(order_ + 1);
    jet[0].assign(x.begin(), x.end());
    for (std::size_t m = 0; m < order_; ++m) {
      for (NodeId id = 0; id < g.size(); ++id) {
        if (!reach_[id]) {
          continue;
        }
        if (time_const_[id] && m > 0) {
          if (m == 1) {
            for (std::size_t k = 1; k <= order_; ++k) {
              ser_[id][k] = zero;
            }
          }
          continue;
        }
        compute_node(g, id, m, jet, theta, t, like, zero);
      }
      jet[m + 1].resize(n);
      const double inv = 1.0 / static_cast<double>(m + 1);
      for (std::size_t i = 0; i < n; ++i) {
        jet[m + 1][i] = ser_[sys_->rhs()[i]][m] * inv;
      }
    }
  }

 private:
  void compute_node(const ExprGraph& g, NodeId id, std::size_t m, const TimeJet<S>& jet, std::span<const S> theta,
                    double t, const S& like, const S& zero) {
    using std::cos;
    using std::exp;
    using std::log;
    using std::sin;
    using std::sqrt;
    using T = ScalarTraits<S>;
    const Node& nd = g.node(id);
    auto& c = ser_[id];
    const double md = static_cast<double>(m);
    switch (nd.op) {
      case Op::var:
        c[m] = jet[m][static_cast<std::size_t>(nd.index)];
        return;
      case Op::param:
        c[0] = theta[static_cast<std::size_t>(nd.index)];
        return;
      case Op::constant:
        c[0] = T::constant(like, nd.value);
        return;
      case Op::time:
        c[m] = T::constant(like, m == 0 ? t : (m == 1 ? 1.0 : 0.0));
        return;
      default:
        break;
    }
    const auto& a = ser_[nd.lhs];
    const bool atc = time_const_[nd.lhs];
    auto a_at = [&](std::size_t j) -> const S& { return (atc && j > 0) ? zero : a[j]; };
    switch (nd.op) {
      case Op::add:
        c[m] = a_at(m) + rhs_at(nd, m, zero);
        return;
      case Op::sub:
        c[m] = a_at(m) - rhs_at(nd, m, zero);
        return;
      case Op::neg:
        c[m] = -a_at(m);
        return;
      case Op::mul: {
        const auto& b = ser_[nd.rhs];
        const bool btc = time_const_[nd.rhs];
        if (atc) {
          c[m] = a[0] * b[m];
        } else if (btc) {
          c[m] = a[m] * b[0];
        } else {
          S acc = a[0] * b[m];
          for (std::size_t j = 1; j <= m; ++j) {
            acc += a[j] * b[m - j];
          }
          c[m] = std::move(acc);
        }
        return;
      }
      case Op::div: {
        const auto& b = ser_[nd.rhs];
        const bool btc = time_const_[nd.rhs];
        if (m == 0) {
          if (T::value(b[0]) == 0.0) {
            throw DomainError("node " + std::to_string(id) + " (div): division by zero along the trajectory");
          }
          c[0] = a[0] / b[0];
          return;
        }
        S acc = a_at(m);
        if (!btc) {
          for (std::size_t j = 1; j <= m; ++j) {
            acc -= b[j] * c[m - j];
          }
        }
        c[m] = acc / b[0];
        return;
      }
      case Op::exp: {
        if (m == 0) {
          c[0] = exp(a[0]);
          return;
        }
        S acc = a[1] * c[m - 1];
        for (std::size_t j = 2; j <= m; ++j) {
          acc += (a[j] * c[m - j]) * static_cast<double>(j);
        }
        c[m] = acc * (1.0 / md);
        return;
      }
      case Op::log: {
        if (m == 0) {
          if (!(T::value(a[0]) > 0.0)) {
            throw DomainError("node " + std::to_string(id) + " (log): non-positive argument along the trajectory");
          }
          c[0] = log(a[0]);
          return;
        }
        S acc = a[m] * md;
        for (std::size_t j = 1; j < m; ++j) {
          acc -= (a[j] * c[m - j]) * static_cast<double>(m - j);
        }
        c[m] = acc / (a[0] * md);
        return;
      }
      case Op::sqrt: {
        if (m == 0) {
          if (!(T::value(a[0]) > 0.0)) {
            throw DomainError("node " + std::to_string(id) + " (sqrt): non-positive argument along the trajectory");
          }
          c[0] = sqrt(a[0]);
          return;
        }
        S acc = a[m];
        for (std::size_t j = 1; j < m; ++j) {
          acc -= c[j] * c[m - j];
        }
        c[m] = acc / (c[0] * 2.0);
        return;
      }
      case Op::sin:
      case Op::cos: {
        auto& other = aux_[id][0];
        auto& s = nd.op == Op::sin ? c : other;
        auto& co = nd.op == Op::sin ? other : c;
        if (m == 0) {
          s[0] = sin(a[0]);
          co[0] = cos(a[0]);
          return;
        }
        S as = a[1] * co[m - 1];
        S ac = a[1] * s[m - 1];
        for (std::size_t j = 2; j <= m; ++j) {
          const double w = static_cast<double>(j);
          as += (a[j] * co[m - j]) * w;
          ac += (a[j] * s[m - j]) * w;
        }
        s[m] = as * (1.0 / md);
        co[m] = ac * (-1.0 / md);
        return;
      }
      case Op::powi: {
        const int k = nd.index;
        if (k >= 2) {
          // chain a^2, ..., a^k by Cauchy products
          auto& chain = aux_[id];
          const std::vector<S>* prev = &a;
          for (int p = 2; p <= k; ++p) {
            auto& cur = (p == k) ? c : chain[static_cast<std::size_t>(p - 2)];
            S acc = (*prev)[0] * a[m];
            for (std::size_t j = 1; j <= m; ++j) {
              acc += (*prev)[j] * a[m - j];
            }
            cur[m] = std::move(acc);
            prev = &cur;
          }
          return;
        }
        if (m == 0) {
          if (T::value(a[0]) == 0.0) {
            throw DomainError("node " + std::to_string(id) + " (powi): negative power of zero along the trajectory");
          }
          c[0] = powi(a[0], k);
          return;
        }
        // a c' = k a' c
        const double alpha = static_cast<double>(k);
        S acc = (a[1] * c[m - 1]) * ((alpha + 1.0) - md);
        for (std::size_t j = 2; j <= m; ++j) {
          acc += (a[j] * c[m - j]) * ((alpha + 1.0) * static_cast<double>(j) - md);
        }
        c[m] = acc / (a[0] * md);
        return;
      }
      default:
        return;
    }
  }

  const S& rhs_at(const Node& nd, std::size_t m, const S& zero) const {
    return (time_const_[nd.rhs] && m > 0) ? zero : ser_[nd.rhs][m];
  }

  const OdeSystem* sys_;
  std::size_t order_;
  std::vector<char> reach_;
  std::vector<char> time_const_;
  std::vector<std::vector<S>> ser_;
  std::vector<std::vector<std::vector<S>>> aux_;
};

}  // namespace ettkit
