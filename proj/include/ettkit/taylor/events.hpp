/**
 * @file events.hpp
 * @brief First crossing of an event manifold e(x, theta, t) = 0 along a
 *        real-valued Taylor trajectory.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ettkit/error.hpp"
#include "ettkit/taylor/integrator.hpp"

namespace ettkit {

struct EventHit {
  double t = 0.0;
  std::vector<double> x;
  double residual = 0.0;  ///< e at the returned point
  std::size_t steps = 0;
};

namespace detail {

/// e together with de/dt and de/dx_i, evaluated against a step's dense output.
class EventProbe {
 public:
  EventProbe(const ExprGraph& e, std::size_t dim, std::span<const double> theta) : g_(e), theta_(theta) {
    if (e.roots().size() != 1) {
      throw DimensionError("event function must have exactly one root");
    }
    const NodeId r = g_.root();
    roots_.push_back(r);
    roots_.push_back(g_.diff(r, Wrt::time()));
    for (std::size_t i = 0; i < dim; ++i) {
      roots_.push_back(g_.diff(r, Wrt::var(i)));
    }
    theta_ = theta.first(e.n_params());
  }

  [[nodiscard]] double value(std::span<const double> x, double t) const {
    const NodeId r = roots_[0];
    return g_.eval<double>(std::span<const NodeId>(&r, 1), x, theta_, t, t)[0];
  }

  /// (e, de/dt along the flow) at parameter u of a step: t = ts + u h.
  [[nodiscard]] std::pair<double, double> along(const TimeJet<double>& jet, double ts, double h, double u) const {
    const double s = u * h;
    const auto x = horner_state(jet, s);
    const auto v = g_.eval<double>(std::span<const NodeId>(roots_), x, theta_, ts + s, 0.0);
    double rate = v[1];
    for (std::size_t i = 0; i < x.size(); ++i) {
      rate += v[2 + i] * horner_derivative(jet, i, s);
    }
    return {v[0], rate * h};
  }

 private:
  ExprGraph g_;
  std::span<const double> theta_;
  std::vector<NodeId> roots_;
};

}  // namespace detail

/**
 * Integrates from (t0, x0) towards t_max and returns the first sign change of e.
 * Each step's dense output is sampled at p + 1 points; the bracketing pair is
 * refined by safeguarded Newton iteration.  A starting point on the manifold
 * is skipped; tangential touches are reported as grazing errors.
 */
[[nodiscard]] inline EventHit detect_event(const OdeSystem& sys, const ExprGraph& e, std::vector<double> x0,
                                           std::span<const double> theta, double t0, double t_max,
                                           const TaylorOptions& opt = {}) {
  if (x0.size() != sys.dim() || theta.size() != sys.n_params()) {
    throw DimensionError("detect_event: state/parameter arity mismatch");
  }
  if (e.n_vars() != sys.dim() || e.n_params() > sys.n_params()) {
    throw DimensionError("event function arity is incompatible with the system");
  }
  const detail::EventProbe probe(e, sys.dim(), theta);
  const double e0 = probe.value(x0, t0);
  const double scale = std::max(1.0, std::abs(e0));
  const double graze_tol = 1e-9 * scale;

  JetEngine<double> engine(sys, opt.order == 0 ? 20 : opt.order);
  const std::size_t p = engine.order();
  double prev = e0;
  std::optional<EventHit> hit;
  std::size_t steps = 0;

  auto refine = [&](const TimeJet<double>& jet, double ts, double h, double ua, double ub, double ga) {
    double a = ua, b = ub;
    double u = 0.5 * (a + b);
    double gu = 0.0;
    for (int it = 0; it < 200; ++it) {
      const auto [g, dg] = probe.along(jet, ts, h, u);
      gu = g;
      if (!std::isfinite(g)) {
        throw EventError("event function became non-finite during root refinement at t = " +
                         std::to_string(ts + u * h));
      }
      if (g == 0.0) {
        break;
      }
      const double tiny = 2.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(ts + u * h), 1.0);
      if (dg != 0.0 && std::abs(g / dg * h) <= tiny) {
        const double un = u - g / dg;
        if (un >= a && un <= b) {
          u = un;
          gu = probe.along(jet, ts, h, u).first;
        }
        break;
      }
      if ((g < 0.0) == (ga < 0.0)) {
        a = u;
        ga = g;
      } else {
        b = u;
      }
      if (std::abs(b - a) * std::abs(h) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(ts), 1.0)) {
        break;
      }
      double un = dg != 0.0 ? u - g / dg : a;
      if (!(un > a && un < b)) {
        un = 0.5 * (a + b);
      }
      u = un;
    }
    EventHit r;
    r.t = ts + u * h;
    r.x = horner_state(jet, u * h);
    r.residual = gu;
    return r;
  };

  (void)integrate_steps(engine, x0, theta, t0, t_max, opt, [&](double ts, double h, const TimeJet<double>& jet) {
    ++steps;
    std::vector<double> g(p + 1);
    g[0] = prev;
    for (std::size_t i = 1; i <= p; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(p);
      g[i] = probe.value(horner_state(jet, u * h), ts + u * h);
    }
    for (std::size_t i = 1; i <= p; ++i) {
      if (g[i - 1] == 0.0) {
        // leaving the manifold at the start point: adopt the first nonzero sign
        g[i - 1] = g[i];
        continue;
      }
      const double ua = static_cast<double>(i - 1) / static_cast<double>(p);
      const double ub = static_cast<double>(i) / static_cast<double>(p);
      if (g[i] == 0.0 || (g[i] < 0.0) != (g[i - 1] < 0.0)) {
        if (g[i] == 0.0) {
          const double after = i < p ? g[i + 1] : probe.along(jet, ts, h, 1.0).first;
          if (after != 0.0 && (after < 0.0) == (g[i - 1] < 0.0)) {
            throw EventError("grazing contact with the event manifold at t = " + std::to_string(ts + ub * h));
          }
          EventHit r;
          r.t = ts + ub * h;
          r.x = horner_state(jet, ub * h);
          hit = std::move(r);
        } else {
          hit = refine(jet, ts, h, ua, ub, g[i - 1]);
        }
        return false;
      }
      if (i < p && std::abs(g[i]) < graze_tol && std::abs(g[i]) <= std::abs(g[i - 1]) &&
          std::abs(g[i]) <= std::abs(g[i + 1]) && (g[i + 1] < 0.0) == (g[i] < 0.0)) {
        throw EventError("grazing contact with the event manifold near t = " + std::to_string(ts + ub * h));
      }
    }
    prev = g[p];
    return true;
  });
  if (!hit) {
    throw EventError("no event before t_max = " + std::to_string(t_max));
  }
  hit->steps = steps;
  return *hit;
}

[[nodiscard]] inline EventHit detect_event(const OdeSystem& sys, const ExprGraph& e, std::vector<double> x0,
                                           const std::vector<double>& theta, double t0, double t_max,
                                           const TaylorOptions& opt = {}) {
  return detect_event(sys, e, std::move(x0), std::span<const double>(theta), t0, t_max, opt);
}

}  // namespace ettkit
