/**
 * @file integrator.hpp
 * @brief Adaptive Taylor integrator with dense output, generic over the
 *        coefficient algebra (double or TruncatedPoly).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ettkit/error.hpp"
#include "ettkit/polyalg/elementary.hpp"
#include "ettkit/taylor/jet_engine.hpp"

namespace ettkit {

struct TaylorOptions {
  double tol = 1e-15;
  std::size_t order = 0;  ///< 0 picks the default for the algebra
  std::size_t max_steps = 1000000;
  double max_step = std::numeric_limits<double>::infinity();
  bool keep_dense = true;
};

/// Default time-jet order: 20 over reals, max(k + 4, 12) over order-k polynomials.
template <class S>
[[nodiscard]] std::size_t default_jet_order(const S& like) {
  if constexpr (std::is_same_v<S, double>) {
    (void)like;
    return 20;
  } else {
    return std::max<std::size_t>(like.order() + 4, 12);
  }
}

template <class S>
struct TrajectoryStep {
  double t_start = 0.0;
  double h = 0.0;
  TimeJet<S> jet;
};

template <class S>
struct Trajectory {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<TrajectoryStep<S>> steps;  ///< empty unless dense output was kept
  std::vector<S> terminal;
  std::size_t step_count = 0;

  [[nodiscard]] std::size_t dim() const noexcept { return terminal.size(); }
};

/// sum_k jet[k][i] s^k
template <class S>
[[nodiscard]] S horner(const TimeJet<S>& jet, std::size_t i, double s) {
  S acc = jet.back()[i];
  for (std::size_t k = jet.size() - 1; k-- > 0;) {
    acc *= s;
    acc += jet[k][i];
  }
  return acc;
}

/// d/ds of horner(jet, i, s).
template <class S>
[[nodiscard]] S horner_derivative(const TimeJet<S>& jet, std::size_t i, double s) {
  const std::size_t p = jet.size() - 1;
  S acc = jet[p][i] * static_cast<double>(p);
  for (std::size_t k = p - 1; k >= 1; --k) {
    acc *= s;
    acc += jet[k][i] * static_cast<double>(k);
  }
  return acc;
}

template <class S>
[[nodiscard]] std::vector<S> horner_state(const TimeJet<S>& jet, double s) {
  std::vector<S> x;
  x.reserve(jet.front().size());
  for (std::size_t i = 0; i < jet.front().size(); ++i) {
    x.push_back(horner(jet, i, s));
  }
  return x;
}

/// Step size 0.9 min_{j in {p-1, p}} (tol / |x^(j)|)^(1/j); infinite when both orders vanish.
template <class S>
[[nodiscard]] double taylor_step_size(const TimeJet<S>& jet, double tol) {
  const std::size_t p = jet.size() - 1;
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t j = p - 1; j <= p; ++j) {
    double nrm = 0.0;
    for (const auto& v : jet[j]) {
      nrm = std::max(nrm, ScalarTraits<S>::norm(v));
    }
    if (nrm > 0.0) {
      h = std::min(h, std::pow(tol / nrm, 1.0 / static_cast<double>(j)));
    }
  }
  return 0.9 * h;
}

template <class S>
struct StepResult {
  TimeJet<S> jet;
  double h = 0.0;
};

/// One Taylor step from (t, x): the time jet and the admissible (unsigned) step size.
template <class S>
[[nodiscard]] StepResult<S> taylor_step(const OdeSystem& sys, std::span<const S> x, std::span<const S> theta, double t,
                                        double tol, std::size_t order = 0) {
  if (!(tol > 0.0)) {
    throw ConfigError("tolerance must be positive");
  }
  JetEngine<S> engine(sys, order == 0 ? default_jet_order(x.front()) : order);
  StepResult<S> r;
  engine.compute(x, theta, t, r.jet);
  r.h = taylor_step_size(r.jet, tol);
  return r;
}

/**
 * Drives a JetEngine across [t0, t1] (either direction).  `on_step` is called
 * after every accepted step with (t_start, h, jet) and may return false to stop.
 */
template <class S, class OnStep>
double integrate_steps(JetEngine<S>& engine, std::vector<S>& x, std::span<const S> theta, double t0, double t1,
                       const TaylorOptions& opt, OnStep&& on_step) {
  if (!(opt.tol > 0.0)) {
    throw ConfigError("tolerance must be positive");
  }
  if (!std::isfinite(t0) || !std::isfinite(t1)) {
    throw ConfigError("integration bounds must be finite");
  }
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double t = t0;
  TimeJet<S> jet;
  std::size_t steps = 0;
  while (dir * (t1 - t) > 0.0) {
    if (steps >= opt.max_steps) {
      throw NumericalError("step limit " + std::to_string(opt.max_steps) + " reached at t = " + std::to_string(t));
    }
    engine.compute(std::span<const S>(x), theta, t, jet);
    double h = std::min(taylor_step_size(jet, opt.tol), opt.max_step);
    const double remaining = std::abs(t1 - t);
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    } else if (h < 1e-14 * std::max(std::abs(t), 1.0)) {
      throw NumericalError("step size underflow (h = " + std::to_string(h) + ") at t = " + std::to_string(t) +
                           ": stiff or singular dynamics");
    }
    const double hs = dir * h;
    std::vector<S> next = horner_state(jet, hs);
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (!ScalarTraits<S>::finite(next[i])) {
        throw NumericalError("non-finite state component " + std::to_string(i) + " at t = " + std::to_string(t + hs));
      }
    }
    ++steps;
    const double t_next = last ? t1 : t + hs;
    const bool go_on = on_step(t, hs, jet);
    x = std::move(next);
    t = t_next;
    if (!go_on) {
      break;
    }
  }
  return t;
}

template <class S>
[[nodiscard]] Trajectory<S> propagate(const OdeSystem& sys, std::vector<S> x0, std::span<const S> theta, double t0,
                                      double t1, const TaylorOptions& opt = {}) {
  if (x0.size() != sys.dim() || theta.size() != sys.n_params()) {
    throw DimensionError("propagate: expected " + std::to_string(sys.dim()) + " states and " +
                         std::to_string(sys.n_params()) + " parameters");
  }
  JetEngine<S> engine(sys, opt.order == 0 ? default_jet_order(x0.front()) : opt.order);
  Trajectory<S> traj;
  traj.t0 = t0;
  traj.t1 = t1;
  (void)integrate_steps(engine, x0, theta, t0, t1, opt, [&](double ts, double h, const TimeJet<S>& jet) {
    ++traj.step_count;
    if (opt.keep_dense) {
      traj.steps.push_back({ts, h, jet});
    }
    return true;
  });
  traj.terminal = std::move(x0);
  return traj;
}

/// Real-valued convenience overload.
[[nodiscard]] inline Trajectory<double> propagate(const OdeSystem& sys, std::vector<double> x0,
                                                  const std::vector<double>& theta, double t0, double t1,
                                                  const TaylorOptions& opt = {}) {
  return propagate<double>(sys, std::move(x0), std::span<const double>(theta), t0, t1, opt);
}

/// State at t by Horner evaluation of the covering step.
template <class S>
[[nodiscard]] std::vector<S> dense_eval(const Trajectory<S>& traj, double t) {
  const double lo = std::min(traj.t0, traj.t1);
  const double hi = std::max(traj.t0, traj.t1);
  if (!(t >= lo && t <= hi)) {
    throw DomainError("dense_eval: t = " + std::to_string(t) + " outside [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
  if (traj.steps.empty()) {
    if (t == traj.t1) {
      return traj.terminal;
    }
    throw DomainError("dense_eval: trajectory holds no dense output");
  }
  const double dir = traj.t1 >= traj.t0 ? 1.0 : -1.0;
  // last step whose start is not past t
  auto it = std::upper_bound(traj.steps.begin(), traj.steps.end(), t, [dir](double tv, const TrajectoryStep<S>& st) {
    return dir * tv < dir * st.t_start;
  });
  const auto& st = (it == traj.steps.begin()) ? traj.steps.front() : *std::prev(it);
  if (t == traj.t1) {
    return traj.terminal;
  }
  return horner_state(st.jet, t - st.t_start);
}

/// CSV with header t,<names...> sampled on `grid`.
inline void write_trajectory_csv(std::ostream& os, const Trajectory<double>& traj, std::span<const double> grid,
                                 const std::vector<std::string>& names) {
  os << 't';
  for (const auto& n : names) {
    os << ',' << n;
  }
  os << '\n';
  os.precision(17);
  for (double t : grid) {
    const auto x = dense_eval(traj, t);
    os << t;
    for (double v : x) {
      os << ',' << v;
    }
    os << '\n';
  }
}

}  // namespace ettkit
