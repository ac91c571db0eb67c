/**
 * @file validate.hpp
 * @brief Monte Carlo comparison of the event-map expansion against full
 *        nonlinear re-integration with event detection.
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ettkit/ett/compute.hpp"
#include "ettkit/rng.hpp"

namespace ettkit {

/// Deviation vector (VarySpec order) for sample index i; must be a pure function of i.
using DeviationSampler = std::function<std::vector<double>(std::uint64_t)>;

/// Independent uniform deviations in [-r_j, r_j].
[[nodiscard]] inline DeviationSampler box_sampler(std::vector<double> radii, std::uint64_t seed) {
  return [radii = std::move(radii), seed](std::uint64_t i) {
    const CounterRng rng(seed, i);
    std::vector<double> d(radii.size());
    for (std::size_t j = 0; j < radii.size(); ++j) {
      d[j] = rng.uniform(j, -radii[j], radii[j]);
    }
    return d;
  };
}

struct ComponentErrors {
  std::string label;
  double max_abs = 0.0;
  double median_abs = 0.0;
  double max_rel = 0.0;
  double median_rel = 0.0;
};

struct McReport {
  std::size_t requested = 0;
  std::size_t succeeded = 0;
  std::vector<std::uint64_t> failed;  ///< sample indices that did not trigger the event
  std::vector<ComponentErrors> components;  ///< event-state components, then "t"
  double max_abs_state = 0.0;  ///< max over samples and state components
  double max_rel_state = 0.0;
};

struct McOptions {
  std::size_t threads = 1;
  double tol = 1e-15;
  double t_max = 100.0;
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) {
    return 0.0;
  }
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) {
    return hi;
  }
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

}  // namespace detail

/**
 * Re-integrates n samples with event detection and compares them with the
 * expansion.  Relative errors use the mixed scale max(|truth|, 1), so
 * components that vanish on the manifold do not divide by zero.
 * Results are merged by sample index, so they do not depend on the thread count.
 */
[[nodiscard]] inline McReport validate_mc(const EttResult& r, const OdeSystem& sys, const ExprGraph& e,
                                          const DeviationSampler& sampler, std::size_t n, const McOptions& opt = {}) {
  if (n < 1) {
    throw ConfigError("validate_mc: at least one sample is required");
  }
  const std::size_t dim = r.x_event.size();
  // per sample: dim state errors, then the time error
  std::vector<std::vector<double>> abs_err(n), rel_err(n);
  std::vector<char> ok(n, 0);
  TaylorOptions topt;
  topt.tol = opt.tol;
  topt.keep_dense = false;

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto dev = sampler(i);
      const auto pred = evaluate_event_map(r, dev);
      const auto [x, th] = apply_deviation(r, dev);
      try {
        const auto hit = detect_event(sys, e, x, std::span<const double>(th), 0.0, opt.t_max, topt);
        abs_err[i].resize(dim + 1);
        rel_err[i].resize(dim + 1);
        for (std::size_t c = 0; c <= dim; ++c) {
          const double truth = c < dim ? hit.x[c] : hit.t;
          const double guess = c < dim ? pred.x[c] : pred.t;
          const double a = std::abs(guess - truth);
          abs_err[i][c] = a;
          rel_err[i][c] = a / std::max(std::abs(truth), 1.0);
        }
        ok[i] = 1;
      } catch (const NumericalError&) {
        ok[i] = 0;
      }
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(opt.threads, n));
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t en = std::min(n, b + chunk);
      if (b < en) {
        pool.emplace_back(work, b, en);
      }
    }
    for (auto& th : pool) {
      th.join();
    }
  }

  McReport rep;
  rep.requested = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (ok[i]) {
      ++rep.succeeded;
    } else {
      rep.failed.push_back(i);
    }
  }
  for (std::size_t c = 0; c <= dim; ++c) {
    ComponentErrors ce;
    ce.label = c < dim ? r.ett_map.labels()[c] : "t";
    std::vector<double> a, rl;
    for (std::size_t i = 0; i < n; ++i) {
      if (ok[i]) {
        a.push_back(abs_err[i][c]);
        rl.push_back(rel_err[i][c]);
      }
    }
    if (!a.empty()) {
      ce.max_abs = *std::max_element(a.begin(), a.end());
      ce.max_rel = *std::max_element(rl.begin(), rl.end());
      ce.median_abs = detail::median(a);
      ce.median_rel = detail::median(rl);
    }
    if (c < dim) {
      rep.max_abs_state = std::max(rep.max_abs_state, ce.max_abs);
      rep.max_rel_state = std::max(rep.max_rel_state, ce.max_rel);
    }
    rep.components.push_back(std::move(ce));
  }
  return rep;
}

}  // namespace ettkit
