/**
 * @file adjoint.hpp
 * @brief Segment loss and its parameter gradient by the adjoint method.
 *
 * L = (1/N) sum_i |Phi(t_{i+1}; x_i, theta) - x_{i+1}|^2, every segment starting
 * at the observed state.  The gradient integrates
 *   x' = f,  a' = -(df/dx)^T a,  lambda' = -(df/dtheta)^T a
 * backward from (x_f, 2 (x_f - x_{i+1}), 0) to t_i, and sums lambda(t_i) / N.
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ettkit/error.hpp"
#include "ettkit/symexpr/ode_system.hpp"
#include "ettkit/taylor/integrator.hpp"
#include "ettkit/training/dataset.hpp"

namespace ettkit {

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  ///< one entry per trainable parameter
};

/// Augmented (x, a, lambda) system for the given trainable parameter indices.
[[nodiscard]] inline OdeSystem build_adjoint_system(const OdeSystem& sys, const std::vector<std::size_t>& trainable) {
  const std::size_t n = sys.dim();
  const std::size_t m = trainable.size();
  const std::size_t np = sys.n_params();
  for (auto k : trainable) {
    if (k >= np) {
      throw ConfigError("trainable parameter index " + std::to_string(k) + " out of range (" + std::to_string(np) +
                        " parameters)");
    }
  }
  ExprGraph src = sys.graph();
  const std::vector<NodeId> f = sys.rhs();
  std::vector<NodeId> jac;  // df_j/dx_i at j * n + i, then df_j/dtheta_k at n*n + j * m + k
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      jac.push_back(src.diff(f[j], Wrt::var(i)));
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      jac.push_back(src.diff(f[j], Wrt::param(trainable[k])));
    }
  }
  ExprGraph g(2 * n + m, np);
  const auto fi = g.import(src, std::span<const NodeId>(f));
  const auto ji = g.import(src, std::span<const NodeId>(jac));
  std::vector<NodeId> rhs(fi);
  for (std::size_t i = 0; i < n; ++i) {
    Expr acc = g.constant(0.0);
    for (std::size_t j = 0; j < n; ++j) {
      acc = acc + g.var(n + j) * g.wrap(ji[j * n + i]);
    }
    rhs.push_back((-acc).id());
  }
  for (std::size_t k = 0; k < m; ++k) {
    Expr acc = g.constant(0.0);
    for (std::size_t j = 0; j < n; ++j) {
      acc = acc + g.var(n + j) * g.wrap(ji[n * n + j * m + k]);
    }
    rhs.push_back((-acc).id());
  }
  g.set_roots(std::move(rhs));
  auto names = sys.state_names();
  for (std::size_t i = 0; i < n; ++i) {
    names.push_back("a_" + sys.state_names()[i]);
  }
  for (std::size_t k = 0; k < m; ++k) {
    names.push_back("lambda_" + sys.param_names()[trainable[k]]);
  }
  return OdeSystem(std::move(g), sys.param_defaults(), std::move(names), sys.param_names());
}

class AdjointModel {
 public:
  AdjointModel(OdeSystem sys, std::vector<std::size_t> trainable, TaylorOptions opt = {}, std::size_t threads = 1)
      : sys_(std::move(sys)),
        trainable_(std::move(trainable)),
        adjoint_(build_adjoint_system(sys_, trainable_)),
        opt_(opt),
        threads_(std::max<std::size_t>(threads, 1)) {
    opt_.keep_dense = false;
  }

  [[nodiscard]] const OdeSystem& system() const noexcept { return sys_; }
  [[nodiscard]] const std::vector<std::size_t>& trainable() const noexcept { return trainable_; }
  [[nodiscard]] const OdeSystem& adjoint_system() const noexcept { return adjoint_; }

  /// Loss over the given segments (all by default).
  [[nodiscard]] double loss(const std::vector<double>& theta, const Dataset& data,
                            const std::vector<std::size_t>& segments = {}) const {
    return run(theta, data, segments, false).loss;
  }

  [[nodiscard]] LossGrad loss_and_grad(const std::vector<double>& theta, const Dataset& data,
                                       const std::vector<std::size_t>& segments = {}) const {
    return run(theta, data, segments, true);
  }

 private:
  struct SegmentOut {
    double loss = 0.0;
    std::vector<double> grad;
  };

  SegmentOut segment(const std::vector<double>& theta, const Dataset& data, std::size_t i, bool with_grad) const {
    const std::size_t n = sys_.dim();
    std::vector<double> xf;
    try {
      xf = propagate(sys_, data.x[i], theta, data.t[i], data.t[i + 1], opt_).terminal;
    } catch (const NumericalError& e) {
      throw NumericalError("segment " + std::to_string(i) + ": forward integration failed: " + e.what());
    }
    SegmentOut out;
    std::vector<double> z(xf);
    for (std::size_t j = 0; j < n; ++j) {
      const double r = xf[j] - data.x[i + 1][j];
      out.loss += r * r;
      z.push_back(2.0 * r);
    }
    if (!with_grad) {
      return out;
    }
    z.resize(2 * n + trainable_.size(), 0.0);
    try {
      z = propagate(adjoint_, std::move(z), theta, data.t[i + 1], data.t[i], opt_).terminal;
    } catch (const NumericalError& e) {
      throw NumericalError("segment " + std::to_string(i) + ": backward adjoint integration failed: " + e.what());
    }
    out.grad.assign(z.begin() + static_cast<std::ptrdiff_t>(2 * n), z.end());
    return out;
  }

  LossGrad run(const std::vector<double>& theta, const Dataset& data, std::vector<std::size_t> segs,
               bool with_grad) const {
    data.validate(sys_.dim());
    if (theta.size() != sys_.n_params()) {
      throw DimensionError("expected " + std::to_string(sys_.n_params()) + " parameters, got " +
                           std::to_string(theta.size()));
    }
    if (segs.empty()) {
      for (std::size_t i = 0; i < data.segments(); ++i) {
        segs.push_back(i);
      }
    }
    std::vector<SegmentOut> outs(segs.size());
    std::vector<std::exception_ptr> errors(segs.size());
    auto work = [&](std::size_t w) {
      for (std::size_t s = w; s < segs.size(); s += threads_) {
        try {
          outs[s] = segment(theta, data, segs[s], with_grad);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      }
    };
    const std::size_t nt = std::min(threads_, segs.size());
    if (nt <= 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < nt; ++w) {
        pool.emplace_back(work, w);
      }
      for (auto& th : pool) {
        th.join();
      }
    }
    for (const auto& e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }
    LossGrad r;
    r.grad.assign(trainable_.size(), 0.0);
    const double inv = 1.0 / static_cast<double>(segs.size());
    for (const auto& o : outs) {
      r.loss += o.loss * inv;
      for (std::size_t k = 0; k < o.grad.size(); ++k) {
        r.grad[k] += o.grad[k] * inv;
      }
    }
    return r;
  }

  OdeSystem sys_;
  std::vector<std::size_t> trainable_;
  OdeSystem adjoint_;
  TaylorOptions opt_;
  std::size_t threads_;
};

}  // namespace ettkit
