/**
 * @file siren.hpp
 * @brief Sine-activated feed-forward networks with built-in input normalisation.
 *
 * Phi(x) = W_n (phi_{n-1} o ... o phi_0)(z) + b_n,  phi_i(h) = sin(omega0 W_i h + b_i),
 * where z = 2 (x - min) / (max - min) - 1 maps each input's bounds onto [-1, 1].
 *
 * Initialisation draws layer l, entry r * fan_in + c from
 * CounterRng(seed, l).uniform(r * fan_in + c, -bound, bound).
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ettkit/error.hpp"
#include "ettkit/polyalg/elementary.hpp"
#include "ettkit/rng.hpp"
#include "ettkit/scalar.hpp"
#include "ettkit/symexpr/expr_graph.hpp"

namespace ettkit {

struct SirenLayer {
  std::size_t rows = 0;  ///< fan-out
  std::size_t cols = 0;  ///< fan-in
  std::vector<double> W;  ///< row-major rows x cols
  std::vector<double> b;

  [[nodiscard]] double w(std::size_t r, std::size_t c) const { return W[r * cols + c]; }
};

class SirenNet {
 public:
  SirenNet() = default;

  SirenNet(std::vector<std::size_t> sizes, double omega0, std::vector<double> lo, std::vector<double> hi,
           std::vector<SirenLayer> layers)
      : sizes_(std::move(sizes)), omega0_(omega0), lo_(std::move(lo)), hi_(std::move(hi)), layers_(std::move(layers)) {
    validate();
  }

  /// Zero weights and biases of the given shape.
  [[nodiscard]] static SirenNet zeros(std::vector<std::size_t> sizes, double omega0, std::vector<double> lo,
                                      std::vector<double> hi) {
    check_sizes(sizes);
    std::vector<SirenLayer> layers;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      layers.push_back({sizes[l + 1], sizes[l], std::vector<double>(sizes[l + 1] * sizes[l], 0.0),
                        std::vector<double>(sizes[l + 1], 0.0)});
    }
    return SirenNet(std::move(sizes), omega0, std::move(lo), std::move(hi), std::move(layers));
  }

  [[nodiscard]] std::size_t n_in() const noexcept { return sizes_.front(); }
  [[nodiscard]] std::size_t n_out() const noexcept { return sizes_.back(); }
  [[nodiscard]] const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  [[nodiscard]] double omega0() const noexcept { return omega0_; }
  [[nodiscard]] const std::vector<double>& bounds_min() const noexcept { return lo_; }
  [[nodiscard]] const std::vector<double>& bounds_max() const noexcept { return hi_; }
  [[nodiscard]] const std::vector<SirenLayer>& layers() const noexcept { return layers_; }

  /// Normalisation z_i = scale_i x_i + shift_i.
  [[nodiscard]] double input_scale(std::size_t i) const { return 2.0 / (hi_[i] - lo_[i]); }
  [[nodiscard]] double input_shift(std::size_t i) const { return -1.0 - input_scale(i) * lo_[i]; }

  [[nodiscard]] std::size_t n_params() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) {
      n += l.W.size() + l.b.size();
    }
    return n;
  }

  /// Flat parameters: per layer, W row-major then b.
  [[nodiscard]] std::vector<double> params() const {
    std::vector<double> p;
    p.reserve(n_params());
    for (const auto& l : layers_) {
      p.insert(p.end(), l.W.begin(), l.W.end());
      p.insert(p.end(), l.b.begin(), l.b.end());
    }
    return p;
  }

  void set_params(std::span<const double> p) {
    if (p.size() != n_params()) {
      throw DimensionError("SIREN parameter vector has " + std::to_string(p.size()) + " entries, expected " +
                           std::to_string(n_params()));
    }
    std::size_t k = 0;
    for (auto& l : layers_) {
      for (auto& w : l.W) {
        w = p[k++];
      }
      for (auto& b : l.b) {
        b = p[k++];
      }
    }
  }

  /// Throws ConfigError naming the offending layer or field.
  void validate() const {
    check_sizes(sizes_);
    if (!(omega0_ > 0.0) || !std::isfinite(omega0_)) {
      throw ConfigError("SIREN omega0 must be positive and finite");
    }
    if (lo_.size() != n_in() || hi_.size() != n_in()) {
      throw ConfigError("SIREN bounds: expected " + std::to_string(n_in()) + " entries in min and max");
    }
    for (std::size_t i = 0; i < n_in(); ++i) {
      if (!(hi_[i] > lo_[i]) || !std::isfinite(hi_[i] - lo_[i])) {
        throw ConfigError("SIREN bounds: input " + std::to_string(i) + " needs finite min < max");
      }
    }
    if (layers_.size() + 1 != sizes_.size()) {
      throw ConfigError("SIREN layers: expected " + std::to_string(sizes_.size() - 1) + " layers, got " +
                        std::to_string(layers_.size()));
    }
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& L = layers_[l];
      const std::string at = "SIREN layer " + std::to_string(l);
      if (L.rows != sizes_[l + 1] || L.cols != sizes_[l] || L.W.size() != L.rows * L.cols) {
        throw ConfigError(at + ": W must be " + std::to_string(sizes_[l + 1]) + "x" + std::to_string(sizes_[l]));
      }
      if (L.b.size() != L.rows) {
        throw ConfigError(at + ": b must have " + std::to_string(sizes_[l + 1]) + " entries");
      }
      for (double v : L.W) {
        if (!std::isfinite(v)) throw ConfigError(at + ": non-finite weight");
      }
      for (double v : L.b) {
        if (!std::isfinite(v)) throw ConfigError(at + ": non-finite bias");
      }
    }
  }

  /// Forward pass over double or TruncatedPoly inputs.
  template <class S>
  [[nodiscard]] std::vector<S> forward(std::span<const S> x) const {
    if (x.size() != n_in()) {
      throw DimensionError("SIREN input has " + std::to_string(x.size()) + " entries, expected " +
                           std::to_string(n_in()));
    }
    using T = ScalarTraits<S>;
    std::vector<S> h;
    h.reserve(n_in());
    for (std::size_t i = 0; i < n_in(); ++i) {
      h.push_back(x[i] * input_scale(i) + input_shift(i));
    }
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& L = layers_[l];
      const bool last = l + 1 == layers_.size();
      std::vector<S> next;
      next.reserve(L.rows);
      for (std::size_t r = 0; r < L.rows; ++r) {
        S acc = T::constant(x[0], 0.0);
        for (std::size_t c = 0; c < L.cols; ++c) {
          acc += h[c] * L.w(r, c);
        }
        if (last) {
          next.push_back(acc + L.b[r]);
        } else {
          using std::sin;
          next.push_back(sin(acc * omega0_ + L.b[r]));
        }
      }
      h = std::move(next);
    }
    return h;
  }

  [[nodiscard]] std::vector<double> forward(const std::vector<double>& x) const {
    return forward<double>(std::span<const double>(x));
  }

 private:
  static void check_sizes(const std::vector<std::size_t>& sizes) {
    if (sizes.size() < 2) {
      throw ConfigError("SIREN sizes: need at least input and output sizes");
    }
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (sizes[i] == 0) {
        throw ConfigError("SIREN sizes[" + std::to_string(i) + "] must be positive");
      }
    }
  }

  std::vector<std::size_t> sizes_;
  double omega0_ = 30.0;
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<SirenLayer> layers_;
};

/// Uniform bound of layer l with fan-in n.
[[nodiscard]] inline double siren_init_bound(std::size_t layer, std::size_t fan_in, double omega0) {
  const auto n = static_cast<double>(fan_in);
  return layer == 0 ? 1.0 / n : std::sqrt(6.0 / n) / omega0;
}

[[nodiscard]] inline SirenNet siren_init(std::vector<std::size_t> sizes, double omega0, std::vector<double> lo,
                                         std::vector<double> hi, std::uint64_t seed) {
  SirenNet net = SirenNet::zeros(std::move(sizes), omega0, std::move(lo), std::move(hi));
  std::vector<double> p;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const auto& L = net.layers()[l];
    const double bound = siren_init_bound(l, L.cols, omega0);
    const CounterRng rng(seed, l);
    for (std::size_t k = 0; k < L.W.size(); ++k) {
      p.push_back(rng.uniform(k, -bound, bound));
    }
    p.insert(p.end(), L.b.size(), 0.0);
  }
  net.set_params(p);
  return net;
}

/**
 * Emits the network into g applied to `inputs`.  With param_offset set, weight
 * k of the flat parameter vector becomes g.param(*param_offset + k) so the
 * graph can be differentiated with respect to it; otherwise weights are
 * constants and zero weights fold away.
 */
[[nodiscard]] inline std::vector<Expr> emit_siren(ExprGraph& g, const SirenNet& net, std::span<const Expr> inputs,
                                                  std::optional<std::size_t> param_offset = std::nullopt) {
  if (inputs.size() != net.n_in()) {
    throw DimensionError("SIREN graph input has " + std::to_string(inputs.size()) + " entries, expected " +
                         std::to_string(net.n_in()));
  }
  std::size_t k = 0;
  auto weight = [&](double v) { return param_offset ? g.param(*param_offset + k++) : g.constant(v); };
  std::vector<Expr> h;
  for (std::size_t i = 0; i < net.n_in(); ++i) {
    h.push_back(inputs[i] * net.input_scale(i) + net.input_shift(i));
  }
  const double w0 = net.omega0();
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const auto& L = net.layers()[l];
    const bool last = l + 1 == net.layers().size();
    std::vector<Expr> wx;
    for (std::size_t r = 0; r < L.rows; ++r) {
      Expr acc = g.constant(0.0);
      for (std::size_t c = 0; c < L.cols; ++c) {
        acc = acc + weight(L.w(r, c)) * h[c];
      }
      wx.push_back(acc);
    }
    std::vector<Expr> next;
    for (std::size_t r = 0; r < L.rows; ++r) {
      const Expr b = weight(L.b[r]);
      next.push_back(last ? wx[r] + b : sin(wx[r] * w0 + b));
    }
    h = std::move(next);
  }
  return h;
}

/// Standalone graph over the net inputs; roots are the outputs.
[[nodiscard]] inline ExprGraph to_expr_graph(const SirenNet& net) {
  ExprGraph g(net.n_in(), 0);
  std::vector<Expr> in;
  for (std::size_t i = 0; i < net.n_in(); ++i) {
    in.push_back(g.var(i));
  }
  const auto out = emit_siren(g, net, in);
  std::vector<NodeId> roots;
  for (const auto& e : out) {
    roots.push_back(e.id());
  }
  g.set_roots(roots);
  return g;
}

}  // namespace ettkit
