/**
 * @file poly_map.hpp
 * @brief Vectors of truncated polynomials: composition and exact map inversion.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ettkit/error.hpp"
#include "ettkit/polyalg/elementary.hpp"
#include "ettkit/polyalg/truncated_poly.hpp"

namespace ettkit {

/// Relative threshold below which a linear coefficient counts as zero when swapping variables.
inline constexpr double kTransversalityTol = 1e-10;

class PolyMap {
 public:
  PolyMap() = default;

  explicit PolyMap(std::vector<TruncatedPoly> outputs, std::vector<std::string> labels = {})
      : outputs_(std::move(outputs)), labels_(std::move(labels)) {
    if (outputs_.empty()) {
      throw DimensionError("PolyMap needs at least one output");
    }
    for (const auto& p : outputs_) {
      outputs_.front().require_same_space(p);
    }
    if (labels_.empty()) {
      for (std::size_t i = 0; i < outputs_.size(); ++i) {
        labels_.push_back("y" + std::to_string(i));
      }
    } else if (labels_.size() != outputs_.size()) {
      throw DimensionError("PolyMap label count does not match output count");
    }
  }

  /// (delta_0, ..., delta_{nvars-1})
  [[nodiscard]] static PolyMap identity(std::size_t nvars, std::size_t order) {
    std::vector<TruncatedPoly> out;
    out.reserve(nvars);
    for (std::size_t i = 0; i < nvars; ++i) {
      out.push_back(TruncatedPoly::variable(nvars, order, i));
    }
    return PolyMap(std::move(out));
  }

  [[nodiscard]] std::size_t size() const noexcept { return outputs_.size(); }
  [[nodiscard]] std::size_t nvars() const noexcept { return outputs_.empty() ? 0 : outputs_.front().nvars(); }
  [[nodiscard]] std::size_t order() const noexcept { return outputs_.empty() ? 0 : outputs_.front().order(); }

  [[nodiscard]] const TruncatedPoly& operator[](std::size_t i) const { return outputs_[i]; }
  [[nodiscard]] TruncatedPoly& operator[](std::size_t i) { return outputs_[i]; }
  [[nodiscard]] const std::vector<TruncatedPoly>& outputs() const noexcept { return outputs_; }
  [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }

  [[nodiscard]] std::vector<double> constants() const {
    std::vector<double> c;
    c.reserve(size());
    for (const auto& p : outputs_) {
      c.push_back(p.constant_term());
    }
    return c;
  }

  /// Linear part as a (outputs x nvars) matrix.
  [[nodiscard]] Eigen::MatrixXd jacobian() const {
    Eigen::MatrixXd j(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(nvars()));
    for (std::size_t r = 0; r < size(); ++r) {
      for (std::size_t c = 0; c < nvars(); ++c) {
        j(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = outputs_[r].linear_coeff(c);
      }
    }
    return j;
  }

  [[nodiscard]] std::vector<double> evaluate(std::span<const double> point) const {
    std::vector<double> v;
    v.reserve(size());
    for (const auto& p : outputs_) {
      v.push_back(p.evaluate(point));
    }
    return v;
  }

  [[nodiscard]] PolyMap with_order(std::size_t order) const {
    std::vector<TruncatedPoly> out;
    out.reserve(size());
    for (const auto& p : outputs_) {
      out.push_back(p.with_order(order));
    }
    return PolyMap(std::move(out), labels_);
  }

 private:
  std::vector<TruncatedPoly> outputs_;
  std::vector<std::string> labels_;
};

namespace detail {

/// Values of every monomial of an (nin-variable, order) basis with variables replaced by `inner`.
[[nodiscard]] inline std::vector<TruncatedPoly> substituted_monomials(std::size_t nin, std::size_t order,
                                                                      const PolyMap& inner) {
  if (inner.size() != nin) {
    throw DimensionError("compose: outer polynomial has " + std::to_string(nin) + " variables but inner map has " +
                         std::to_string(inner.size()) + " outputs");
  }
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (inner[i].constant_term() != 0.0) {
      throw DimensionError("compose: inner map output " + std::to_string(i) + " has a nonzero constant term");
    }
  }
  const auto basis = MonomialBasis::get(nin, order);
  std::vector<TruncatedPoly> vars;
  vars.reserve(nin);
  for (std::size_t i = 0; i < nin; ++i) {
    vars.push_back(inner[i].with_order(order));
  }
  std::vector<TruncatedPoly> mono;
  mono.reserve(basis->size());
  mono.push_back(TruncatedPoly::constant(inner.nvars(), order, 1.0));
  for (std::size_t i = 1; i < basis->size(); ++i) {
    mono.push_back(mono[basis->parent(i)] * vars[basis->parent_var(i)]);
  }
  return mono;
}

[[nodiscard]] inline TruncatedPoly contract(const TruncatedPoly& outer, const std::vector<TruncatedPoly>& mono) {
  TruncatedPoly r = TruncatedPoly::constant_like(mono.front(), 0.0);
  auto rc = r.coeffs();
  for (std::size_t i = 0; i < outer.size(); ++i) {
    const double c = outer[i];
    if (c == 0.0) {
      continue;
    }
    auto mc = mono[i].coeffs();
    for (std::size_t j = 0; j < rc.size(); ++j) {
      rc[j] += c * mc[j];
    }
  }
  return r;
}

}  // namespace detail

/// outer(inner(delta)) truncated at outer's order; inner outputs must be pure deviations.
[[nodiscard]] inline TruncatedPoly compose(const TruncatedPoly& outer, const PolyMap& inner) {
  outer.require_valid();
  const auto mono = detail::substituted_monomials(outer.nvars(), outer.order(), inner);
  return detail::contract(outer, mono);
}

/// Component-wise composition sharing the substituted monomials.
[[nodiscard]] inline PolyMap compose(const PolyMap& outer, const PolyMap& inner) {
  const auto mono = detail::substituted_monomials(outer.nvars(), outer.order(), inner);
  std::vector<TruncatedPoly> out;
  out.reserve(outer.size());
  for (const auto& p : outer.outputs()) {
    out.push_back(detail::contract(p, mono));
  }
  return PolyMap(std::move(out), outer.labels());
}

/**
 * Inverse of a square map with zero constant part and invertible linear part L.
 *
 * Fixed-point iteration q <- L^{-1} (I - N(q)) with N the nonlinear part,
 * run once per order so the result is exact at the truncation order.
 */
[[nodiscard]] inline PolyMap invert_map(const PolyMap& m) {
  const std::size_t n = m.size();
  if (m.nvars() != n) {
    throw DimensionError("invert_map: map must be square (" + std::to_string(n) + " outputs, " +
                         std::to_string(m.nvars()) + " variables)");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (m[i].constant_term() != 0.0) {
      throw DimensionError("invert_map: output " + std::to_string(i) + " has a nonzero constant term");
    }
  }
  const Eigen::MatrixXd lin = m.jacobian();
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(lin);
  const Eigen::PartialPivLU<Eigen::MatrixXd> plu(lin);
  const double rcond = lu.isInvertible() ? plu.rcond() : 0.0;
  if (!(rcond > 1e-14)) {
    std::ostringstream msg;
    msg << "invert_map: singular linear part (reciprocal condition estimate " << rcond << ")";
    throw NumericalError(msg.str());
  }
  const Eigen::MatrixXd linv = lu.inverse();
  const std::size_t order = m.order();

  std::vector<TruncatedPoly> nonlinear;
  nonlinear.reserve(n);
  for (const auto& p : m.outputs()) {
    nonlinear.push_back(p.nonlinear_part());
  }
  const PolyMap nmap(std::move(nonlinear));
  const PolyMap id = PolyMap::identity(n, order);

  auto apply_linv = [&](const std::vector<TruncatedPoly>& r) {
    std::vector<TruncatedPoly> q;
    q.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      TruncatedPoly acc = TruncatedPoly::zero(n, order);
      for (std::size_t j = 0; j < n; ++j) {
        const double c = linv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (c != 0.0) {
          acc += c * r[j];
        }
      }
      q.push_back(std::move(acc));
    }
    return PolyMap(std::move(q));
  };

  PolyMap q = apply_linv(id.outputs());
  for (std::size_t it = 0; it < order; ++it) {
    const PolyMap nq = compose(nmap, q);
    std::vector<TruncatedPoly> r;
    r.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      r.push_back(id[j] - nq[j]);
    }
    q = apply_linv(r);
  }
  return q;
}

/**
 * Exchanges the roles of input variable `swap_in` and output `swap_out`.
 *
 * The result has the shape of `m`: output `swap_out` becomes the former input
 * `swap_in` expressed in terms of the other inputs and the deviation of the
 * former output from its constant part, which now occupies slot `swap_in`.
 * Every other output is re-expressed in the new variables.
 */
[[nodiscard]] inline PolyMap partial_invert(const PolyMap& m, std::size_t swap_in, std::size_t swap_out) {
  const std::size_t nv = m.nvars();
  if (swap_in >= nv || swap_out >= m.size()) {
    throw DimensionError("partial_invert: swap indices out of range");
  }
  const TruncatedPoly& target = m[swap_out];
  double max_lin = 0.0;
  for (std::size_t v = 0; v < nv; ++v) {
    max_lin = std::max(max_lin, std::abs(target.linear_coeff(v)));
  }
  const double pivot = target.linear_coeff(swap_in);
  if (std::abs(pivot) < kTransversalityTol * std::max(max_lin, 1.0)) {
    std::ostringstream msg;
    msg << "partial_invert: transversality failure, linear coefficient of variable " << swap_in << " in output "
        << swap_out << " is " << pivot;
    throw EventError(msg.str());
  }
  std::vector<TruncatedPoly> aug;
  aug.reserve(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    if (v == swap_in) {
      aug.push_back(target.nilpotent_part());
    } else {
      aug.push_back(TruncatedPoly::variable(nv, m.order(), v));
    }
  }
  const PolyMap inv = invert_map(PolyMap(std::move(aug)));
  std::vector<TruncatedPoly> out;
  out.reserve(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) {
    out.push_back(j == swap_out ? inv[swap_in] : compose(m[j], inv));
  }
  return PolyMap(std::move(out), m.labels());
}

}  // namespace ettkit
