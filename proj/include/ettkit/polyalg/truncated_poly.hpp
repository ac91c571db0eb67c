/**
 * @file truncated_poly.hpp
 * @brief Dense truncated multivariate Taylor polynomials (the differential algebra).
 *
 * Coefficients are stored in Taylor convention, i.e. the coefficient of
 * delta^alpha is (1/alpha!) d^alpha f, so evaluation is a plain monomial sum.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ettkit/error.hpp"
#include "ettkit/polyalg/monomial_basis.hpp"

namespace ettkit {

class TruncatedPoly {
 public:
  /// Placeholder without a variable space; only valid as an assignment target.
  TruncatedPoly() = default;

  TruncatedPoly(std::size_t nvars, std::size_t order)
      : basis_(MonomialBasis::get(nvars, order)), coeffs_(basis_->size(), 0.0) {
    if (order < 1) {
      throw DimensionError("truncation order must be at least 1");
    }
  }

  [[nodiscard]] static TruncatedPoly zero(std::size_t nvars, std::size_t order) { return {nvars, order}; }

  [[nodiscard]] static TruncatedPoly constant(std::size_t nvars, std::size_t order, double c) {
    TruncatedPoly p(nvars, order);
    p.coeffs_[0] = c;
    return p;
  }

  /// center + delta_var
  [[nodiscard]] static TruncatedPoly variable(std::size_t nvars, std::size_t order, std::size_t var,
                                              double center = 0.0) {
    if (var >= nvars) {
      throw DimensionError("variable index " + std::to_string(var) + " out of range");
    }
    TruncatedPoly p(nvars, order);
    p.coeffs_[0] = center;
    p.coeffs_[1 + var] = 1.0;
    return p;
  }

  [[nodiscard]] static TruncatedPoly from_coeffs(std::size_t nvars, std::size_t order, std::vector<double> coeffs) {
    TruncatedPoly p(nvars, order);
    if (coeffs.size() != p.coeffs_.size()) {
      throw DimensionError("expected " + std::to_string(p.coeffs_.size()) + " coefficients, got " +
                           std::to_string(coeffs.size()));
    }
    p.coeffs_ = std::move(coeffs);
    return p;
  }

  /// Same variable space and order as `like`, holding the constant c.
  [[nodiscard]] static TruncatedPoly constant_like(const TruncatedPoly& like, double c) {
    like.require_valid();
    TruncatedPoly p;
    p.basis_ = like.basis_;
    p.coeffs_.assign(like.coeffs_.size(), 0.0);
    p.coeffs_[0] = c;
    return p;
  }

  [[nodiscard]] bool valid() const noexcept { return basis_ != nullptr; }
  [[nodiscard]] std::size_t nvars() const noexcept { return basis_ ? basis_->nvars() : 0; }
  [[nodiscard]] std::size_t order() const noexcept { return basis_ ? basis_->order() : 0; }
  [[nodiscard]] std::size_t size() const noexcept { return coeffs_.size(); }
  [[nodiscard]] const MonomialBasis& basis() const { return *basis_; }

  [[nodiscard]] std::span<const double> coeffs() const noexcept { return coeffs_; }
  [[nodiscard]] std::span<double> coeffs() noexcept { return coeffs_; }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return coeffs_[i]; }
  [[nodiscard]] double& operator[](std::size_t i) noexcept { return coeffs_[i]; }

  [[nodiscard]] double constant_term() const noexcept { return coeffs_.empty() ? 0.0 : coeffs_[0]; }

  /// Coefficient of the monomial with exponents `exps` (0 if its degree exceeds the order).
  template <class Int>
  [[nodiscard]] double coeff(std::span<const Int> exps) const {
    require_valid();
    if (exps.size() != nvars()) {
      throw DimensionError("exponent vector length does not match variable count");
    }
    std::size_t d = 0;
    for (auto e : exps) {
      d += static_cast<std::size_t>(e);
    }
    return d > order() ? 0.0 : coeffs_[basis_->rank(exps)];
  }
  [[nodiscard]] double coeff(std::initializer_list<int> exps) const {
    return coeff(std::span<const int>(exps.begin(), exps.size()));
  }

  /// Coefficient of delta_var.
  [[nodiscard]] double linear_coeff(std::size_t var) const noexcept { return coeffs_[1 + var]; }

  /// Largest absolute coefficient.
  [[nodiscard]] double max_abs() const noexcept {
    double m = 0.0;
    for (double c : coeffs_) {
      m = std::max(m, std::abs(c));
    }
    return m;
  }

  [[nodiscard]] bool is_constant() const noexcept {
    return std::all_of(coeffs_.begin() + (coeffs_.empty() ? 0 : 1), coeffs_.end(), [](double c) { return c == 0.0; });
  }

  /// Copy re-expressed at another order (extended with zeros or truncated).
  [[nodiscard]] TruncatedPoly with_order(std::size_t new_order) const {
    require_valid();
    TruncatedPoly p(nvars(), new_order);
    const std::size_t n = std::min(p.size(), size());
    std::copy_n(coeffs_.begin(), n, p.coeffs_.begin());
    return p;
  }

  /// The part of degree >= 2.
  [[nodiscard]] TruncatedPoly nonlinear_part() const {
    TruncatedPoly p = *this;
    std::fill_n(p.coeffs_.begin(), std::min(p.size(), 1 + nvars()), 0.0);
    return p;
  }

  /// The part of degree >= 1.
  [[nodiscard]] TruncatedPoly nilpotent_part() const {
    TruncatedPoly p = *this;
    p.coeffs_[0] = 0.0;
    return p;
  }

  [[nodiscard]] double evaluate(std::span<const double> point) const {
    require_valid();
    if (point.size() != nvars()) {
      throw DimensionError("evaluation point has " + std::to_string(point.size()) + " entries, expected " +
                           std::to_string(nvars()));
    }
    const auto& b = *basis_;
    std::vector<double> mono(size());
    mono[0] = 1.0;
    double acc = coeffs_[0];
    for (std::size_t i = 1; i < size(); ++i) {
      mono[i] = mono[b.parent(i)] * point[b.parent_var(i)];
      acc += coeffs_[i] * mono[i];
    }
    return acc;
  }

  /// Formal partial derivative; the result keeps the same order (top degree zero).
  [[nodiscard]] TruncatedPoly partial(std::size_t var) const {
    require_valid();
    if (var >= nvars()) {
      throw DimensionError("partial: variable index out of range");
    }
    TruncatedPoly out = constant_like(*this, 0.0);
    std::vector<unsigned> e(nvars());
    for (std::size_t i = 1; i < size(); ++i) {
      auto ex = basis_->exponents(i);
      if (ex[var] == 0 || coeffs_[i] == 0.0) {
        continue;
      }
      e.assign(ex.begin(), ex.end());
      --e[var];
      out.coeffs_[basis_->rank(std::span<const unsigned>(e))] += ex[var] * coeffs_[i];
    }
    return out;
  }

  TruncatedPoly& operator+=(const TruncatedPoly& o) {
    require_same_space(o);
    for (std::size_t i = 0; i < size(); ++i) {
      coeffs_[i] += o.coeffs_[i];
    }
    return *this;
  }
  TruncatedPoly& operator-=(const TruncatedPoly& o) {
    require_same_space(o);
    for (std::size_t i = 0; i < size(); ++i) {
      coeffs_[i] -= o.coeffs_[i];
    }
    return *this;
  }
  TruncatedPoly& operator+=(double c) {
    require_valid();
    coeffs_[0] += c;
    return *this;
  }
  TruncatedPoly& operator-=(double c) {
    require_valid();
    coeffs_[0] -= c;
    return *this;
  }
  TruncatedPoly& operator*=(double c) noexcept {
    for (double& v : coeffs_) {
      v *= c;
    }
    return *this;
  }
  TruncatedPoly& operator/=(double c) noexcept {
    for (double& v : coeffs_) {
      v /= c;
    }
    return *this;
  }
  TruncatedPoly& operator*=(const TruncatedPoly& o);
  TruncatedPoly& operator/=(const TruncatedPoly& o);

  [[nodiscard]] TruncatedPoly operator-() const {
    TruncatedPoly p = *this;
    p *= -1.0;
    return p;
  }

  /// Arithmetic is only defined between polys of identical nvars and order.
  void require_same_space(const TruncatedPoly& o) const {
    require_valid();
    o.require_valid();
    if (basis_ != o.basis_) {
      throw DimensionError("polynomial space mismatch: (nvars " + std::to_string(nvars()) + ", order " +
                           std::to_string(order()) + ") vs (nvars " + std::to_string(o.nvars()) + ", order " +
                           std::to_string(o.order()) + ")");
    }
  }

  void require_valid() const {
    if (!basis_) {
      throw DimensionError("operation on an uninitialised polynomial");
    }
  }

 private:
  std::shared_ptr<const MonomialBasis> basis_;
  std::vector<double> coeffs_;
};

/// Product truncated at `out_order`; exact when out_order >= order(a) + order(b).
[[nodiscard]] inline TruncatedPoly mul(const TruncatedPoly& a, const TruncatedPoly& b, std::size_t out_order) {
  a.require_valid();
  b.require_valid();
  if (a.nvars() != b.nvars()) {
    throw DimensionError("mul: variable count mismatch");
  }
  TruncatedPoly out(a.nvars(), out_order);
  const auto& basis = out.basis();
  const std::size_t na = std::min(a.size(), out.size());
  const std::size_t nb = std::min(b.size(), out.size());
  auto ca = a.coeffs();
  auto cb = b.coeffs();
  auto co = out.coeffs();
  for (std::size_t i = 0; i < na; ++i) {
    const double ai = ca[i];
    if (ai == 0.0) {
      continue;
    }
    auto row = basis.product_row(i);
    const std::size_t len = std::min(row.size(), nb);
    for (std::size_t j = 0; j < len; ++j) {
      co[row[j]] += ai * cb[j];
    }
  }
  return out;
}

inline TruncatedPoly& TruncatedPoly::operator*=(const TruncatedPoly& o) {
  require_same_space(o);
  *this = mul(*this, o, order());
  return *this;
}

[[nodiscard]] inline TruncatedPoly operator+(TruncatedPoly a, const TruncatedPoly& b) { return a += b; }
[[nodiscard]] inline TruncatedPoly operator-(TruncatedPoly a, const TruncatedPoly& b) { return a -= b; }
[[nodiscard]] inline TruncatedPoly operator*(const TruncatedPoly& a, const TruncatedPoly& b) {
  a.require_same_space(b);
  return mul(a, b, a.order());
}
[[nodiscard]] inline TruncatedPoly operator+(TruncatedPoly a, double c) { return a += c; }
[[nodiscard]] inline TruncatedPoly operator+(double c, TruncatedPoly a) { return a += c; }
[[nodiscard]] inline TruncatedPoly operator-(TruncatedPoly a, double c) { return a -= c; }
[[nodiscard]] inline TruncatedPoly operator-(double c, const TruncatedPoly& a) { return (-a) += c; }
[[nodiscard]] inline TruncatedPoly operator*(TruncatedPoly a, double c) { return a *= c; }
[[nodiscard]] inline TruncatedPoly operator*(double c, TruncatedPoly a) { return a *= c; }
[[nodiscard]] inline TruncatedPoly operator/(TruncatedPoly a, double c) { return a /= c; }

}  // namespace ettkit
