/**
 * @file monomial_basis.hpp
 * @brief Graded-lexicographic monomial enumeration, ranking and product tables.
 *
 * Monomials in `nvars` variables of total degree <= `order` are listed by
 * ascending degree; inside one degree they follow descending lexicographic
 * order of the exponent vector, so x0 precedes x1 and x0^2 precedes x0*x1.
 * Because the listing for a lower order is a prefix of the listing for a
 * higher order, coefficient vectors of different orders share ranks.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ettkit/error.hpp"

namespace ettkit {

using Exponent = std::uint8_t;

/// Largest supported total degree (exponents are stored as bytes).
inline constexpr std::size_t kMaxPolyOrder = 255;

/// Binomial coefficient C(n, k) in 64-bit arithmetic (exact while it fits).
[[nodiscard]] constexpr std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
  if (k > n) {
    return 0;
  }
  if (k > n - k) {
    k = n - k;
  }
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

/// Number of monomials in `nvars` variables with total degree <= `order`.
[[nodiscard]] constexpr std::size_t monomial_count(std::size_t nvars, std::size_t order) noexcept {
  return static_cast<std::size_t>(binomial(nvars + order, order));
}

class MonomialBasis {
 public:
  /// Shared, lazily created basis for (nvars, order). Thread safe.
  [[nodiscard]] static std::shared_ptr<const MonomialBasis> get(std::size_t nvars, std::size_t order) {
    if (nvars == 0) {
      throw DimensionError("monomial basis needs at least one variable");
    }
    if (order > kMaxPolyOrder) {
      throw DimensionError("polynomial order " + std::to_string(order) + " exceeds the supported maximum");
    }
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const MonomialBasis>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{nvars, order}];
    if (!slot) {
      slot = std::shared_ptr<const MonomialBasis>(new MonomialBasis(nvars, order));
    }
    return slot;
  }

  [[nodiscard]] std::size_t nvars() const noexcept { return nvars_; }
  [[nodiscard]] std::size_t order() const noexcept { return order_; }
  [[nodiscard]] std::size_t size() const noexcept { return degree_.size(); }

  [[nodiscard]] std::span<const Exponent> exponents(std::size_t i) const noexcept {
    return {exps_.data() + i * nvars_, nvars_};
  }
  [[nodiscard]] std::size_t degree(std::size_t i) const noexcept { return degree_[i]; }

  /// Monomial i equals monomial parent(i) times variable parent_var(i) (i > 0).
  [[nodiscard]] std::size_t parent(std::size_t i) const noexcept { return parent_[i]; }
  [[nodiscard]] std::size_t parent_var(std::size_t i) const noexcept { return parent_var_[i]; }

  /// Number of monomials of degree <= d (a prefix of the listing).
  [[nodiscard]] std::size_t count_up_to(std::size_t d) const noexcept { return monomial_count(nvars_, d); }

  /// Rank of an exponent vector; independent of the basis order.
  template <class Int>
  [[nodiscard]] std::size_t rank(std::span<const Int> exps) const noexcept {
    std::size_t d = 0;
    for (auto e : exps) {
      d += static_cast<std::size_t>(e);
    }
    std::size_t r = d == 0 ? 0 : monomial_count(nvars_, d - 1);
    std::size_t rem = d;
    for (std::size_t i = 0; i + 1 < nvars_; ++i) {
      const auto a = static_cast<std::size_t>(exps[i]);
      const std::size_t v = nvars_ - i - 1;
      if (rem > a) {
        r += static_cast<std::size_t>(binomial(rem - a - 1 + v, v));
      }
      rem -= a;
    }
    return r;
  }

  /// Index of monomial(i) * monomial(j); requires degree(i) + degree(j) <= order().
  [[nodiscard]] std::size_t product_index(std::size_t i, std::size_t j) const {
    ensure_products();
    return products_[row_offset_[i] + j];
  }

  /// Product indices of monomial i with every monomial j < count_up_to(order - degree(i)).
  [[nodiscard]] std::span<const std::uint32_t> product_row(std::size_t i) const {
    ensure_products();
    return {products_.data() + row_offset_[i], row_offset_[i + 1] - row_offset_[i]};
  }

  /// Multi-index factorial alpha! of monomial i.
  [[nodiscard]] double factorial(std::size_t i) const noexcept {
    double f = 1.0;
    for (auto e : exponents(i)) {
      for (unsigned k = 2; k <= e; ++k) {
        f *= k;
      }
    }
    return f;
  }

 private:
  MonomialBasis(std::size_t nvars, std::size_t order) : nvars_(nvars), order_(order) {
    const std::size_t n = monomial_count(nvars, order);
    exps_.reserve(n * nvars);
    degree_.reserve(n);
    std::vector<Exponent> cur(nvars, 0);
    for (std::size_t d = 0; d <= order; ++d) {
      enumerate(cur, 0, d, d);
    }
    parent_.assign(n, 0);
    parent_var_.assign(n, 0);
    std::vector<Exponent> tmp(nvars);
    for (std::size_t i = 1; i < n; ++i) {
      auto e = exponents(i);
      std::size_t v = 0;
      while (e[v] == 0) {
        ++v;
      }
      tmp.assign(e.begin(), e.end());
      --tmp[v];
      parent_[i] = rank(std::span<const Exponent>(tmp));
      parent_var_[i] = v;
    }
  }

  void enumerate(std::vector<Exponent>& cur, std::size_t pos, std::size_t rem, std::size_t d) {
    if (pos + 1 == nvars_) {
      cur[pos] = static_cast<Exponent>(rem);
      exps_.insert(exps_.end(), cur.begin(), cur.end());
      degree_.push_back(d);
      return;
    }
    for (std::size_t e = rem + 1; e-- > 0;) {
      cur[pos] = static_cast<Exponent>(e);
      enumerate(cur, pos + 1, rem - e, d);
    }
    cur[pos] = 0;
  }

  void ensure_products() const {
    std::call_once(products_once_, [this] {
      const std::size_t n = size();
      row_offset_.assign(n + 1, 0);
      for (std::size_t i = 0; i < n; ++i) {
        row_offset_[i + 1] = row_offset_[i] + count_up_to(order_ - degree_[i]);
      }
      products_.resize(row_offset_[n]);
      std::vector<unsigned> sum(nvars_);
      for (std::size_t i = 0; i < n; ++i) {
        auto ei = exponents(i);
        const std::size_t len = row_offset_[i + 1] - row_offset_[i];
        for (std::size_t j = 0; j < len; ++j) {
          auto ej = exponents(j);
          for (std::size_t v = 0; v < nvars_; ++v) {
            sum[v] = static_cast<unsigned>(ei[v]) + ej[v];
          }
          products_[row_offset_[i] + j] = static_cast<std::uint32_t>(rank(std::span<const unsigned>(sum)));
        }
      }
    });
  }

  std::size_t nvars_;
  std::size_t order_;
  std::vector<Exponent> exps_;
  std::vector<std::size_t> degree_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> parent_var_;

  mutable std::once_flag products_once_;
  mutable std::vector<std::size_t> row_offset_;
  mutable std::vector<std::uint32_t> products_;
};

}  // namespace ettkit
