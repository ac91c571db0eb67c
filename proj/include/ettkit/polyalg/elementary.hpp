/**
 * @file elementary.hpp
 * @brief Elementary functions over truncated polynomials.
 *
 * For p = c + n with n nilpotent at order k, f(p) = sum_j f^(j)(c)/j! n^j,
 * evaluated by Horner's scheme in n.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ettkit/error.hpp"
#include "ettkit/polyalg/truncated_poly.hpp"

namespace ettkit {

namespace detail {

/// sum_j taylor[j] * n^j where n = p - p(0).
[[nodiscard]] inline TruncatedPoly apply_series(const TruncatedPoly& p, const std::vector<double>& taylor) {
  const TruncatedPoly n = p.nilpotent_part();
  TruncatedPoly r = TruncatedPoly::constant_like(p, taylor.back());
  for (std::size_t j = taylor.size() - 1; j-- > 0;) {
    r = r * n;
    r += taylor[j];
  }
  return r;
}

inline void require_positive_constant(const TruncatedPoly& p, const char* fn) {
  const double c = p.constant_term();
  if (!(c > 0.0)) {
    throw DomainError(std::string(fn) + ": constant part " + std::to_string(c) + " outside the domain");
  }
}

}  // namespace detail

[[nodiscard]] inline TruncatedPoly exp(const TruncatedPoly& p) {
  p.require_valid();
  std::vector<double> a(p.order() + 1);
  a[0] = std::exp(p.constant_term());
  for (std::size_t j = 1; j < a.size(); ++j) {
    a[j] = a[j - 1] / static_cast<double>(j);
  }
  return detail::apply_series(p, a);
}

[[nodiscard]] inline TruncatedPoly sin(const TruncatedPoly& p) {
  p.require_valid();
  const double s = std::sin(p.constant_term());
  const double c = std::cos(p.constant_term());
  const double cycle[4] = {s, c, -s, -c};
  std::vector<double> a(p.order() + 1);
  double fact = 1.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (j > 0) {
      fact *= static_cast<double>(j);
    }
    a[j] = cycle[j % 4] / fact;
  }
  return detail::apply_series(p, a);
}

[[nodiscard]] inline TruncatedPoly cos(const TruncatedPoly& p) {
  p.require_valid();
  const double s = std::sin(p.constant_term());
  const double c = std::cos(p.constant_term());
  const double cycle[4] = {c, -s, -c, s};
  std::vector<double> a(p.order() + 1);
  double fact = 1.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (j > 0) {
      fact *= static_cast<double>(j);
    }
    a[j] = cycle[j % 4] / fact;
  }
  return detail::apply_series(p, a);
}

[[nodiscard]] inline TruncatedPoly log(const TruncatedPoly& p) {
  p.require_valid();
  detail::require_positive_constant(p, "log");
  const double c = p.constant_term();
  std::vector<double> a(p.order() + 1);
  a[0] = std::log(c);
  double cj = 1.0;
  for (std::size_t j = 1; j < a.size(); ++j) {
    cj *= c;
    a[j] = ((j % 2 == 1) ? 1.0 : -1.0) / (static_cast<double>(j) * cj);
  }
  return detail::apply_series(p, a);
}

[[nodiscard]] inline TruncatedPoly sqrt(const TruncatedPoly& p) {
  p.require_valid();
  if (p.constant_term() == 0.0 && p.is_constant()) {
    return p;
  }
  detail::require_positive_constant(p, "sqrt");
  const double c = p.constant_term();
  std::vector<double> a(p.order() + 1);
  a[0] = std::sqrt(c);
  for (std::size_t j = 1; j < a.size(); ++j) {
    a[j] = a[j - 1] * (0.5 - static_cast<double>(j - 1)) / (static_cast<double>(j) * c);
  }
  return detail::apply_series(p, a);
}

/// Integer power by binary exponentiation; shared by both scalar algebras.
[[nodiscard]] inline double powi(double x, int n) {
  double result = 1.0;
  double base = x;
  unsigned e = n < 0 ? static_cast<unsigned>(-static_cast<long>(n)) : static_cast<unsigned>(n);
  while (e != 0) {
    if (e & 1U) {
      result *= base;
    }
    e >>= 1U;
    if (e != 0) {
      base *= base;
    }
  }
  return n < 0 ? 1.0 / result : result;
}

/// Integer power; negative exponents require a nonzero constant part.
[[nodiscard]] inline TruncatedPoly powi(const TruncatedPoly& p, int n) {
  p.require_valid();
  if (n >= 0) {
    TruncatedPoly result = TruncatedPoly::constant_like(p, 1.0);
    TruncatedPoly base = p;
    unsigned e = static_cast<unsigned>(n);
    while (e != 0) {
      if (e & 1U) {
        result = result * base;
      }
      e >>= 1U;
      if (e != 0) {
        base = base * base;
      }
    }
    return result;
  }
  const double c = p.constant_term();
  if (c == 0.0) {
    throw DomainError("powi: negative power of a polynomial with zero constant part");
  }
  std::vector<double> a(p.order() + 1);
  a[0] = powi(c, n);
  for (std::size_t j = 1; j < a.size(); ++j) {
    a[j] = a[j - 1] * (static_cast<double>(n) - static_cast<double>(j - 1)) / (static_cast<double>(j) * c);
  }
  return detail::apply_series(p, a);
}

[[nodiscard]] inline TruncatedPoly reciprocal(const TruncatedPoly& p) { return powi(p, -1); }

inline TruncatedPoly& TruncatedPoly::operator/=(const TruncatedPoly& o) {
  require_same_space(o);
  const double quotient = coeffs_[0] / o.coeffs_[0];
  *this = *this * reciprocal(o);
  coeffs_[0] = quotient;
  return *this;
}

[[nodiscard]] inline TruncatedPoly operator/(TruncatedPoly a, const TruncatedPoly& b) { return a /= b; }
[[nodiscard]] inline TruncatedPoly operator/(double c, const TruncatedPoly& b) { return reciprocal(b) *= c; }

[[nodiscard]] inline double reciprocal(double x) { return 1.0 / x; }

}  // namespace ettkit
