/**
 * @file scalar.hpp
 * @brief Uniform access to the two coefficient algebras: double and TruncatedPoly.
 */
#pragma once

#include <cmath>

#include "ettkit/polyalg/elementary.hpp"
#include "ettkit/polyalg/truncated_poly.hpp"

namespace ettkit {

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  [[nodiscard]] static double constant(const double& /*like*/, double c) noexcept { return c; }
  [[nodiscard]] static double value(const double& s) noexcept { return s; }
  [[nodiscard]] static double norm(const double& s) noexcept { return std::abs(s); }
  [[nodiscard]] static bool finite(const double& s) noexcept { return std::isfinite(s); }
};

template <>
struct ScalarTraits<TruncatedPoly> {
  [[nodiscard]] static TruncatedPoly constant(const TruncatedPoly& like, double c) {
    return TruncatedPoly::constant_like(like, c);
  }
  /// Constant part.
  [[nodiscard]] static double value(const TruncatedPoly& s) noexcept { return s.constant_term(); }
  /// Largest absolute coefficient.
  [[nodiscard]] static double norm(const TruncatedPoly& s) noexcept { return s.max_abs(); }
  [[nodiscard]] static bool finite(const TruncatedPoly& s) noexcept {
    for (double c : s.coeffs()) {
      if (!std::isfinite(c)) {
        return false;
      }
    }
    return true;
  }
};

}  // namespace ettkit
