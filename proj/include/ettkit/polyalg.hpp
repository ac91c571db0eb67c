/**
 * @file polyalg.hpp
 * @brief Truncated multivariate Taylor polynomial algebra.
 */
#pragma once

#include "ettkit/polyalg/elementary.hpp"
#include "ettkit/polyalg/monomial_basis.hpp"
#include "ettkit/polyalg/poly_json.hpp"
#include "ettkit/polyalg/poly_map.hpp"
#include "ettkit/polyalg/truncated_poly.hpp"
