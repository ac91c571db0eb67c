/**
 * @file symexpr.hpp
 * @brief Expression graphs for dynamics, events and Hamiltonians.
 */
#pragma once

#include "ettkit/symexpr/expr_graph.hpp"
#include "ettkit/symexpr/graph_json.hpp"
#include "ettkit/symexpr/ode_system.hpp"
