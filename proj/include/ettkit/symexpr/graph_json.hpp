/**
 * @file graph_json.hpp
 * @brief JSON (de)serialisation of expression graphs.
 *
 * {"n_vars": n, "n_params": p,
 *  "nodes": [{"id": i, "op": "mul", "children": [a, b], "payload": ...}, ...],
 *  "roots": [...]}
 * Payload is the index for var/param, the value for const, the exponent for
 * powi and null otherwise. Loading keeps the node list verbatim.
 */
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "ettkit/error.hpp"
#include "ettkit/symexpr/expr_graph.hpp"

namespace ettkit {

[[nodiscard]] inline nlohmann::json graph_to_json(const ExprGraph& g) {
  nlohmann::json j;
  j["n_vars"] = g.n_vars();
  j["n_params"] = g.n_params();
  auto nodes = nlohmann::json::array();
  for (NodeId id = 0; id < g.size(); ++id) {
    const Node& n = g.node(id);
    nlohmann::json jn;
    jn["id"] = id;
    jn["op"] = std::string(op_name(n.op));
    auto children = nlohmann::json::array();
    const int ar = op_arity(n.op);
    if (ar >= 1) children.push_back(n.lhs);
    if (ar == 2) children.push_back(n.rhs);
    jn["children"] = std::move(children);
    switch (n.op) {
      case Op::var:
      case Op::param:
      case Op::powi: jn["payload"] = n.index; break;
      case Op::constant: jn["payload"] = n.value; break;
      default: jn["payload"] = nullptr; break;
    }
    nodes.push_back(std::move(jn));
  }
  j["nodes"] = std::move(nodes);
  j["roots"] = g.roots();
  return j;
}

[[nodiscard]] inline ExprGraph graph_from_json(const nlohmann::json& j) {
  static const Op all_ops[] = {Op::var, Op::param, Op::time, Op::constant, Op::add, Op::sub, Op::mul, Op::div,
                               Op::neg, Op::sin,   Op::cos,  Op::exp,      Op::log, Op::sqrt, Op::powi};
  try {
    std::vector<Node> nodes;
    for (const auto& jn : j.at("nodes")) {
      const auto name = jn.at("op").get<std::string>();
      Node n;
      bool found = false;
      for (Op op : all_ops) {
        if (op_name(op) == name) {
          n.op = op;
          found = true;
        }
      }
      if (!found) {
        throw ConfigError("unknown graph op '" + name + "'");
      }
      if (jn.at("id").get<std::size_t>() != nodes.size()) {
        throw ConfigError("graph node ids must be consecutive from 0");
      }
      const auto children = jn.at("children").get<std::vector<NodeId>>();
      if (children.size() != static_cast<std::size_t>(op_arity(n.op))) {
        throw ConfigError("graph node " + std::to_string(nodes.size()) + " has the wrong number of children");
      }
      if (!children.empty()) n.lhs = children[0];
      if (children.size() == 2) n.rhs = children[1];
      switch (n.op) {
        case Op::var:
        case Op::param:
        case Op::powi: n.index = jn.at("payload").get<std::int32_t>(); break;
        case Op::constant: n.value = jn.at("payload").get<double>(); break;
        default: break;
      }
      nodes.push_back(n);
    }
    ExprGraph g;
    g.load_nodes(j.at("n_vars").get<std::size_t>(), j.at("n_params").get<std::size_t>(), std::move(nodes),
                 j.at("roots").get<std::vector<NodeId>>());
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed graph JSON: ") + e.what());
  }
}

}  // namespace ettkit
