#pragma once

// Instance document format (JSON):
//
//   {
//     "boxes": [{"id": "a", "cost": "1", "reward": [{"value": "3", "prob": "1/2"}, ...]}, ...],
//     "constraint": {"kind": "tree", "edges": [["a", "b"], ...], "roots": ["a"]},
//     "side": {"kind": "knapsack", "weights": {"a": [1]}, "capacity": [2]}
//          or {"kind": "partition", "parts": {"a": 0}, "capacities": [1, 1]}
//   }
//
// Rationals are strings ("p/q" or decimals). `constraint` defaults to
// unconstrained and `side` is optional.

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

#include "pandora/error.hpp"
#include "pandora/instance.hpp"
#include "pandora/rational.hpp"

namespace pandora {

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  return obj.at(key);
}

inline Rational rational_field(const json& v, const std::string& where) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
  throw ParseError(where + ": expected a rational string");
}

inline std::vector<std::int64_t> int_array(const json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an integer array");
  std::vector<std::int64_t> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) throw ParseError(where + ": expected integers");
    out.push_back(e.get<std::int64_t>());
  }
  return out;
}

}  // namespace detail

inline Instance load_instance(std::string_view text, ValidationOptions options = {}) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("instance document must be a JSON object");

  const auto& jboxes = detail::require(doc, "boxes", "instance");
  if (!jboxes.is_array()) throw ParseError("instance: 'boxes' must be an array");
  std::vector<BoxSpec> boxes;
  for (std::size_t i = 0; i < jboxes.size(); ++i) {
    const auto& jb = jboxes[i];
    std::string where = "box " + std::to_string(i);
    const auto& jid = detail::require(jb, "id", where);
    if (!jid.is_string()) throw ParseError(where + ": 'id' must be a string");
    BoxSpec b;
    b.id = jid.get<std::string>();
    where = "box '" + b.id + "'";
    b.cost = detail::rational_field(detail::require(jb, "cost", where), where + " cost");
    const auto& jr = detail::require(jb, "reward", where);
    if (!jr.is_array()) throw ParseError(where + ": 'reward' must be an array");
    std::vector<Atom> atoms;
    for (const auto& ja : jr)
      atoms.push_back({detail::rational_field(detail::require(ja, "value", where), where + " value"),
                       detail::rational_field(detail::require(ja, "prob", where), where + " prob")});
    try {
      b.reward = DiscreteDistribution::from_atoms(std::move(atoms));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    boxes.push_back(std::move(b));
  }

  ConstraintGraph graph;
  if (doc.contains("constraint")) {
    const auto& jc = doc.at("constraint");
    const auto& jk = detail::require(jc, "kind", "constraint");
    if (!jk.is_string()) throw ParseError("constraint: 'kind' must be a string");
    auto kind = constraint_kind_from(jk.get<std::string>());
    if (!kind) throw ParseError("constraint: unknown kind '" + jk.get<std::string>() + "'");
    graph.kind = *kind;
    if (jc.contains("edges")) {
      for (const auto& je : jc.at("edges")) {
        if (!je.is_array() || je.size() != 2 || !je[0].is_string() || !je[1].is_string())
          throw ParseError("constraint: each edge must be a [parent, child] pair of ids");
        graph.edges.emplace_back(je[0].get<std::string>(), je[1].get<std::string>());
      }
    }
    if (jc.contains("roots")) {
      for (const auto& jr : jc.at("roots")) {
        if (!jr.is_string()) throw ParseError("constraint: roots must be ids");
        graph.roots.push_back(jr.get<std::string>());
      }
    }
  }

  SideConstraint side;
  if (doc.contains("side") && !doc.at("side").is_null()) {
    const auto& js = doc.at("side");
    const auto& jk = detail::require(js, "kind", "side");
    std::string kind = jk.is_string() ? jk.get<std::string>() : "";
    if (kind == "none") {
    } else if (kind == "knapsack") {
      side.kind = SideKind::knapsack;
      side.capacity = detail::int_array(detail::require(js, "capacity", "side"), "side capacity");
      const auto& jw = detail::require(js, "weights", "side");
      if (!jw.is_object()) throw ParseError("side: 'weights' must map ids to integer arrays");
      for (const auto& [id, w] : jw.items()) side.weights[id] = detail::int_array(w, "side weight of '" + id + "'");
    } else if (kind == "partition") {
      side.kind = SideKind::partition;
      side.capacities = detail::int_array(detail::require(js, "capacities", "side"), "side capacities");
      const auto& jp = detail::require(js, "parts", "side");
      if (!jp.is_object()) throw ParseError("side: 'parts' must map ids to part indices");
      for (const auto& [id, p] : jp.items()) {
        if (!p.is_number_integer()) throw ParseError("side: part of '" + id + "' must be an integer");
        side.parts[id] = p.get<std::int64_t>();
      }
    } else {
      throw ParseError("side: unknown kind '" + kind + "'");
    }
  }

  return Instance::create(std::move(boxes), std::move(graph), std::move(side), options);
}

inline nlohmann::json instance_to_json(const Instance& inst) {
  using detail::json;
  json doc;
  doc["boxes"] = json::array();
  for (const auto& b : inst.boxes()) {
    json jb;
    jb["id"] = b.id;
    jb["cost"] = to_string(b.cost);
    jb["reward"] = json::array();
    for (const auto& a : b.reward.atoms()) jb["reward"].push_back({{"value", to_string(a.value)}, {"prob", to_string(a.prob)}});
    doc["boxes"].push_back(std::move(jb));
  }
  json jc;
  jc["kind"] = std::string(to_string(inst.kind()));
  jc["edges"] = json::array();
  for (const auto& [p, c] : inst.constraint().edges) jc["edges"].push_back({p, c});
  jc["roots"] = json::array();
  if (inst.kind() != ConstraintKind::unconstrained)
    for (auto r : inst.roots()) jc["roots"].push_back(inst.box(r).id);
  doc["constraint"] = std::move(jc);
  const auto& side = inst.side();
  if (side.kind == SideKind::knapsack) {
    json js{{"kind", "knapsack"}, {"capacity", side.capacity}, {"weights", json::object()}};
    for (const auto& [id, w] : side.weights) js["weights"][id] = w;
    doc["side"] = std::move(js);
  } else if (side.kind == SideKind::partition) {
    json js{{"kind", "partition"}, {"capacities", side.capacities}, {"parts", json::object()}};
    for (const auto& [id, p] : side.parts) js["parts"][id] = p;
    doc["side"] = std::move(js);
  }
  return doc;
}

inline std::string dump_instance(const Instance& inst) { return instance_to_json(inst).dump(2) + "\n"; }

}  // namespace pandora
