#pragma once

/// Generalized Pandora's rule for tree and forest precedence constraints.
///
/// Subtrees are solved bottom-up. A node's children lines are merged by
/// repeatedly taking the front entry with the largest threshold, the node's
/// threshold is its reservation value when prepended to the merged line,
/// and the node is put in front. The root's line is the linearized tree.

#include <cstddef>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pandora/error.hpp"
#include "pandora/instance.hpp"
#include "pandora/line_solver.hpp"
#include "pandora/rational.hpp"

namespace pandora {

struct AnnotatedEntry {
  std::string id;
  Rational threshold;

  friend bool operator==(const AnnotatedEntry&, const AnnotatedEntry&) = default;
};

struct AnnotatedLine {
  std::vector<AnnotatedEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  friend bool operator==(const AnnotatedLine&, const AnnotatedLine&) = default;
};

/// Head-pop merge: repeatedly move the front with the largest threshold to
/// the output. Ties go to the line whose first entry has the smallest id.
/// Relative order inside each input line is preserved.
inline AnnotatedLine merge(std::span<const AnnotatedLine> lines) {
  std::set<std::string> seen;
  std::size_t total = 0;
  for (const auto& l : lines)
    for (const auto& e : l.entries) {
      if (!seen.insert(e.id).second) throw ValidationError("merge: box '" + e.id + "' appears in more than one line");
      ++total;
    }

  std::vector<std::size_t> cursor(lines.size(), 0);
  AnnotatedLine out;
  out.entries.reserve(total);
  while (out.entries.size() < total) {
    std::size_t best = lines.size();
    for (std::size_t k = 0; k < lines.size(); ++k) {
      if (cursor[k] >= lines[k].size()) continue;
      if (best == lines.size()) {
        best = k;
        continue;
      }
      const auto& cand = lines[k].entries[cursor[k]].threshold;
      const auto& inc = lines[best].entries[cursor[best]].threshold;
      if (cand > inc || (cand == inc && lines[k].entries.front().id < lines[best].entries.front().id)) best = k;
    }
    out.entries.push_back(lines[best].entries[cursor[best]++]);
  }
  return out;
}

inline AnnotatedLine merge(std::initializer_list<AnnotatedLine> lines) {
  return merge(std::span<const AnnotatedLine>(lines.begin(), lines.size()));
}

struct TreeSolution {
  std::vector<Rational> thresholds;        // by box index
  AnnotatedLine order;                     // the linearized tree
  std::vector<std::size_t> order_indices;  // same order, as box indices
  Rational value;                          // optimal expected net revenue

  const Rational& threshold_of(const Instance& inst, std::string_view id) const {
    return thresholds.at(inst.index_of(id));
  }
};

inline constexpr std::string_view kDummyRootId = "__root__";

inline TreeSolution solve_tree(const Instance& inst) {
  switch (inst.kind()) {
    case ConstraintKind::tree:
    case ConstraintKind::forest:
    case ConstraintKind::line:
    case ConstraintKind::unconstrained:
      break;
    case ConstraintKind::dag:
      throw UnsupportedError("no optimal threshold strategy exists for DAG constraints; use the exact oracle");
  }
  if (inst.has_side()) throw UnsupportedError("tree solver does not handle side constraints; use approx or oracle");

  const std::size_t n = inst.size();
  // Node n is the dummy root when there are several roots.
  const bool dummy = inst.roots().size() > 1;
  const std::size_t nodes = dummy ? n + 1 : n;
  auto spec = [&](std::size_t v) -> BoxSpec {
    if (v == n) return {std::string(kDummyRootId), Rational(0), DiscreteDistribution::point(Rational(0))};
    return inst.box(v);
  };
  auto children = [&](std::size_t v) -> std::vector<std::size_t> {
    if (v == n) return {inst.roots().begin(), inst.roots().end()};
    return {inst.children(v).begin(), inst.children(v).end()};
  };
  auto parent = [&](std::size_t v) -> std::size_t {
    if (v == n) return kNoParent;
    auto in = inst.in_neighbours(v);
    if (!in.empty()) return in.front();
    return dummy ? n : kNoParent;
  };

  std::vector<AnnotatedLine> lines(nodes);
  std::vector<std::vector<std::size_t>> line_boxes(nodes);
  std::vector<Rational> z(nodes);
  std::vector<std::size_t> pending(nodes);
  std::queue<std::size_t> ready;
  for (std::size_t v = 0; v < nodes; ++v) {
    pending[v] = children(v).size();
    if (pending[v] == 0) ready.push(v);
  }

  std::size_t root = kNoParent;
  while (!ready.empty()) {
    auto v = ready.front();
    ready.pop();

    std::vector<AnnotatedLine> child_lines;
    for (auto c : children(v)) child_lines.push_back(lines[c]);
    AnnotatedLine merged = merge(child_lines);

    LineInstance rest;
    std::vector<std::size_t> rest_idx;
    for (const auto& e : merged.entries) {
      auto idx = e.id == kDummyRootId ? n : inst.index_of(e.id);
      rest.boxes.push_back(spec(idx));
      rest_idx.push_back(idx);
    }
    z[v] = compute_threshold(spec(v), rest);

    lines[v].entries.reserve(merged.size() + 1);
    lines[v].entries.push_back({spec(v).id, z[v]});
    lines[v].entries.insert(lines[v].entries.end(), merged.entries.begin(), merged.entries.end());
    line_boxes[v].push_back(v);
    line_boxes[v].insert(line_boxes[v].end(), rest_idx.begin(), rest_idx.end());
    for (auto c : children(v)) {
      lines[c] = {};
      line_boxes[c] = {};
    }

    auto p = parent(v);
    if (p == kNoParent) {
      root = v;
    } else if (--pending[p] == 0) {
      ready.push(p);
    }
  }
  if (root == kNoParent) throw ValidationError("cycle detected in tree constraint");

  LineInstance full;
  for (auto idx : line_boxes[root]) full.boxes.push_back(spec(idx));
  TreeSolution sol;
  sol.value = ValueTable(full).value();
  sol.thresholds.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t k = 0; k < line_boxes[root].size(); ++k) {
    auto idx = line_boxes[root][k];
    if (idx == n) continue;
    sol.order.entries.push_back(lines[root].entries[k]);
    sol.order_indices.push_back(idx);
  }
  return sol;
}

}  // namespace pandora
