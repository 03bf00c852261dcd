#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pandora/distribution.hpp"
#include "pandora/error.hpp"
#include "pandora/rational.hpp"

namespace pandora {

struct BoxSpec {
  std::string id;
  Rational cost;
  DiscreteDistribution reward;
};

inline Rational weitzman_reservation(const BoxSpec& box) { return reservation_value(box.reward, box.cost); }

enum class ConstraintKind { unconstrained, line, tree, forest, dag };

inline std::string_view to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::unconstrained: return "unconstrained";
    case ConstraintKind::line: return "line";
    case ConstraintKind::tree: return "tree";
    case ConstraintKind::forest: return "forest";
    case ConstraintKind::dag: return "dag";
  }
  return "?";
}

inline std::optional<ConstraintKind> constraint_kind_from(std::string_view s) {
  if (s == "unconstrained") return ConstraintKind::unconstrained;
  if (s == "line") return ConstraintKind::line;
  if (s == "tree") return ConstraintKind::tree;
  if (s == "forest") return ConstraintKind::forest;
  if (s == "dag") return ConstraintKind::dag;
  return std::nullopt;
}

struct ConstraintGraph {
  ConstraintKind kind = ConstraintKind::unconstrained;
  std::vector<std::pair<std::string, std::string>> edges;  // (parent, child)
  std::vector<std::string> roots;                          // empty: derived from in-degrees
};

enum class SideKind { none, knapsack, partition };

/// Generalized knapsack or partition side-constraint on the opened set.
struct SideConstraint {
  SideKind kind = SideKind::none;
  // knapsack
  std::map<std::string, std::vector<std::int64_t>> weights;
  std::vector<std::int64_t> capacity;
  // partition
  std::map<std::string, std::int64_t> parts;
  std::vector<std::int64_t> capacities;
};

struct ValidationOptions {
  bool allow_negative_costs = false;
};

inline constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);
inline constexpr std::string_view kReservedPrefix = "__";

/// A validated problem instance. Boxes are addressed by their position in
/// `boxes()`; precedence and side-constraint data are precomputed on
/// construction and never change afterwards.
class Instance {
 public:
  static Instance create(std::vector<BoxSpec> boxes, ConstraintGraph constraint, SideConstraint side = {},
                         ValidationOptions options = {}) {
    Instance inst;
    inst.boxes_ = std::move(boxes);
    inst.constraint_ = std::move(constraint);
    inst.side_ = std::move(side);
    inst.options_ = options;
    inst.validate_boxes();
    inst.build_precedence();
    inst.build_side();
    return inst;
  }

  std::size_t size() const { return boxes_.size(); }
  const BoxSpec& box(std::size_t i) const { return boxes_[i]; }
  std::span<const BoxSpec> boxes() const { return boxes_; }
  const ConstraintGraph& constraint() const { return constraint_; }
  ConstraintKind kind() const { return constraint_.kind; }
  const SideConstraint& side() const { return side_; }
  const ValidationOptions& options() const { return options_; }

  std::size_t index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw ValidationError("unknown box id '" + std::string(id) + "'");
    return it->second;
  }
  bool contains(std::string_view id) const { return index_.count(std::string(id)) > 0; }

  /// Sole parent for line/tree/forest constraints, kNoParent for roots.
  std::size_t parent(std::size_t i) const { return parent_[i]; }
  std::span<const std::size_t> in_neighbours(std::size_t i) const { return in_[i]; }
  /// Out-neighbours sorted by box id.
  std::span<const std::size_t> children(std::size_t i) const { return children_[i]; }
  /// Boxes with no in-neighbours, sorted by box id.
  std::span<const std::size_t> roots() const { return roots_; }
  /// For line constraints: the boxes in path order.
  std::span<const std::size_t> line_order() const { return line_order_; }

  bool has_side() const { return dimension_ > 0; }
  std::size_t dimension() const { return dimension_; }
  std::span<const std::int64_t> weight(std::size_t i) const {
    return std::span<const std::int64_t>(weights_).subspan(i * dimension_, dimension_);
  }
  std::span<const std::int64_t> capacity() const { return capacity_; }

  /// Box indices sorted by id (the canonical deterministic order).
  std::span<const std::size_t> by_id() const { return by_id_; }

  std::vector<const DiscreteDistribution*> rewards() const {
    std::vector<const DiscreteDistribution*> r;
    for (const auto& b : boxes_) r.push_back(&b.reward);
    return r;
  }

  /// Sorted union of {0} and every support value.
  std::vector<Rational> value_grid() const {
    std::vector<Rational> g{Rational(0)};
    for (const auto& b : boxes_)
      for (const auto& a : b.reward.atoms()) g.push_back(a.value);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
  }

  /// Copy with one box's cost replaced; validation options carried over
  /// unless overridden.
  Instance with_cost(std::size_t i, Rational cost, std::optional<ValidationOptions> options = std::nullopt) const {
    auto boxes = boxes_;
    boxes[i].cost = std::move(cost);
    return create(std::move(boxes), constraint_, side_, options.value_or(options_));
  }

  Instance with_side(SideConstraint side) const { return create(boxes_, constraint_, std::move(side), options_); }

  Instance with_rewards(std::vector<DiscreteDistribution> rewards) const {
    auto boxes = boxes_;
    for (std::size_t i = 0; i < boxes.size(); ++i) boxes[i].reward = std::move(rewards[i]);
    return create(std::move(boxes), constraint_, side_, options_);
  }

 private:
  void validate_boxes() {
    if (boxes_.empty()) throw ValidationError("instance has no boxes");
    for (std::size_t i = 0; i < boxes_.size(); ++i) {
      const auto& b = boxes_[i];
      if (b.id.empty()) throw ValidationError("box " + std::to_string(i) + " has an empty id");
      if (b.id.starts_with(kReservedPrefix))
        throw ValidationError("box id '" + b.id + "' uses the reserved prefix '__'");
      if (!index_.emplace(b.id, i).second) throw ValidationError("duplicate box id '" + b.id + "'");
      if (b.cost < 0 && !options_.allow_negative_costs)
        throw ValidationError("box '" + b.id + "' has negative cost " + to_string(b.cost));
      if (b.reward.min_value() < 0)
        throw ValidationError("box '" + b.id + "' has a negative reward value " + to_string(b.reward.min_value()));
    }
    by_id_.resize(boxes_.size());
    for (std::size_t i = 0; i < boxes_.size(); ++i) by_id_[i] = i;
    std::sort(by_id_.begin(), by_id_.end(), [&](std::size_t a, std::size_t b) { return boxes_[a].id < boxes_[b].id; });
  }

  void build_precedence() {
    const std::size_t n = boxes_.size();
    parent_.assign(n, kNoParent);
    in_.assign(n, {});
    children_.assign(n, {});
    const auto kind = constraint_.kind;

    if (kind == ConstraintKind::unconstrained && !constraint_.edges.empty())
      throw ValidationError("unconstrained instance must not declare edges");

    for (const auto& [p, c] : constraint_.edges) {
      auto edge = "edge " + p + "->" + c;
      if (!index_.count(p)) throw ValidationError(edge + " references unknown box '" + p + "'");
      if (!index_.count(c)) throw ValidationError(edge + " references unknown box '" + c + "'");
      if (p == c) throw ValidationError(edge + " is a self-loop");
      std::size_t pi = index_.at(p), ci = index_.at(c);
      if (std::find(in_[ci].begin(), in_[ci].end(), pi) != in_[ci].end())
        throw ValidationError("duplicate " + edge);
      if (kind != ConstraintKind::dag && !in_[ci].empty())
        throw ValidationError(edge + ": box '" + c + "' already has a parent");
      in_[ci].push_back(pi);
      children_[pi].push_back(ci);
      parent_[ci] = pi;
    }
    if (kind == ConstraintKind::dag)
      for (auto& v : parent_) v = kNoParent;
    auto by_id = [&](std::size_t a, std::size_t b) { return boxes_[a].id < boxes_[b].id; };
    for (auto& ch : children_) std::sort(ch.begin(), ch.end(), by_id);
    for (auto& in : in_) std::sort(in.begin(), in.end(), by_id);

    for (std::size_t i : by_id_)
      if (in_[i].empty()) roots_.push_back(i);

    // Kahn's algorithm: every constraint kind must be acyclic.
    std::vector<std::size_t> indegree(n);
    for (std::size_t i = 0; i < n; ++i) indegree[i] = in_[i].size();
    std::queue<std::size_t> ready;
    for (auto r : roots_) ready.push(r);
    std::size_t visited = 0;
    while (!ready.empty()) {
      auto u = ready.front();
      ready.pop();
      ++visited;
      for (auto v : children_[u])
        if (--indegree[v] == 0) ready.push(v);
    }
    if (visited != n) {
      for (const auto& [p, c] : constraint_.edges)
        if (indegree[index_.at(c)] > 0) throw ValidationError("cycle detected through edge " + p + "->" + c);
    }

    if (!constraint_.roots.empty()) {
      std::vector<std::string> declared = constraint_.roots, derived;
      for (auto r : roots_) derived.push_back(boxes_[r].id);
      std::sort(declared.begin(), declared.end());
      for (const auto& r : declared)
        if (!index_.count(r)) throw ValidationError("root '" + r + "' is not a box");
      if (kind != ConstraintKind::unconstrained && declared != derived)
        throw ValidationError("declared roots do not match the boxes without a parent");
    }

    switch (kind) {
      case ConstraintKind::line: {
        if (roots_.size() != 1) throw ValidationError("line constraint must have exactly one start box");
        for (std::size_t i = 0; i < n; ++i)
          if (children_[i].size() > 1)
            throw ValidationError("line constraint: box '" + boxes_[i].id + "' has more than one successor");
        for (std::size_t u = roots_.front();;) {
          line_order_.push_back(u);
          if (children_[u].empty()) break;
          u = children_[u].front();
        }
        break;
      }
      case ConstraintKind::tree:
        if (roots_.size() != 1) throw ValidationError("tree constraint must have exactly one root");
        break;
      default:
        break;
    }
  }

  void build_side() {
    const std::size_t n = boxes_.size();
    const std::int64_t bound = 10 * static_cast<std::int64_t>(n);
    auto check_capacities = [&](const std::vector<std::int64_t>& cap) {
      if (cap.empty()) throw ValidationError("side constraint needs at least one capacity entry");
      for (auto c : cap) {
        if (c < 0) throw ValidationError("side constraint capacity " + std::to_string(c) + " is negative");
        if (c > bound)
          throw ValidationError("side constraint capacity " + std::to_string(c) + " exceeds the bound 10*n = " +
                                std::to_string(bound));
      }
    };
    switch (side_.kind) {
      case SideKind::none:
        dimension_ = 0;
        return;
      case SideKind::knapsack: {
        check_capacities(side_.capacity);
        dimension_ = side_.capacity.size();
        capacity_ = side_.capacity;
        weights_.assign(n * dimension_, 0);
        for (const auto& [id, w] : side_.weights) {
          if (!index_.count(id)) throw ValidationError("knapsack weight for unknown box '" + id + "'");
          if (w.size() != dimension_)
            throw ValidationError("knapsack weight of box '" + id + "' has dimension " + std::to_string(w.size()) +
                                  ", expected " + std::to_string(dimension_));
          for (std::size_t k = 0; k < dimension_; ++k) {
            if (w[k] < 0) throw ValidationError("knapsack weight of box '" + id + "' is negative");
            weights_[index_.at(id) * dimension_ + k] = w[k];
          }
        }
        return;
      }
      case SideKind::partition: {
        check_capacities(side_.capacities);
        dimension_ = side_.capacities.size();
        capacity_ = side_.capacities;
        weights_.assign(n * dimension_, 0);
        for (const auto& [id, part] : side_.parts) {
          if (!index_.count(id)) throw ValidationError("partition entry for unknown box '" + id + "'");
          if (part < 0 || static_cast<std::size_t>(part) >= dimension_)
            throw ValidationError("box '" + id + "' assigned to part " + std::to_string(part) + " of " +
                                  std::to_string(dimension_));
          weights_[index_.at(id) * dimension_ + static_cast<std::size_t>(part)] = 1;
        }
        return;
      }
    }
  }

  std::vector<BoxSpec> boxes_;
  ConstraintGraph constraint_;
  SideConstraint side_;
  ValidationOptions options_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> parent_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> roots_;
  std::vector<std::size_t> line_order_;
  std::vector<std::size_t> by_id_;
  std::size_t dimension_ = 0;
  std::vector<std::int64_t> weights_;
  std::vector<std::int64_t> capacity_;
};

/// Which boxes are open so far plus the side-constraint load they use.
class OpenSet {
 public:
  explicit OpenSet(const Instance& inst) : open_(inst.size(), false), load_(inst.dimension(), 0) {}

  bool contains(std::size_t i) const { return open_[i]; }
  std::size_t count() const { return count_; }
  std::span<const std::int64_t> load() const { return load_; }

  void insert(const Instance& inst, std::size_t i) {
    if (open_[i]) return;
    open_[i] = true;
    ++count_;
    auto w = inst.weight(i);
    for (std::size_t k = 0; k < load_.size(); ++k) load_[k] += w[k];
  }

 private:
  std::vector<bool> open_;
  std::vector<std::int64_t> load_;
  std::size_t count_ = 0;
};

/// Precedence part of openability: tree-like kinds need the parent open,
/// DAGs need at least one in-neighbour open.
template <typename IsOpen>
bool precedence_allows(const Instance& inst, std::size_t i, IsOpen&& is_open) {
  auto in = inst.in_neighbours(i);
  if (in.empty()) return true;
  return std::any_of(in.begin(), in.end(), [&](std::size_t p) { return is_open(p); });
}

inline bool side_allows(const Instance& inst, std::span<const std::int64_t> load, std::size_t i) {
  auto w = inst.weight(i);
  auto cap = inst.capacity();
  for (std::size_t k = 0; k < cap.size(); ++k)
    if (load[k] + w[k] > cap[k]) return false;
  return true;
}

inline bool can_open(const Instance& inst, const OpenSet& open, std::size_t i) {
  if (open.contains(i)) return false;
  return precedence_allows(inst, i, [&](std::size_t p) { return open.contains(p); }) &&
         side_allows(inst, open.load(), i);
}

using Mask = std::uint64_t;

inline bool in_mask(Mask m, std::size_t i) { return (m >> i) & 1u; }

inline std::vector<std::int64_t> mask_load(const Instance& inst, Mask m) {
  std::vector<std::int64_t> load(inst.dimension(), 0);
  for (std::size_t i = 0; i < inst.size(); ++i)
    if (in_mask(m, i)) {
      auto w = inst.weight(i);
      for (std::size_t k = 0; k < load.size(); ++k) load[k] += w[k];
    }
  return load;
}

inline bool can_open_mask(const Instance& inst, Mask m, std::size_t i) {
  if (in_mask(m, i)) return false;
  if (!precedence_allows(inst, i, [&](std::size_t p) { return in_mask(m, p); })) return false;
  if (!inst.has_side()) return true;
  return side_allows(inst, mask_load(inst, m), i);
}

/// Describes why a set cannot be the opened set of any legal run, or
/// returns nullopt when it can.
inline std::optional<std::string> set_violation(const Instance& inst, Mask m) {
  // Precedence: the set must be reachable by opening its members one by one.
  Mask reached = 0;
  for (bool progress = true; progress;) {
    progress = false;
    for (std::size_t i = 0; i < inst.size(); ++i)
      if (in_mask(m, i) && !in_mask(reached, i) &&
          precedence_allows(inst, i, [&](std::size_t p) { return in_mask(reached, p); })) {
        reached |= Mask{1} << i;
        progress = true;
      }
  }
  if (reached != m) {
    for (std::size_t i = 0; i < inst.size(); ++i)
      if (in_mask(m, i) && !in_mask(reached, i))
        return "precedence: box '" + inst.box(i).id + "' is not reachable inside the set";
  }
  if (inst.has_side()) {
    auto load = mask_load(inst, m);
    for (std::size_t k = 0; k < load.size(); ++k)
      if (load[k] > inst.capacity()[k])
        return "side constraint: dimension " + std::to_string(k) + " load " + std::to_string(load[k]) +
               " exceeds capacity " + std::to_string(inst.capacity()[k]);
  }
  return std::nullopt;
}

/// Mask of the given ids; ids must be boxes of `inst`.
inline Mask mask_of(const Instance& inst, std::span<const std::string> ids) {
  if (inst.size() > 64) throw CapExceededError("set masks support at most 64 boxes");
  Mask m = 0;
  for (const auto& id : ids) m |= Mask{1} << inst.index_of(id);
  return m;
}

}  // namespace pandora
