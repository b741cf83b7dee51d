#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dagsmooth {

/// Immutable validated DAG with the structural caches the smoothing and
/// selection procedures query in their inner loops: CSR adjacency, a
/// deterministic topological order, per-node descendant closures, longest-path
/// depths, and the root/leaf sets. Edges point from parent to child; a node's
/// hypothesis can be false only if every ancestor's hypothesis is false.
///
/// Immutable after construction, so concurrent readers need no locking.
class Dag {
 public:
  Dag() = default;

  /// Validates and builds all caches. Throws IndexOutOfRange, DuplicateEdge
  /// (self-loops included), or CycleDetected. The topological order is
  /// Kahn's algorithm with smallest-index-first tie-breaking, so rebuilding
  /// the same edge list reproduces the identical order.
  static Dag build(int node_count, std::span<const std::pair<int, int>> edges);
  static Dag build(int node_count, const std::vector<std::pair<int, int>>& edges) {
    return build(node_count, std::span<const std::pair<int, int>>(edges));
  }

  int node_count() const noexcept { return n_; }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
  std::span<const std::pair<int, int>> edges() const noexcept { return edges_; }

  std::span<const int> children(int v) const;
  std::span<const int> parents(int v) const;
  bool is_leaf(int v) const { return children(v).empty(); }
  bool is_root(int v) const { return parents(v).empty(); }

  /// Every node appears after all of its parents.
  std::span<const int> topo_order() const noexcept { return topo_; }

  /// v plus all nodes reachable from v, as a sorted index array.
  std::span<const int> descendant_closure(int v) const;

  /// Longest path from any root, roots have depth 1.
  int depth(int v) const;
  int max_depth() const noexcept { return max_depth_; }

  std::span<const int> leaves() const noexcept { return leaves_; }
  std::span<const int> roots() const noexcept { return roots_; }

  /// Nodes grouped by depth; element d-1 holds the nodes at depth d.
  std::vector<std::vector<int>> depth_partition() const;

 private:
  void check_node(int v) const;

  int n_ = 0;
  int max_depth_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<int> child_off_, child_dat_;
  std::vector<int> parent_off_, parent_dat_;
  std::vector<int> topo_;
  std::vector<int> depth_;
  std::vector<int> closure_off_;
  std::vector<int> closure_dat_;
  std::vector<int> leaves_, roots_;
};

/// Which hypotheses are false (signals). Closed upward: a nonnull node's
/// ancestors are all nonnull.
struct TruthAssignment {
  std::vector<std::uint8_t> nonnull;

  bool upward_closed(const Dag& dag) const;
  int signal_count() const;
};

}  // namespace dagsmooth
