#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dagsmooth/graph.hpp"
#include "dagsmooth/smoothing.hpp"

namespace dagsmooth {

/// Output of a selection procedure. For the graph-aware procedures the
/// rejection set obeys the logical constraint (every rejected node's parents
/// are rejected) and `rounds` records the order in which the front advanced:
/// nodes in a round had all parents rejected in strictly earlier rounds.
/// `thresholds[v]` is the critical value node v was last compared against;
/// NaN marks nodes that never became eligible.
struct SelectionResult {
  std::string method;
  double alpha = 0.0;
  std::optional<double> gamma;

  std::vector<int> rejected;               // sorted
  std::vector<char> rejected_mask;         // size node_count
  std::vector<std::vector<int>> rounds;    // round r-1 -> nodes rejected in round r
  std::vector<double> thresholds;          // size node_count, NaN = never eligible

  bool is_rejected(int v) const { return rejected_mask[static_cast<size_t>(v)] != 0; }
  int rejection_count() const { return static_cast<int>(rejected.size()); }
  bool has_threshold(int v) const { return !std::isnan(thresholds[static_cast<size_t>(v)]); }

  /// Every rejected node's parents are rejected. Not asserted for bh.
  bool obeys_constraint(const Dag& dag) const;
};

/// All-parents water-filling weights. Unrejected leaves each carry
/// 1/#unrejected-leaves of mass; mass flows to unrejected parents in equal
/// shares and comes to rest on the rejection front (unrejected nodes whose
/// parents are all rejected). Implemented as a single reverse-topological
/// pass. The weights sum to one whenever an unrejected leaf exists; if every
/// node is rejected the result is identically zero. Throws ConstraintViolation
/// when `rejected` is not upward-closed.
std::vector<double> water_fill_weights(const Dag& dag, const std::vector<char>& rejected);

/// Sequential-rejection FWER control (Meijer-Goeman, all-parents weights):
/// repeatedly reject every front node v with p[v] <= alpha * g_v, recomputing
/// the water-filling weights after each round, until a fixed point.
SelectionResult select_fwer_mg(const Dag& dag, const PValueVector& p, double alpha);

/// FDX control at level (gamma, alpha): take the FWER rejection set S0, then
/// append the first floor(|S0| * gamma / (1-gamma)) nodes of the deterministic
/// topological order of the remaining subgraph. The topological prefix keeps
/// the constraint intact.
SelectionResult select_fdx(const Dag& dag, const PValueVector& p, double gamma, double alpha);

/// Augmentation budget used by select_fdx.
int fdx_budget(int base_rejections, double gamma);

/// Effective leaf and node counts for the DAGGER thresholds, computed
/// leaves-to-roots: leaves have ell = m = 1, and each node aggregates its
/// children's values split by the child's parent count.
struct DaggerConstants {
  std::vector<double> eff_leaves;  // ell_v
  std::vector<double> eff_nodes;   // m_v
  int total_leaves = 0;            // L
};

DaggerConstants dagger_constants(const Dag& dag);

/// Step-up threshold for a depth-d candidate: alpha * (ell_v / L) *
/// (m_v + r + prior_rejections - 1) / m_v.
double dagger_threshold(double alpha, double eff_leaves, int total_leaves, double eff_nodes,
                        int r, int prior_rejections);

/// DAGGER FDR control: a generalized step-up per depth level over the nodes
/// whose parents are all rejected. When no rank qualifies at a depth, that
/// depth rejects nothing.
SelectionResult select_fdr_dagger(const Dag& dag, const PValueVector& p, double alpha);

/// Benjamini-Hochberg step-up baseline; ignores the graph, so the logical
/// constraint is not guaranteed for its output.
SelectionResult select_bh(const PValueVector& p, double alpha);

}  // namespace dagsmooth
