#include "dagsmooth/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "dagsmooth/errors.hpp"

namespace dagsmooth {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("alpha must lie in (0, 1], got " + std::to_string(alpha));
}

void check_aligned(const Dag& dag, const PValueVector& p) {
  if (static_cast<int>(p.size()) != dag.node_count())
    throw AlignmentError("p-value vector has " + std::to_string(p.size()) + " entries for " +
                         std::to_string(dag.node_count()) + " nodes");
}

void finalize(SelectionResult& result) {
  result.rejected.clear();
  for (int v = 0; v < static_cast<int>(result.rejected_mask.size()); ++v)
    if (result.rejected_mask[static_cast<size_t>(v)]) result.rejected.push_back(v);
}

}  // namespace

bool SelectionResult::obeys_constraint(const Dag& dag) const {
  for (const auto& [u, v] : dag.edges())
    if (rejected_mask[static_cast<size_t>(v)] && !rejected_mask[static_cast<size_t>(u)])
      return false;
  return true;
}

std::vector<double> water_fill_weights(const Dag& dag, const std::vector<char>& rejected) {
  const int n = dag.node_count();
  if (static_cast<int>(rejected.size()) != n)
    throw AlignmentError("rejection mask has wrong size");
  for (const auto& [u, v] : dag.edges())
    if (rejected[static_cast<size_t>(v)] && !rejected[static_cast<size_t>(u)])
      throw ConstraintViolation("rejection set is not upward-closed at edge (" +
                                std::to_string(u) + ", " + std::to_string(v) + ")");

  std::vector<double> g(static_cast<size_t>(n), 0.0);
  int open_leaves = 0;
  for (int v : dag.leaves()) open_leaves += !rejected[static_cast<size_t>(v)];
  if (open_leaves == 0) return g;

  std::vector<int> open_parents(static_cast<size_t>(n), 0);
  for (int v = 0; v < n; ++v)
    for (int u : dag.parents(v)) open_parents[static_cast<size_t>(v)] += !rejected[static_cast<size_t>(u)];

  // Each unrejected leaf holds 1/Z; an unrejected node's mass is what its
  // children pass up, each child splitting equally among unrejected parents.
  std::vector<double> flow(static_cast<size_t>(n), 0.0);
  auto topo = dag.topo_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    int v = *it;
    if (rejected[static_cast<size_t>(v)]) continue;
    if (dag.is_leaf(v)) {
      flow[static_cast<size_t>(v)] = 1.0 / static_cast<double>(open_leaves);
    } else {
      double s = 0.0;
      for (int w : dag.children(v))
        s += flow[static_cast<size_t>(w)] / static_cast<double>(open_parents[static_cast<size_t>(w)]);
      flow[static_cast<size_t>(v)] = s;
    }
  }
  // Mass rests on the front: unrejected nodes with every parent rejected.
  for (int v = 0; v < n; ++v)
    if (!rejected[static_cast<size_t>(v)] && open_parents[static_cast<size_t>(v)] == 0)
      g[static_cast<size_t>(v)] = flow[static_cast<size_t>(v)];
  return g;
}

SelectionResult select_fwer_mg(const Dag& dag, const PValueVector& p, double alpha) {
  check_alpha(alpha);
  check_aligned(dag, p);
  const int n = dag.node_count();

  SelectionResult result;
  result.method = "fwer-mg";
  result.alpha = alpha;
  result.rejected_mask.assign(static_cast<size_t>(n), 0);
  result.thresholds.assign(static_cast<size_t>(n), kNaN);

  for (;;) {
    auto g = water_fill_weights(dag, result.rejected_mask);
    std::vector<int> newly;
    for (int v = 0; v < n; ++v) {
      if (result.rejected_mask[static_cast<size_t>(v)]) continue;
      bool front = true;
      for (int u : dag.parents(v))
        if (!result.rejected_mask[static_cast<size_t>(u)]) {
          front = false;
          break;
        }
      if (!front) continue;
      double thr = alpha * g[static_cast<size_t>(v)];
      result.thresholds[static_cast<size_t>(v)] = thr;
      if (p[static_cast<size_t>(v)] <= thr) newly.push_back(v);
    }
    if (newly.empty()) break;
    for (int v : newly) result.rejected_mask[static_cast<size_t>(v)] = 1;
    result.rounds.push_back(std::move(newly));
  }
  finalize(result);
  return result;
}

int fdx_budget(int base_rejections, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw DomainError("gamma must lie in [0, 1), got " + std::to_string(gamma));
  // Nudge guards the floor against values like 9*0.1/0.9 landing a hair
  // below the exact integer.
  return static_cast<int>(std::floor(static_cast<double>(base_rejections) * gamma / (1.0 - gamma) +
                                     1e-9));
}

SelectionResult select_fdx(const Dag& dag, const PValueVector& p, double gamma, double alpha) {
  SelectionResult result = select_fwer_mg(dag, p, alpha);
  result.method = "fdx";
  result.gamma = gamma;
  const int n = dag.node_count();

  int budget = fdx_budget(result.rejection_count(), gamma);
  if (budget > 0) {
    // Deterministic topological order of the remaining subgraph (smallest
    // index first); any prefix of it keeps parents before children.
    std::vector<int> open_parents(static_cast<size_t>(n), 0);
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int v = 0; v < n; ++v) {
      if (result.rejected_mask[static_cast<size_t>(v)]) continue;
      for (int u : dag.parents(v))
        open_parents[static_cast<size_t>(v)] += !result.rejected_mask[static_cast<size_t>(u)];
      if (open_parents[static_cast<size_t>(v)] == 0) ready.push(v);
    }
    std::vector<int> extra;
    while (!ready.empty() && static_cast<int>(extra.size()) < budget) {
      int v = ready.top();
      ready.pop();
      extra.push_back(v);
      for (int w : dag.children(v))
        if (!result.rejected_mask[static_cast<size_t>(w)] &&
            --open_parents[static_cast<size_t>(w)] == 0)
          ready.push(w);
    }
    // Group the augmented prefix into dependency waves so rounds keep the
    // parents-in-earlier-rounds property.
    std::vector<int> wave(static_cast<size_t>(n), 0);
    int max_wave = 0;
    for (int v : extra) {
      int w = 1;
      for (int u : dag.parents(v))
        if (!result.rejected_mask[static_cast<size_t>(u)])
          w = std::max(w, wave[static_cast<size_t>(u)] + 1);
      wave[static_cast<size_t>(v)] = w;
      max_wave = std::max(max_wave, w);
    }
    std::vector<std::vector<int>> wave_rounds(static_cast<size_t>(max_wave));
    for (int v : extra) wave_rounds[static_cast<size_t>(wave[static_cast<size_t>(v)] - 1)].push_back(v);
    for (int v : extra) result.rejected_mask[static_cast<size_t>(v)] = 1;
    for (auto& r : wave_rounds) result.rounds.push_back(std::move(r));
  }
  finalize(result);
  return result;
}

DaggerConstants dagger_constants(const Dag& dag) {
  const int n = dag.node_count();
  DaggerConstants k;
  k.eff_leaves.assign(static_cast<size_t>(n), 0.0);
  k.eff_nodes.assign(static_cast<size_t>(n), 0.0);
  k.total_leaves = static_cast<int>(dag.leaves().size());

  auto topo = dag.topo_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    int v = *it;
    if (dag.is_leaf(v)) {
      k.eff_leaves[static_cast<size_t>(v)] = 1.0;
      k.eff_nodes[static_cast<size_t>(v)] = 1.0;
      continue;
    }
    double ell = 0.0, m = 1.0;
    for (int w : dag.children(v)) {
      auto np = static_cast<double>(dag.parents(w).size());
      ell += k.eff_leaves[static_cast<size_t>(w)] / np;
      m += k.eff_nodes[static_cast<size_t>(w)] / np;
    }
    k.eff_leaves[static_cast<size_t>(v)] = ell;
    k.eff_nodes[static_cast<size_t>(v)] = m;
  }
  return k;
}

double dagger_threshold(double alpha, double eff_leaves, int total_leaves, double eff_nodes,
                        int r, int prior_rejections) {
  return alpha * (eff_leaves / static_cast<double>(total_leaves)) *
         (eff_nodes + static_cast<double>(r) + static_cast<double>(prior_rejections) - 1.0) /
         eff_nodes;
}

SelectionResult select_fdr_dagger(const Dag& dag, const PValueVector& p, double alpha) {
  check_alpha(alpha);
  check_aligned(dag, p);
  const int n = dag.node_count();

  SelectionResult result;
  result.method = "fdr-dagger";
  result.alpha = alpha;
  result.rejected_mask.assign(static_cast<size_t>(n), 0);
  result.thresholds.assign(static_cast<size_t>(n), kNaN);

  const DaggerConstants k = dagger_constants(dag);
  const auto levels = dag.depth_partition();

  int prior = 0;  // sum of R_j over completed depths
  for (const auto& level : levels) {
    std::vector<int> cand;
    for (int v : level) {
      bool eligible = true;
      for (int u : dag.parents(v))
        if (!result.rejected_mask[static_cast<size_t>(u)]) {
          eligible = false;
          break;
        }
      if (eligible) cand.push_back(v);
    }
    if (cand.empty()) continue;
    const int nd = static_cast<int>(cand.size());

    auto accepts = [&](int v, int r) {
      return p[static_cast<size_t>(v)] <=
             dagger_threshold(alpha, k.eff_leaves[static_cast<size_t>(v)], k.total_leaves,
                              k.eff_nodes[static_cast<size_t>(v)], r, prior);
    };

    // Thresholds rise with the rank, so each candidate has a minimal
    // qualifying rank; find it by bisection, then run the step-up scan on
    // the rank counts.
    std::vector<int> min_rank(static_cast<size_t>(nd));
    std::vector<int> count(static_cast<size_t>(nd) + 2, 0);
    for (int i = 0; i < nd; ++i) {
      int v = cand[static_cast<size_t>(i)];
      int lo = 1, hi = nd + 1;  // nd+1 means no rank qualifies
      while (lo < hi) {
        int mid = lo + (hi - lo) / 2;
        if (accepts(v, mid))
          hi = mid;
        else
          lo = mid + 1;
      }
      min_rank[static_cast<size_t>(i)] = lo;
      if (lo <= nd) ++count[static_cast<size_t>(lo)];
    }
    for (int r = 1; r <= nd; ++r) count[static_cast<size_t>(r)] += count[static_cast<size_t>(r) - 1];

    int rd = 0;
    for (int r = nd; r >= 1; --r)
      if (count[static_cast<size_t>(r)] >= r) {
        rd = r;
        break;
      }

    std::vector<int> newly;
    for (int i = 0; i < nd; ++i) {
      int v = cand[static_cast<size_t>(i)];
      result.thresholds[static_cast<size_t>(v)] =
          dagger_threshold(alpha, k.eff_leaves[static_cast<size_t>(v)], k.total_leaves,
                           k.eff_nodes[static_cast<size_t>(v)], rd, prior);
      if (rd >= 1 && min_rank[static_cast<size_t>(i)] <= rd) newly.push_back(v);
    }
    for (int v : newly) result.rejected_mask[static_cast<size_t>(v)] = 1;
    if (!newly.empty()) result.rounds.push_back(std::move(newly));
    prior += rd;
  }
  finalize(result);
  return result;
}

SelectionResult select_bh(const PValueVector& p, double alpha) {
  check_alpha(alpha);
  const int n = static_cast<int>(p.size());

  SelectionResult result;
  result.method = "bh";
  result.alpha = alpha;
  result.rejected_mask.assign(static_cast<size_t>(n), 0);
  result.thresholds.assign(static_cast<size_t>(n), kNaN);
  if (n == 0) return result;

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return p[static_cast<size_t>(a)] != p[static_cast<size_t>(b)]
               ? p[static_cast<size_t>(a)] < p[static_cast<size_t>(b)]
               : a < b;
  });

  int khat = 0;
  for (int kk = n; kk >= 1; --kk) {
    if (p[static_cast<size_t>(order[static_cast<size_t>(kk) - 1])] <=
        alpha * static_cast<double>(kk) / static_cast<double>(n)) {
      khat = kk;
      break;
    }
  }
  if (khat > 0) {
    double cutoff = alpha * static_cast<double>(khat) / static_cast<double>(n);
    std::vector<int> round;
    for (int i = 0; i < khat; ++i) {
      int v = order[static_cast<size_t>(i)];
      result.rejected_mask[static_cast<size_t>(v)] = 1;
      round.push_back(v);
    }
    std::sort(round.begin(), round.end());
    result.rounds.push_back(std::move(round));
    for (int v = 0; v < n; ++v) result.thresholds[static_cast<size_t>(v)] = cutoff;
  }
  finalize(result);
  return result;
}

}  // namespace dagsmooth
