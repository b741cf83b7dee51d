#include "dagsmooth/graph.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "dagsmooth/errors.hpp"

namespace dagsmooth {

namespace {

// CSR from (key, value) pairs; keys in [0, n).
void build_csr(int n, const std::vector<std::pair<int, int>>& pairs, std::vector<int>& off,
               std::vector<int>& dat) {
  off.assign(static_cast<size_t>(n) + 1, 0);
  for (const auto& [k, v] : pairs) {
    (void)v;
    ++off[static_cast<size_t>(k) + 1];
  }
  for (int i = 0; i < n; ++i) off[static_cast<size_t>(i) + 1] += off[static_cast<size_t>(i)];
  dat.resize(pairs.size());
  std::vector<int> cursor(off.begin(), off.end() - 1);
  for (const auto& [k, v] : pairs) dat[static_cast<size_t>(cursor[static_cast<size_t>(k)]++)] = v;
  for (int i = 0; i < n; ++i)
    std::sort(dat.begin() + off[static_cast<size_t>(i)], dat.begin() + off[static_cast<size_t>(i) + 1]);
}

}  // namespace

void Dag::check_node(int v) const {
  if (v < 0 || v >= n_)
    throw IndexOutOfRange("node index " + std::to_string(v) + " outside [0, " +
                          std::to_string(n_) + ")");
}

Dag Dag::build(int node_count, std::span<const std::pair<int, int>> edges) {
  if (node_count < 0) throw IndexOutOfRange("negative node count");
  Dag d;
  d.n_ = node_count;
  d.edges_.assign(edges.begin(), edges.end());

  for (const auto& [u, v] : d.edges_) {
    if (u < 0 || u >= node_count || v < 0 || v >= node_count)
      throw IndexOutOfRange("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") outside [0, " + std::to_string(node_count) + ")");
    if (u == v) throw DuplicateEdge("self-loop at node " + std::to_string(u));
  }
  {
    auto sorted = d.edges_;
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end())
      throw DuplicateEdge("duplicate edge (" + std::to_string(dup->first) + ", " +
                          std::to_string(dup->second) + ")");
  }

  build_csr(node_count, d.edges_, d.child_off_, d.child_dat_);
  {
    std::vector<std::pair<int, int>> rev;
    rev.reserve(d.edges_.size());
    for (const auto& [u, v] : d.edges_) rev.emplace_back(v, u);
    build_csr(node_count, rev, d.parent_off_, d.parent_dat_);
  }

  // Kahn's algorithm, smallest index first.
  d.topo_.reserve(static_cast<size_t>(node_count));
  {
    std::vector<int> indeg(static_cast<size_t>(node_count), 0);
    for (int v = 0; v < node_count; ++v)
      indeg[static_cast<size_t>(v)] = static_cast<int>(d.parents(v).size());
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int v = 0; v < node_count; ++v)
      if (indeg[static_cast<size_t>(v)] == 0) ready.push(v);
    while (!ready.empty()) {
      int v = ready.top();
      ready.pop();
      d.topo_.push_back(v);
      for (int w : d.children(v))
        if (--indeg[static_cast<size_t>(w)] == 0) ready.push(w);
    }
    if (static_cast<int>(d.topo_.size()) != node_count)
      throw CycleDetected("edge set admits a directed cycle");
  }

  // Longest-path depths; roots are depth 1.
  d.depth_.assign(static_cast<size_t>(node_count), 1);
  d.max_depth_ = node_count > 0 ? 1 : 0;
  for (int v : d.topo_) {
    for (int u : d.parents(v))
      d.depth_[static_cast<size_t>(v)] =
          std::max(d.depth_[static_cast<size_t>(v)], d.depth_[static_cast<size_t>(u)] + 1);
    d.max_depth_ = std::max(d.max_depth_, d.depth_[static_cast<size_t>(v)]);
  }

  for (int v = 0; v < node_count; ++v) {
    if (d.children(v).empty()) d.leaves_.push_back(v);
    if (d.parents(v).empty()) d.roots_.push_back(v);
  }

  // Descendant closures in one reverse-topological sweep: a node's closure is
  // itself plus the union of its children's closures, stored sorted.
  {
    std::vector<std::vector<int>> clo(static_cast<size_t>(node_count));
    size_t total = 0;
    for (auto it = d.topo_.rbegin(); it != d.topo_.rend(); ++it) {
      int v = *it;
      auto& out = clo[static_cast<size_t>(v)];
      size_t cap = 1;
      for (int w : d.children(v)) cap += clo[static_cast<size_t>(w)].size();
      out.reserve(cap);
      out.push_back(v);
      for (int w : d.children(v)) {
        const auto& cw = clo[static_cast<size_t>(w)];
        out.insert(out.end(), cw.begin(), cw.end());
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      total += out.size();
    }
    d.closure_off_.assign(static_cast<size_t>(node_count) + 1, 0);
    d.closure_dat_.reserve(total);
    for (int v = 0; v < node_count; ++v) {
      const auto& cv = clo[static_cast<size_t>(v)];
      d.closure_dat_.insert(d.closure_dat_.end(), cv.begin(), cv.end());
      d.closure_off_[static_cast<size_t>(v) + 1] = static_cast<int>(d.closure_dat_.size());
    }
  }

  return d;
}

std::span<const int> Dag::children(int v) const {
  check_node(v);
  return {child_dat_.data() + child_off_[static_cast<size_t>(v)],
          static_cast<size_t>(child_off_[static_cast<size_t>(v) + 1] -
                              child_off_[static_cast<size_t>(v)])};
}

std::span<const int> Dag::parents(int v) const {
  check_node(v);
  return {parent_dat_.data() + parent_off_[static_cast<size_t>(v)],
          static_cast<size_t>(parent_off_[static_cast<size_t>(v) + 1] -
                              parent_off_[static_cast<size_t>(v)])};
}

std::span<const int> Dag::descendant_closure(int v) const {
  check_node(v);
  return {closure_dat_.data() + closure_off_[static_cast<size_t>(v)],
          static_cast<size_t>(closure_off_[static_cast<size_t>(v) + 1] -
                              closure_off_[static_cast<size_t>(v)])};
}

int Dag::depth(int v) const {
  check_node(v);
  return depth_[static_cast<size_t>(v)];
}

std::vector<std::vector<int>> Dag::depth_partition() const {
  std::vector<std::vector<int>> part(static_cast<size_t>(max_depth_));
  for (int v = 0; v < n_; ++v) part[static_cast<size_t>(depth_[static_cast<size_t>(v)] - 1)].push_back(v);
  return part;
}

bool TruthAssignment::upward_closed(const Dag& dag) const {
  if (static_cast<int>(nonnull.size()) != dag.node_count()) return false;
  for (const auto& [u, v] : dag.edges())
    if (nonnull[static_cast<size_t>(v)] && !nonnull[static_cast<size_t>(u)]) return false;
  return true;
}

int TruthAssignment::signal_count() const {
  int c = 0;
  for (auto f : nonnull) c += f != 0;
  return c;
}

}  // namespace dagsmooth
