#include "dagsmooth/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "dagsmooth/errors.hpp"
#include "dagsmooth/parallel.hpp"
#include "dagsmooth/rng.hpp"

namespace dagsmooth {

namespace {

std::string format_number(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

// Complete tree with `levels` levels in breadth-first layout: node i's
// children are b*i+1 .. b*i+b.
Dag build_complete_tree(int levels, int branching) {
  if (levels < 1 || branching < 1) throw InvalidRecipe("tree needs levels >= 1, branching >= 1");
  long long total = 0, layer = 1;
  for (int d = 0; d < levels; ++d) {
    total += layer;
    layer *= branching;
    if (total > 10'000'000) throw InvalidRecipe("tree recipe too large");
  }
  const int n = static_cast<int>(total);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<size_t>(n) - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 1; j <= branching; ++j) {
      long long c = static_cast<long long>(branching) * i + j;
      if (c >= n) break;
      edges.emplace_back(i, static_cast<int>(c));
    }
  return Dag::build(n, edges);
}

Dag build_bipartite(int n_roots, int n_leaves, int fan_out, std::uint64_t seed) {
  if (n_roots < 1 || n_leaves < 1) throw InvalidRecipe("bipartite needs roots and leaves");
  if (fan_out < 1 || fan_out > n_leaves)
    throw InvalidRecipe("bipartite fan-out must lie in [1, #leaves]");
  RngStream rng(seed);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<size_t>(n_roots) * fan_out);
  for (int r = 0; r < n_roots; ++r) {
    auto picks = rng.sample_without_replacement(n_leaves, fan_out);
    std::sort(picks.begin(), picks.end());
    for (int l : picks) edges.emplace_back(r, n_roots + l);
  }
  return Dag::build(n_roots + n_leaves, edges);
}

Dag build_hourglass(int n_roots, int n_middle, int n_leaves, double edge_prob,
                    std::uint64_t seed) {
  if (n_roots < 1 || n_middle < 1 || n_leaves < 1) throw InvalidRecipe("hourglass layer empty");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
    throw InvalidRecipe("hourglass edge probability outside [0,1]");
  RngStream rng(seed);
  const int mid0 = n_roots, leaf0 = n_roots + n_middle;
  std::set<std::pair<int, int>> edges;
  for (int r = 0; r < n_roots; ++r)
    for (int m = 0; m < n_middle; ++m)
      if (rng.uniform() < edge_prob) edges.emplace(r, mid0 + m);
  for (int m = 0; m < n_middle; ++m)
    for (int l = 0; l < n_leaves; ++l)
      if (rng.uniform() < edge_prob) edges.emplace(mid0 + m, leaf0 + l);

  // Repair pass: random admissible edges until every root has a child, every
  // middle node has a parent and a child, and every leaf has a parent.
  std::vector<int> out_deg(static_cast<size_t>(leaf0 + n_leaves), 0);
  std::vector<int> in_deg(static_cast<size_t>(leaf0 + n_leaves), 0);
  for (const auto& [u, v] : edges) {
    ++out_deg[static_cast<size_t>(u)];
    ++in_deg[static_cast<size_t>(v)];
  }
  for (int r = 0; r < n_roots; ++r)
    if (out_deg[static_cast<size_t>(r)] == 0) {
      int m = mid0 + rng.uniform_int(0, n_middle - 1);
      edges.emplace(r, m);
      ++out_deg[static_cast<size_t>(r)];
      ++in_deg[static_cast<size_t>(m)];
    }
  for (int m = mid0; m < leaf0; ++m) {
    if (in_deg[static_cast<size_t>(m)] == 0) {
      int r = rng.uniform_int(0, n_roots - 1);
      edges.emplace(r, m);
      ++in_deg[static_cast<size_t>(m)];
    }
    if (out_deg[static_cast<size_t>(m)] == 0) {
      int l = leaf0 + rng.uniform_int(0, n_leaves - 1);
      edges.emplace(m, l);
      ++out_deg[static_cast<size_t>(m)];
      ++in_deg[static_cast<size_t>(l)];
    }
  }
  for (int l = leaf0; l < leaf0 + n_leaves; ++l)
    if (in_deg[static_cast<size_t>(l)] == 0) {
      int m = mid0 + rng.uniform_int(0, n_middle - 1);
      edges.emplace(m, l);
      ++in_deg[static_cast<size_t>(l)];
    }

  std::vector<std::pair<int, int>> edge_list(edges.begin(), edges.end());
  return Dag::build(leaf0 + n_leaves, edge_list);
}

Dag build_layered(int layers, int width, int parents_per_node, std::uint64_t seed) {
  if (layers < 1 || width < 1) throw InvalidRecipe("layered recipe needs layers and width >= 1");
  if (parents_per_node < 1 || parents_per_node > width)
    throw InvalidRecipe("layered parent count must lie in [1, width]");
  RngStream rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int layer = 1; layer < layers; ++layer) {
    int above = (layer - 1) * width;
    int base = layer * width;
    for (int i = 0; i < width; ++i) {
      auto picks = rng.sample_without_replacement(width, parents_per_node);
      std::sort(picks.begin(), picks.end());
      for (int p : picks) edges.emplace_back(above + p, base + i);
    }
  }
  return Dag::build(layers * width, edges);
}

}  // namespace

GraphRecipe GraphRecipe::deep_tree(int levels, int branching) {
  GraphRecipe r;
  r.kind = GraphKind::deep_tree;
  r.levels = levels;
  r.branching = branching;
  return r;
}

GraphRecipe GraphRecipe::wide_tree(int levels, int branching) {
  GraphRecipe r = deep_tree(levels, branching);
  r.kind = GraphKind::wide_tree;
  return r;
}

GraphRecipe GraphRecipe::edgeless(int nodes) {
  GraphRecipe r;
  r.kind = GraphKind::edgeless;
  r.n_roots = nodes;
  return r;
}

GraphRecipe GraphRecipe::bipartite(int n_roots, int n_leaves, int fan_out, std::uint64_t seed) {
  GraphRecipe r;
  r.kind = GraphKind::bipartite;
  r.n_roots = n_roots;
  r.n_leaves = n_leaves;
  r.fan_out = fan_out;
  r.seed = seed;
  return r;
}

GraphRecipe GraphRecipe::hourglass(int n_roots, int n_middle, int n_leaves, double edge_prob,
                                   std::uint64_t seed) {
  GraphRecipe r;
  r.kind = GraphKind::hourglass;
  r.hg_roots = n_roots;
  r.hg_middle = n_middle;
  r.hg_leaves = n_leaves;
  r.edge_prob = edge_prob;
  r.seed = seed;
  return r;
}

GraphRecipe GraphRecipe::layered_random(int layers, int layer_width, int parents_per_node,
                                        std::uint64_t seed) {
  GraphRecipe r;
  r.kind = GraphKind::layered_random;
  r.layers = layers;
  r.layer_width = layer_width;
  r.parents_per_node = parents_per_node;
  r.seed = seed;
  return r;
}

GraphRecipe GraphRecipe::trigenic_graph(TrigenicSpec spec) {
  GraphRecipe r;
  r.kind = GraphKind::trigenic;
  r.trigenic = std::move(spec);
  return r;
}

std::string GraphRecipe::name() const {
  switch (kind) {
    case GraphKind::deep_tree:
      return "deep-tree:" + std::to_string(levels) + ":" + std::to_string(branching);
    case GraphKind::wide_tree:
      return "wide-tree:" + std::to_string(levels) + ":" + std::to_string(branching);
    case GraphKind::bipartite:
      return "bipartite:" + std::to_string(n_roots) + ":" + std::to_string(n_leaves) + ":" +
             std::to_string(fan_out);
    case GraphKind::hourglass:
      return "hourglass:" + std::to_string(hg_roots) + ":" + std::to_string(hg_middle) + ":" +
             std::to_string(hg_leaves) + ":" + format_number(edge_prob);
    case GraphKind::layered_random:
      return "layered:" + std::to_string(layers) + ":" + std::to_string(layer_width) + ":" +
             std::to_string(parents_per_node);
    case GraphKind::trigenic:
      return "trigenic";
    case GraphKind::edgeless:
      return "edgeless:" + std::to_string(n_roots);
  }
  return "unknown";
}

Dag gen_graph(const GraphRecipe& recipe) {
  switch (recipe.kind) {
    case GraphKind::deep_tree:
    case GraphKind::wide_tree:
      return build_complete_tree(recipe.levels, recipe.branching);
    case GraphKind::bipartite:
      return build_bipartite(recipe.n_roots, recipe.n_leaves, recipe.fan_out, recipe.seed);
    case GraphKind::hourglass:
      return build_hourglass(recipe.hg_roots, recipe.hg_middle, recipe.hg_leaves,
                             recipe.edge_prob, recipe.seed);
    case GraphKind::layered_random:
      return build_layered(recipe.layers, recipe.layer_width, recipe.parents_per_node,
                           recipe.seed);
    case GraphKind::trigenic:
      return build_trigenic(recipe.trigenic).first;
    case GraphKind::edgeless:
      if (recipe.n_roots < 1) throw InvalidRecipe("edgeless recipe needs at least one node");
      return Dag::build(recipe.n_roots, std::vector<std::pair<int, int>>{});
  }
  throw InvalidRecipe("unknown graph kind");
}

std::pair<Dag, std::vector<std::string>> build_trigenic(const TrigenicSpec& spec) {
  std::map<std::string, int> gene_index;
  std::vector<std::string> labels;
  for (const auto& g : spec.genes) {
    if (gene_index.count(g)) throw InvalidRecipe("duplicate gene '" + g + "'");
    gene_index[g] = static_cast<int>(labels.size());
    labels.push_back(g);
  }
  auto gene_of = [&](const std::string& g) {
    auto it = gene_index.find(g);
    if (it == gene_index.end()) throw InvalidRecipe("unknown gene '" + g + "'");
    return it->second;
  };

  std::vector<std::pair<int, int>> edges;
  std::map<std::pair<int, int>, int> pair_index;  // sorted gene ids -> node
  for (const auto& pr : spec.pairs) {
    int a = gene_of(pr[0]), b = gene_of(pr[1]);
    if (a == b) throw InvalidRecipe("pair repeats gene '" + pr[0] + "'");
    auto key = std::minmax(a, b);
    if (pair_index.count({key.first, key.second}))
      throw InvalidRecipe("duplicate pair '" + pr[0] + ":" + pr[1] + "'");
    int node = static_cast<int>(labels.size());
    pair_index[{key.first, key.second}] = node;
    labels.push_back(pr[0] + ":" + pr[1]);
    edges.emplace_back(a, node);
    edges.emplace_back(b, node);
  }
  std::set<std::array<int, 3>> seen_triplets;
  for (const auto& tr : spec.triplets) {
    int a = gene_of(tr[0]), b = gene_of(tr[1]), c = gene_of(tr[2]);
    std::array<int, 3> key{a, b, c};
    std::sort(key.begin(), key.end());
    if (key[0] == key[1] || key[1] == key[2])
      throw InvalidRecipe("triplet repeats a gene: '" + tr[0] + ":" + tr[1] + ":" + tr[2] + "'");
    if (!seen_triplets.insert(key).second)
      throw InvalidRecipe("duplicate triplet '" + tr[0] + ":" + tr[1] + ":" + tr[2] + "'");
    int node = static_cast<int>(labels.size());
    labels.push_back(tr[0] + ":" + tr[1] + ":" + tr[2]);
    // Connect to each constituent pair that was actually measured.
    const std::array<std::pair<int, int>, 3> legs = {
        std::minmax(a, b), std::minmax(a, c), std::minmax(b, c)};
    for (const auto& leg : legs) {
      auto it = pair_index.find(leg);
      if (it != pair_index.end()) edges.emplace_back(it->second, node);
    }
  }
  return {Dag::build(static_cast<int>(labels.size()), edges), std::move(labels)};
}

AlternativeScheme AlternativeScheme::global_normal() {
  AlternativeScheme s;
  s.kind = AltKind::global_normal;
  s.nonnull_prob = 0.5;
  return s;
}

AlternativeScheme AlternativeScheme::incremental_normal() {
  AlternativeScheme s;
  s.kind = AltKind::incremental_normal;
  s.nonnull_prob = 0.5;
  return s;
}

AlternativeScheme AlternativeScheme::global_beta() {
  AlternativeScheme s;
  s.kind = AltKind::global_beta;
  s.nonnull_prob = 0.2;
  return s;
}

AlternativeScheme AlternativeScheme::incremental_beta() {
  AlternativeScheme s;
  s.kind = AltKind::incremental_beta;
  s.nonnull_prob = 0.2;
  return s;
}

AlternativeScheme AlternativeScheme::layers_beta(int nonnull_depth) {
  AlternativeScheme s;
  s.kind = AltKind::layers_beta;
  s.nonnull_depth = nonnull_depth;
  return s;
}

bool AlternativeScheme::is_beta() const {
  return kind == AltKind::global_beta || kind == AltKind::incremental_beta ||
         kind == AltKind::layers_beta;
}

std::string AlternativeScheme::name() const {
  switch (kind) {
    case AltKind::global_normal:
      return "global-normal";
    case AltKind::incremental_normal:
      return "incremental-normal";
    case AltKind::global_beta:
      return "global-beta";
    case AltKind::incremental_beta:
      return "incremental-beta";
    case AltKind::layers_beta:
      return "layers-beta:" + std::to_string(nonnull_depth);
  }
  return "unknown";
}

TruthAssignment gen_truth(const Dag& dag, const AlternativeScheme& scheme, std::uint64_t seed) {
  const int n = dag.node_count();
  TruthAssignment truth;
  truth.nonnull.assign(static_cast<size_t>(n), 0);
  auto topo = dag.topo_order();

  if (scheme.kind == AltKind::layers_beta) {
    for (int v = 0; v < n; ++v)
      truth.nonnull[static_cast<size_t>(v)] = dag.depth(v) <= scheme.nonnull_depth;
    return truth;
  }

  RngStream rng(seed);
  const bool incremental =
      scheme.kind == AltKind::incremental_normal || scheme.kind == AltKind::incremental_beta;
  if (incremental) {
    // Leaves flip independently; an internal node is nonnull when any child is.
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      int v = *it;
      if (dag.is_leaf(v)) {
        truth.nonnull[static_cast<size_t>(v)] = rng.uniform() < scheme.nonnull_prob;
      } else {
        for (int w : dag.children(v))
          if (truth.nonnull[static_cast<size_t>(w)]) {
            truth.nonnull[static_cast<size_t>(v)] = 1;
            break;
          }
      }
    }
  } else {
    // Every node flips independently, then the flags close upward.
    for (auto it = topo.rbegin(); it != topo.rend(); ++it)
      truth.nonnull[static_cast<size_t>(*it)] = rng.uniform() < scheme.nonnull_prob;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      int v = *it;
      if (truth.nonnull[static_cast<size_t>(v)])
        for (int u : dag.parents(v)) truth.nonnull[static_cast<size_t>(u)] = 1;
    }
  }
  return truth;
}

double pvalue_from_zscore(double z) noexcept { return std_normal_cdf(-z); }

namespace {

double nonnull_beta_shape(const AlternativeScheme& scheme, int depth, int max_depth) {
  switch (scheme.kind) {
    case AltKind::global_beta:
      return std::exp(scheme.beta_log_a);
    case AltKind::incremental_beta:
      return std::exp(scheme.beta_log_a - scheme.beta_slope * (max_depth - depth));
    case AltKind::layers_beta:
      return scheme.fixed_beta_a;
    default:
      throw ConfigError("scheme '" + scheme.name() + "' has no Beta alternative");
  }
}

}  // namespace

PValueVector gen_pvalues_independent(const Dag& dag, const TruthAssignment& truth,
                                     const AlternativeScheme& scheme, std::uint64_t seed) {
  const int n = dag.node_count();
  if (static_cast<int>(truth.nonnull.size()) != n)
    throw AlignmentError("truth assignment misaligned with graph");
  RngStream rng(seed);
  PValueVector p(static_cast<size_t>(n));
  const int max_d = dag.max_depth();
  const bool normal_scheme =
      scheme.kind == AltKind::global_normal || scheme.kind == AltKind::incremental_normal;
  for (int v = 0; v < n; ++v) {
    bool signal = truth.nonnull[static_cast<size_t>(v)] != 0;
    if (normal_scheme) {
      double mu = 0.0;
      if (signal)
        mu = scheme.kind == AltKind::global_normal
                 ? scheme.normal_mean
                 : scheme.normal_base + scheme.normal_slope * (max_d - dag.depth(v));
      p[static_cast<size_t>(v)] = pvalue_from_zscore(mu + rng.normal());
    } else {
      p[static_cast<size_t>(v)] =
          signal ? rng.beta(nonnull_beta_shape(scheme, dag.depth(v), max_d), scheme.beta_b)
                 : rng.uniform();
    }
  }
  return p;
}

CopulaModel build_copula_model(const Dag& dag, const TruthAssignment& truth) {
  const int n = dag.node_count();
  CopulaModel model;
  model.null_slot.assign(static_cast<size_t>(n), -1);
  model.scale.assign(static_cast<size_t>(n), 1.0);

  // Slots in topological order so rows above are filled before use.
  for (int v : dag.topo_order())
    if (!truth.nonnull[static_cast<size_t>(v)]) model.null_slot[static_cast<size_t>(v)] = model.null_count++;
  model.covariance.assign(static_cast<size_t>(model.null_count) * model.null_count, 0.0);

  auto cov_at = [&](int a, int b) -> double& {
    return model.covariance[static_cast<size_t>(a) * model.null_count + b];
  };

  for (int v : dag.topo_order()) {
    int sv = model.null_slot[static_cast<size_t>(v)];
    if (sv < 0) continue;
    std::vector<int> null_parents;
    for (int u : dag.parents(v))
      if (model.null_slot[static_cast<size_t>(u)] >= 0)
        null_parents.push_back(model.null_slot[static_cast<size_t>(u)]);
    if (null_parents.empty()) {
      cov_at(sv, sv) = 1.0;
    } else {
      const double k = static_cast<double>(null_parents.size());
      // Cov(v, u) = mean of parents' covariances with u; Var(v) = 1 + the
      // mean-of-parents variance.
      for (int u = 0; u < sv; ++u) {
        double s = 0.0;
        for (int w : null_parents) s += cov_at(w, u);
        double c = s / k;
        cov_at(sv, u) = c;
        cov_at(u, sv) = c;
      }
      double s2 = 0.0;
      for (int w1 : null_parents)
        for (int w2 : null_parents) s2 += cov_at(w1, w2);
      cov_at(sv, sv) = 1.0 + s2 / (k * k);
    }
    model.scale[static_cast<size_t>(v)] = std::sqrt(cov_at(sv, sv));
  }
  return model;
}

PValueVector gen_pvalues_copula(const Dag& dag, const TruthAssignment& truth,
                                const AlternativeScheme& scheme, std::uint64_t seed) {
  return gen_pvalues_copula(dag, truth, scheme, seed, build_copula_model(dag, truth));
}

PValueVector gen_pvalues_copula(const Dag& dag, const TruthAssignment& truth,
                                const AlternativeScheme& scheme, std::uint64_t seed,
                                const CopulaModel& model) {
  const int n = dag.node_count();
  if (static_cast<int>(truth.nonnull.size()) != n)
    throw AlignmentError("truth assignment misaligned with graph");
  if (!scheme.is_beta() && truth.signal_count() > 0)
    throw ConfigError("copula nulls pair with Beta alternatives; scheme '" + scheme.name() +
                      "' is not one");

  RngStream rng(seed);
  PValueVector p(static_cast<size_t>(n));
  std::vector<double> z(static_cast<size_t>(n), 0.0);
  const int max_d = dag.max_depth();

  for (int v : dag.topo_order()) {
    if (truth.nonnull[static_cast<size_t>(v)]) {
      p[static_cast<size_t>(v)] =
          rng.beta(nonnull_beta_shape(scheme, dag.depth(v), max_d), scheme.beta_b);
      continue;
    }
    double mean = 0.0;
    int k = 0;
    for (int u : dag.parents(v))
      if (!truth.nonnull[static_cast<size_t>(u)]) {
        mean += z[static_cast<size_t>(u)];
        ++k;
      }
    if (k > 0) mean /= static_cast<double>(k);
    z[static_cast<size_t>(v)] = mean + rng.normal();
    // Exact marginal uniformization.
    p[static_cast<size_t>(v)] =
        std_normal_cdf(z[static_cast<size_t>(v)] / model.scale[static_cast<size_t>(v)]);
  }
  return p;
}

TrialMetrics compute_metrics(const SelectionResult& result, const TruthAssignment& truth,
                             double gamma) {
  if (result.rejected_mask.size() != truth.nonnull.size())
    throw AlignmentError("selection result misaligned with truth assignment");
  int signals = 0, hits = 0, false_rejections = 0;
  for (size_t v = 0; v < truth.nonnull.size(); ++v) {
    bool rej = result.rejected_mask[v] != 0;
    if (truth.nonnull[v]) {
      ++signals;
      hits += rej;
    } else {
      false_rejections += rej;
    }
  }
  TrialMetrics m;
  m.power = signals > 0 ? static_cast<double>(hits) / signals
                        : (false_rejections == 0 ? 1.0 : 0.0);
  m.fdp = static_cast<double>(false_rejections) /
          std::max(1, result.rejection_count());
  m.any_false = false_rejections > 0;
  m.fdp_exceeds_gamma = m.fdp > gamma;
  return m;
}

std::string selector_name(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::fwer_mg:
      return "fwer-mg";
    case SelectorKind::fdx:
      return "fdx";
    case SelectorKind::fdr_dagger:
      return "fdr-dagger";
    case SelectorKind::bh:
      return "bh";
  }
  return "unknown";
}

SelectorKind parse_selector(std::string_view name) {
  if (name == "fwer-mg") return SelectorKind::fwer_mg;
  if (name == "fdx") return SelectorKind::fdx;
  if (name == "fdr-dagger") return SelectorKind::fdr_dagger;
  if (name == "bh") return SelectorKind::bh;
  throw ConfigError("unknown selection method '" + std::string(name) + "'");
}

std::vector<double> default_alpha_grid() {
  return {0.01, 0.02, 0.03, 0.04, 0.05, 0.08, 0.1, 0.15, 0.2, 0.25};
}

TrialStreams trial_streams(std::uint64_t master_seed, int trial, int recipe_idx, int scheme_idx) {
  std::uint64_t trial_seed = derive_seed(master_seed, static_cast<std::uint64_t>(trial));
  std::uint64_t base = derive_seed(derive_seed(trial_seed, static_cast<std::uint64_t>(recipe_idx)),
                                   static_cast<std::uint64_t>(scheme_idx));
  TrialStreams s;
  s.truth_seed = derive_seed(base, 1);
  s.pvalue_seed = derive_seed(base, 2);
  s.graph_seed = derive_seed(base, 3);
  return s;
}

namespace {

SelectionResult run_selector(SelectorKind kind, const Dag& dag, const PValueVector& p,
                             double alpha, double gamma) {
  switch (kind) {
    case SelectorKind::fwer_mg:
      return select_fwer_mg(dag, p, alpha);
    case SelectorKind::fdx:
      return select_fdx(dag, p, gamma, alpha);
    case SelectorKind::fdr_dagger:
      return select_fdr_dagger(dag, p, alpha);
    case SelectorKind::bh:
      return select_bh(p, alpha);
  }
  throw ConfigError("unknown selector");
}

double sample_sd(const std::vector<double>& xs) {
  const size_t n = xs.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

void aggregate(BenchmarkCell& cell) {
  const auto n = static_cast<double>(cell.trials.size());
  std::vector<double> power, fdp;
  power.reserve(cell.trials.size());
  fdp.reserve(cell.trials.size());
  double any = 0.0, exceed = 0.0;
  for (const auto& t : cell.trials) {
    power.push_back(t.power);
    fdp.push_back(t.fdp);
    any += t.any_false;
    exceed += t.fdp_exceeds_gamma;
  }
  cell.mean_power = 0.0;
  cell.err_fdr = 0.0;
  for (size_t i = 0; i < power.size(); ++i) {
    cell.mean_power += power[i];
    cell.err_fdr += fdp[i];
  }
  cell.mean_power /= n;
  cell.err_fdr /= n;
  cell.err_fwer = any / n;
  cell.err_fdx = exceed / n;
  cell.se_power = sample_sd(power) / std::sqrt(n);
  cell.se_fdr = sample_sd(fdp) / std::sqrt(n);
  cell.se_fwer = std::sqrt(cell.err_fwer * (1.0 - cell.err_fwer) / n);
  cell.se_fdx = std::sqrt(cell.err_fdx * (1.0 - cell.err_fdx) / n);
}

}  // namespace

std::vector<BenchmarkCell> run_benchmark(const BenchmarkConfig& config) {
  if (config.recipes.empty() || config.schemes.empty() || config.smoothings.empty() ||
      config.selectors.empty() || config.alphas.empty())
    throw ConfigError("benchmark grid has an empty dimension");
  if (config.trials < 1) throw ConfigError("benchmark needs at least one trial");
  if (!(config.gamma >= 0.0 && config.gamma < 1.0))
    throw ConfigError("gamma must lie in [0, 1)");
  for (double a : config.alphas)
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  for (const auto& spec : config.smoothings) spec.validate();
  if (config.copula_nulls)
    for (const auto& s : config.schemes)
      if (!s.is_beta())
        throw ConfigError("copula nulls pair with Beta alternatives; scheme '" + s.name() +
                          "' is not one");

  const int n_recipes = static_cast<int>(config.recipes.size());
  const int n_schemes = static_cast<int>(config.schemes.size());
  const int n_smooth = static_cast<int>(config.smoothings.size());
  const int n_sel = static_cast<int>(config.selectors.size());
  const int n_alpha = static_cast<int>(config.alphas.size());

  std::vector<BenchmarkCell> cells;
  cells.reserve(static_cast<size_t>(n_recipes) * n_schemes * n_smooth * n_sel * n_alpha);
  for (int r = 0; r < n_recipes; ++r)
    for (int s = 0; s < n_schemes; ++s)
      for (int m = 0; m < n_smooth; ++m)
        for (int sel = 0; sel < n_sel; ++sel)
          for (int a = 0; a < n_alpha; ++a) {
            BenchmarkCell cell;
            cell.recipe_idx = r;
            cell.scheme_idx = s;
            cell.smoothing_idx = m;
            cell.selector = config.selectors[static_cast<size_t>(sel)];
            cell.alpha = config.alphas[static_cast<size_t>(a)];
            cell.trials.resize(static_cast<size_t>(config.trials));
            cells.push_back(std::move(cell));
          }
  auto cell_at = [&](int r, int s, int m, int sel, int a) -> BenchmarkCell& {
    size_t idx = (((static_cast<size_t>(r) * n_schemes + s) * n_smooth + m) * n_sel + sel) *
                     n_alpha +
                 a;
    return cells[idx];
  };

  for (int r = 0; r < n_recipes; ++r) {
    Dag fixed_graph;
    std::vector<Smoother> fixed_smoothers;
    if (!config.regenerate_graph_per_trial) {
      fixed_graph = gen_graph(config.recipes[static_cast<size_t>(r)]);
      fixed_smoothers.reserve(static_cast<size_t>(n_smooth));
      for (const auto& spec : config.smoothings) fixed_smoothers.emplace_back(fixed_graph, spec);
    }
    for (int s = 0; s < n_schemes; ++s) {
      const auto& scheme = config.schemes[static_cast<size_t>(s)];
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
      for (int t = 0; t < config.trials; ++t) {
        TrialStreams streams = trial_streams(config.seed, t, r, s);
        Dag local_graph;
        std::vector<Smoother> local_smoothers;
        const Dag* graph = &fixed_graph;
        const std::vector<Smoother>* smoothers = &fixed_smoothers;
        if (config.regenerate_graph_per_trial) {
          GraphRecipe recipe = config.recipes[static_cast<size_t>(r)];
          recipe.seed = streams.graph_seed;
          local_graph = gen_graph(recipe);
          local_smoothers.reserve(static_cast<size_t>(n_smooth));
          for (const auto& spec : config.smoothings)
            local_smoothers.emplace_back(local_graph, spec);
          graph = &local_graph;
          smoothers = &local_smoothers;
        }

        TruthAssignment truth = gen_truth(*graph, scheme, streams.truth_seed);
        PValueVector p =
            config.copula_nulls
                ? gen_pvalues_copula(*graph, truth, scheme, streams.pvalue_seed)
                : gen_pvalues_independent(*graph, truth, scheme, streams.pvalue_seed);

        for (int m = 0; m < n_smooth; ++m) {
          PValueVector pt = (*smoothers)[static_cast<size_t>(m)].apply(p);
          for (int sel = 0; sel < n_sel; ++sel)
            for (int a = 0; a < n_alpha; ++a) {
              SelectionResult res =
                  run_selector(config.selectors[static_cast<size_t>(sel)], *graph, pt,
                               config.alphas[static_cast<size_t>(a)], config.gamma);
              cell_at(r, s, m, sel, a).trials[static_cast<size_t>(t)] =
                  compute_metrics(res, truth, config.gamma);
            }
        }
      }
    }
  }

  for (auto& cell : cells) aggregate(cell);
  return cells;
}

}  // namespace dagsmooth
