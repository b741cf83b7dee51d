#include "dagsmooth/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "dagsmooth/errors.hpp"
#include "dagsmooth/parallel.hpp"
#include "dagsmooth/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dagsmooth {

namespace {

int thread_id() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

PValueVector null_uniforms(int n, std::uint64_t seed) {
  RngStream rng(seed);
  PValueVector p(static_cast<size_t>(n));
  for (auto& x : p) x = rng.uniform();
  return p;
}

}  // namespace

SuperUniformReport check_superuniformity(const Dag& dag, const SmoothingSpec& spec, int trials,
                                         std::uint64_t seed, std::span<const double> grid,
                                         NullModel null_model) {
  if (trials < 50000)
    throw ConfigError("super-uniformity check needs at least 50000 trials");
  if (grid.empty()) throw ConfigError("super-uniformity check needs a nonempty grid");
  const int n = dag.node_count();
  const int g = static_cast<int>(grid.size());

  const Smoother smoother(dag, spec);

  TruthAssignment all_null;
  all_null.nonnull.assign(static_cast<size_t>(n), 0);
  const CopulaModel model = null_model == NullModel::gaussian_copula
                                ? build_copula_model(dag, all_null)
                                : CopulaModel{};
  const AlternativeScheme dummy = AlternativeScheme::global_beta();

  const int workers = max_threads();
  std::vector<std::vector<std::int64_t>> counts(
      static_cast<size_t>(workers),
      std::vector<std::int64_t>(static_cast<size_t>(n) * g, 0));

#pragma omp parallel num_threads(workers)
  {
    auto& local = counts[static_cast<size_t>(thread_id())];
#pragma omp for schedule(static)
    for (int t = 0; t < trials; ++t) {
      std::uint64_t tseed = derive_seed(seed, static_cast<std::uint64_t>(t));
      PValueVector p = null_model == NullModel::gaussian_copula
                           ? gen_pvalues_copula(dag, all_null, dummy, tseed, model)
                           : null_uniforms(n, tseed);
      PValueVector pt = smoother.apply(p);
      for (int v = 0; v < n; ++v)
        for (int j = 0; j < g; ++j)
          local[static_cast<size_t>(v) * g + j] +=
              pt[static_cast<size_t>(v)] <= grid[static_cast<size_t>(j)];
    }
  }
  for (int w = 1; w < workers; ++w)
    for (size_t i = 0; i < counts[0].size(); ++i) counts[0][i] += counts[static_cast<size_t>(w)][i];

  SuperUniformReport report;
  report.grid.assign(grid.begin(), grid.end());
  report.trials = trials;
  report.pass = true;
  const double nn = static_cast<double>(trials);
  for (int v = 0; v < n; ++v) {
    SuperUniformNodeReport node;
    node.node = v;
    node.pass = true;
    for (int j = 0; j < g; ++j) {
      SuperUniformPoint pt;
      pt.c = grid[static_cast<size_t>(j)];
      pt.freq = static_cast<double>(counts[0][static_cast<size_t>(v) * g + j]) / nn;
      pt.bound = pt.c + 3.0 * std::sqrt(pt.c * (1.0 - pt.c) / nn);
      pt.pass = pt.freq <= pt.bound;
      node.pass = node.pass && pt.pass;
      node.points.push_back(pt);
    }
    report.pass = report.pass && node.pass;
    report.nodes.push_back(std::move(node));
  }
  return report;
}

std::string error_target_name(ErrorTarget target) {
  switch (target) {
    case ErrorTarget::fwer:
      return "fwer";
    case ErrorTarget::fdx:
      return "fdx";
    case ErrorTarget::fdr:
      return "fdr";
  }
  return "unknown";
}

namespace {

// Validity table for the error-control harness. Under independent nulls every
// implemented smoothing carries a guarantee for every selector; under the
// Gaussian copula only the identity and conservative Stouffer do.
bool guaranteed_combination(SmoothMethod method, bool copula_nulls) {
  if (!copula_nulls) return true;
  return method == SmoothMethod::none || method == SmoothMethod::conservative_stouffer;
}

}  // namespace

ErrorControlReport check_error_control(const BenchmarkConfig& config, ErrorTarget target) {
  for (const auto& spec : config.smoothings)
    if (!guaranteed_combination(spec.method, config.copula_nulls))
      throw ConfigError("no error-control guarantee for smoothing '" + spec.name() +
                        "' under dependent nulls");

  auto cells = run_benchmark(config);

  ErrorControlReport report;
  report.target = target;
  report.pass = true;
  const double nn = static_cast<double>(config.trials);
  for (const auto& cell : cells) {
    ErrorControlCell out;
    out.recipe = config.recipes[static_cast<size_t>(cell.recipe_idx)].name();
    out.scheme = config.schemes[static_cast<size_t>(cell.scheme_idx)].name();
    out.smoothing = config.smoothings[static_cast<size_t>(cell.smoothing_idx)].name();
    out.selector = selector_name(cell.selector);
    out.alpha = cell.alpha;
    switch (target) {
      case ErrorTarget::fwer:
        out.empirical = cell.err_fwer;
        out.bound = cell.alpha + 3.0 * std::sqrt(cell.alpha * (1.0 - cell.alpha) / nn);
        break;
      case ErrorTarget::fdx:
        out.empirical = cell.err_fdx;
        out.bound = cell.alpha + 3.0 * std::sqrt(cell.alpha * (1.0 - cell.alpha) / nn);
        break;
      case ErrorTarget::fdr:
        out.empirical = cell.err_fdr;
        out.bound = cell.alpha + 3.0 * cell.se_fdr;
        break;
    }
    out.pass = out.empirical <= out.bound;
    report.pass = report.pass && out.pass;
    report.cells.push_back(std::move(out));
  }
  return report;
}

PrdsReport prds_diagnostic(const Dag& dag, const SmoothingSpec& spec, int trials,
                           std::uint64_t seed, int null_node, int probe_count) {
  const Smoother smoother(dag, spec);
  return prds_diagnostic_transform(
      dag, [&smoother](const PValueVector& p) { return smoother.apply(p); }, trials, seed,
      null_node, probe_count);
}

PrdsReport prds_diagnostic_transform(
    const Dag& dag, const std::function<PValueVector(const PValueVector&)>& transform, int trials,
    std::uint64_t seed, int null_node, int probe_count) {
  constexpr int kBins = 10;
  if (trials < 200000) throw ConfigError("the dependence screen needs at least 200000 trials");
  const int n = dag.node_count();
  if (null_node < 0 || null_node >= n) throw IndexOutOfRange("conditioning node out of range");
  if (probe_count < 1) throw ConfigError("need at least one probe");

  // Pass 1: conditioning statistic per trial.
  std::vector<double> stat(static_cast<size_t>(trials));
  const int workers = max_threads();
#pragma omp parallel for schedule(static) num_threads(workers)
  for (int t = 0; t < trials; ++t) {
    PValueVector p = null_uniforms(n, derive_seed(seed, static_cast<std::uint64_t>(t)));
    stat[static_cast<size_t>(t)] = transform(p)[static_cast<size_t>(null_node)];
  }

  // Rank-based decile bins; conditioning on higher bins means conditioning on
  // larger values at the null node.
  std::vector<int> order(static_cast<size_t>(trials));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return stat[static_cast<size_t>(a)] != stat[static_cast<size_t>(b)]
               ? stat[static_cast<size_t>(a)] < stat[static_cast<size_t>(b)]
               : a < b;
  });
  std::vector<std::int8_t> bin(static_cast<size_t>(trials));
  std::vector<std::int64_t> bin_size(kBins, 0);
  for (int i = 0; i < trials; ++i) {
    int b = static_cast<int>((static_cast<std::int64_t>(i) * kBins) / trials);
    bin[static_cast<size_t>(order[static_cast<size_t>(i)])] = static_cast<std::int8_t>(b);
    ++bin_size[static_cast<size_t>(b)];
  }

  // Coordinate-threshold upper sets D = {x : x_j >= cut_j for j in coords}.
  PrdsReport report;
  report.null_node = null_node;
  report.trials = trials;
  report.probe_count = probe_count;
  report.probe_level = 0.001;
  report.expected_false = probe_count * report.probe_level;
  RngStream probe_rng(derive_seed(seed, 0x70726f6265ULL));
  report.probes.resize(static_cast<size_t>(probe_count));
  for (auto& probe : report.probes) {
    int width = probe_rng.uniform_int(1, std::min(3, std::max(1, n - 1)));
    std::vector<int> pool;
    for (int v = 0; v < n; ++v)
      if (v != null_node || n == 1) pool.push_back(v);
    auto picks = probe_rng.sample_without_replacement(static_cast<int>(pool.size()),
                                                      std::min<int>(width, static_cast<int>(pool.size())));
    for (int i : picks) probe.coords.push_back(pool[static_cast<size_t>(i)]);
    for (size_t i = 0; i < probe.coords.size(); ++i) probe.cut.push_back(probe_rng.uniform());
  }

  // Pass 2: membership counts per (probe, bin).
  std::vector<std::vector<std::int64_t>> counts(
      static_cast<size_t>(workers),
      std::vector<std::int64_t>(static_cast<size_t>(probe_count) * kBins, 0));
#pragma omp parallel num_threads(workers)
  {
    auto& local = counts[static_cast<size_t>(thread_id())];
#pragma omp for schedule(static)
    for (int t = 0; t < trials; ++t) {
      PValueVector p = null_uniforms(n, derive_seed(seed, static_cast<std::uint64_t>(t)));
      PValueVector pt = transform(p);
      int b = bin[static_cast<size_t>(t)];
      for (int j = 0; j < probe_count; ++j) {
        const auto& probe = report.probes[static_cast<size_t>(j)];
        bool member = true;
        for (size_t i = 0; i < probe.coords.size(); ++i)
          if (pt[static_cast<size_t>(probe.coords[i])] < probe.cut[i]) {
            member = false;
            break;
          }
        local[static_cast<size_t>(j) * kBins + b] += member;
      }
    }
  }
  for (int w = 1; w < workers; ++w)
    for (size_t i = 0; i < counts[0].size(); ++i) counts[0][i] += counts[static_cast<size_t>(w)][i];

  // One-sided trend test per probe: under positive dependence the membership
  // probability must not decrease across bins, so a significantly negative
  // Cochran-Armitage statistic is a violation.
  const double z_crit = std_normal_quantile(report.probe_level);
  report.violations = 0;
  for (int j = 0; j < probe_count; ++j) {
    auto& probe = report.probes[static_cast<size_t>(j)];
    double total = 0.0;
    for (int b = 0; b < kBins; ++b)
      total += static_cast<double>(counts[0][static_cast<size_t>(j) * kBins + b]);
    double pbar = total / static_cast<double>(trials);
    if (pbar <= 0.0 || pbar >= 1.0) {
      probe.degenerate = true;
      continue;
    }
    double tsum = 0.0, w1 = 0.0, w2 = 0.0;
    for (int b = 0; b < kBins; ++b) {
      double w = static_cast<double>(b) - (kBins - 1) / 2.0;
      double nb = static_cast<double>(bin_size[static_cast<size_t>(b)]);
      double xb = static_cast<double>(counts[0][static_cast<size_t>(j) * kBins + b]);
      tsum += w * (xb - nb * pbar);
      w1 += w * nb;
      w2 += w * w * nb;
    }
    double var = pbar * (1.0 - pbar) * (w2 - w1 * w1 / static_cast<double>(trials));
    if (var <= 0.0) {
      probe.degenerate = true;
      continue;
    }
    probe.z = tsum / std::sqrt(var);
    probe.violation = probe.z < z_crit;
    report.violations += probe.violation;
  }
  // Independent probes each false-trigger at the probe level; tolerate counts
  // a clean null would still produce with probability above 1e-3.
  {
    double tail = std::pow(1.0 - report.probe_level, probe_count);  // P(X = 0)
    double pmf = tail;
    int k = 0;
    while (1.0 - tail >= 1e-3 && k < probe_count) {
      pmf *= (probe_count - k) / (static_cast<double>(k + 1)) * report.probe_level /
             (1.0 - report.probe_level);
      tail += pmf;
      ++k;
    }
    report.allowance = k;
  }
  report.pass = report.violations <= report.allowance;
  return report;
}

namespace reference {

std::vector<double> water_fill(const Dag& dag, const std::vector<char>& rejected) {
  const int n = dag.node_count();
  std::vector<double> g(static_cast<size_t>(n), 0.0);
  int open_leaves = 0;
  for (int v : dag.leaves()) open_leaves += !rejected[static_cast<size_t>(v)];
  if (open_leaves == 0) return g;
  for (int v : dag.leaves())
    if (!rejected[static_cast<size_t>(v)]) g[static_cast<size_t>(v)] = 1.0 / open_leaves;

  for (;;) {
    int v = -1;
    for (int i = 0; i < n && v < 0; ++i) {
      if (g[static_cast<size_t>(i)] <= 0.0) continue;
      for (int u : dag.parents(i))
        if (!rejected[static_cast<size_t>(u)]) {
          v = i;
          break;
        }
    }
    if (v < 0) break;
    std::vector<int> open;
    for (int u : dag.parents(v))
      if (!rejected[static_cast<size_t>(u)]) open.push_back(u);
    double share = g[static_cast<size_t>(v)] / static_cast<double>(open.size());
    for (int u : open) g[static_cast<size_t>(u)] += share;
    g[static_cast<size_t>(v)] = 0.0;
  }
  return g;
}

std::vector<int> select_fwer_mg(const Dag& dag, const PValueVector& p, double alpha) {
  const int n = dag.node_count();
  std::vector<char> mask(static_cast<size_t>(n), 0);
  for (;;) {
    auto g = water_fill(dag, mask);
    std::vector<int> newly;
    for (int v = 0; v < n; ++v) {
      if (mask[static_cast<size_t>(v)]) continue;
      bool front = true;
      for (int u : dag.parents(v))
        if (!mask[static_cast<size_t>(u)]) front = false;
      if (front && p[static_cast<size_t>(v)] <= alpha * g[static_cast<size_t>(v)])
        newly.push_back(v);
    }
    if (newly.empty()) break;
    for (int v : newly) mask[static_cast<size_t>(v)] = 1;
  }
  std::vector<int> out;
  for (int v = 0; v < n; ++v)
    if (mask[static_cast<size_t>(v)]) out.push_back(v);
  return out;
}

std::vector<int> select_fdx(const Dag& dag, const PValueVector& p, double gamma, double alpha) {
  const int n = dag.node_count();
  auto base = reference::select_fwer_mg(dag, p, alpha);
  std::vector<char> mask(static_cast<size_t>(n), 0);
  for (int v : base) mask[static_cast<size_t>(v)] = 1;

  int budget = fdx_budget(static_cast<int>(base.size()), gamma);
  std::vector<int> open_parents(static_cast<size_t>(n), 0);
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int v = 0; v < n; ++v) {
    if (mask[static_cast<size_t>(v)]) continue;
    for (int u : dag.parents(v)) open_parents[static_cast<size_t>(v)] += !mask[static_cast<size_t>(u)];
    if (open_parents[static_cast<size_t>(v)] == 0) ready.push(v);
  }
  int taken = 0;
  while (!ready.empty() && taken < budget) {
    int v = ready.top();
    ready.pop();
    mask[static_cast<size_t>(v)] = 1;
    ++taken;
    for (int w : dag.children(v))
      if (!mask[static_cast<size_t>(w)] && --open_parents[static_cast<size_t>(w)] == 0)
        ready.push(w);
  }
  std::vector<int> out;
  for (int v = 0; v < n; ++v)
    if (mask[static_cast<size_t>(v)]) out.push_back(v);
  return out;
}

std::vector<int> select_fdr_dagger(const Dag& dag, const PValueVector& p, double alpha) {
  const int n = dag.node_count();

  // Effective counts, recomputed here from the recursion.
  std::vector<double> ell(static_cast<size_t>(n), 0.0), em(static_cast<size_t>(n), 0.0);
  auto topo = dag.topo_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    int v = *it;
    if (dag.is_leaf(v)) {
      ell[static_cast<size_t>(v)] = 1.0;
      em[static_cast<size_t>(v)] = 1.0;
      continue;
    }
    double l = 0.0, m = 1.0;
    for (int w : dag.children(v)) {
      auto np = static_cast<double>(dag.parents(w).size());
      l += ell[static_cast<size_t>(w)] / np;
      m += em[static_cast<size_t>(w)] / np;
    }
    ell[static_cast<size_t>(v)] = l;
    em[static_cast<size_t>(v)] = m;
  }
  const int total_leaves = static_cast<int>(dag.leaves().size());

  std::vector<char> mask(static_cast<size_t>(n), 0);
  int prior = 0;
  for (const auto& level : dag.depth_partition()) {
    std::vector<int> cand;
    for (int v : level) {
      bool ok = true;
      for (int u : dag.parents(v))
        if (!mask[static_cast<size_t>(u)]) ok = false;
      if (ok) cand.push_back(v);
    }
    const int nd = static_cast<int>(cand.size());
    int rd = 0;
    for (int r = nd; r >= 1; --r) {
      int cnt = 0;
      for (int v : cand)
        cnt += p[static_cast<size_t>(v)] <=
               dagger_threshold(alpha, ell[static_cast<size_t>(v)], total_leaves,
                                em[static_cast<size_t>(v)], r, prior);
      if (cnt >= r) {
        rd = r;
        break;
      }
    }
    if (rd >= 1)
      for (int v : cand)
        if (p[static_cast<size_t>(v)] <=
            dagger_threshold(alpha, ell[static_cast<size_t>(v)], total_leaves,
                             em[static_cast<size_t>(v)], rd, prior))
          mask[static_cast<size_t>(v)] = 1;
    prior += rd;
  }
  std::vector<int> out;
  for (int v = 0; v < n; ++v)
    if (mask[static_cast<size_t>(v)]) out.push_back(v);
  return out;
}

}  // namespace reference

namespace {

std::string join_ints(const std::vector<int>& xs) {
  std::ostringstream os;
  for (size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
  return os.str();
}

}  // namespace

EquivalenceDiff reference_equivalence(const Dag& dag, const PValueVector& p, double alpha,
                                      double gamma) {
  EquivalenceDiff diff;
  const int n = dag.node_count();

  // Water-filling weights compared on the empty set and on every prefix of
  // the production rejection sequence.
  SelectionResult prod_mg = select_fwer_mg(dag, p, alpha);
  {
    std::vector<char> mask(static_cast<size_t>(n), 0);
    size_t round = 0;
    for (;;) {
      auto wp = water_fill_weights(dag, mask);
      auto wr = reference::water_fill(dag, mask);
      for (int v = 0; v < n; ++v)
        if (std::abs(wp[static_cast<size_t>(v)] - wr[static_cast<size_t>(v)]) > 1e-12) {
          diff.equal = false;
          diff.detail = "water-filling weight mismatch at node " + std::to_string(v) +
                        " after round " + std::to_string(round);
          return diff;
        }
      if (round >= prod_mg.rounds.size()) break;
      for (int v : prod_mg.rounds[round]) mask[static_cast<size_t>(v)] = 1;
      ++round;
    }
  }

  auto ref_mg = reference::select_fwer_mg(dag, p, alpha);
  if (prod_mg.rejected != ref_mg) {
    diff.equal = false;
    diff.detail = "fwer-mg rejection sets differ: production {" + join_ints(prod_mg.rejected) +
                  "} vs reference {" + join_ints(ref_mg) + "}";
    return diff;
  }

  auto prod_fdx = select_fdx(dag, p, gamma, alpha);
  auto ref_fdx = reference::select_fdx(dag, p, gamma, alpha);
  if (prod_fdx.rejected != ref_fdx) {
    diff.equal = false;
    diff.detail = "fdx rejection sets differ: production {" + join_ints(prod_fdx.rejected) +
                  "} vs reference {" + join_ints(ref_fdx) + "}";
    return diff;
  }

  auto prod_dagger = select_fdr_dagger(dag, p, alpha);
  auto ref_dagger = reference::select_fdr_dagger(dag, p, alpha);
  if (prod_dagger.rejected != ref_dagger) {
    diff.equal = false;
    diff.detail = "fdr-dagger rejection sets differ: production {" +
                  join_ints(prod_dagger.rejected) + "} vs reference {" + join_ints(ref_dagger) +
                  "}";
    return diff;
  }
  return diff;
}

Dag random_dag(std::uint64_t seed, int min_nodes, int max_nodes) {
  RngStream rng(seed);
  int n = rng.uniform_int(min_nodes, max_nodes);
  double density = rng.uniform(1.0, 3.0) / std::max(2, n);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < density) edges.emplace_back(i, j);
  return Dag::build(n, edges);
}

PValueVector random_pvalues(const Dag& dag, std::uint64_t seed) {
  RngStream rng(seed);
  PValueVector p(static_cast<size_t>(dag.node_count()));
  for (auto& x : p) {
    double u = rng.uniform();
    // Skew a third of the entries toward zero so rejections actually happen.
    x = rng.uniform() < 0.33 ? u * u * u * u : u;
  }
  return p;
}

std::vector<char> random_upward_closed_rejection(const Dag& dag, std::uint64_t seed,
                                                 double reject_prob) {
  RngStream rng(seed);
  std::vector<char> mask(static_cast<size_t>(dag.node_count()), 0);
  for (int v : dag.topo_order()) {
    bool eligible = true;
    for (int u : dag.parents(v))
      if (!mask[static_cast<size_t>(u)]) {
        eligible = false;
        break;
      }
    if (eligible && rng.uniform() < reject_prob) mask[static_cast<size_t>(v)] = 1;
  }
  return mask;
}

}  // namespace dagsmooth
