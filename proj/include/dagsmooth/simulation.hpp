#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dagsmooth/graph.hpp"
#include "dagsmooth/selection.hpp"
#include "dagsmooth/smoothing.hpp"

namespace dagsmooth {

enum class GraphKind {
  deep_tree,
  wide_tree,
  bipartite,
  hourglass,
  layered_random,
  trigenic,
  edgeless,
};

/// Gene-knockout graph input: genes are roots, pair nodes hang off their two
/// genes, triplet nodes off their constituent pairs (absent pairs skipped).
struct TrigenicSpec {
  std::vector<std::string> genes;
  std::vector<std::array<std::string, 2>> pairs;
  std::vector<std::array<std::string, 3>> triplets;
};

struct GraphRecipe {
  GraphKind kind = GraphKind::deep_tree;
  int levels = 8;           // trees: number of levels (root is level 1)
  int branching = 2;        // trees
  int n_roots = 100;        // bipartite
  int n_leaves = 100;       // bipartite
  int fan_out = 20;         // bipartite: children per root
  int hg_roots = 30;        // hourglass
  int hg_middle = 10;       // hourglass
  int hg_leaves = 30;       // hourglass
  double edge_prob = 0.2;   // hourglass
  int layers = 5;           // layered_random
  int layer_width = 50;     // layered_random
  int parents_per_node = 3; // layered_random
  TrigenicSpec trigenic;
  std::uint64_t seed = 0;

  static GraphRecipe deep_tree(int levels, int branching);
  static GraphRecipe wide_tree(int levels, int branching);
  static GraphRecipe edgeless(int nodes);
  static GraphRecipe bipartite(int n_roots, int n_leaves, int fan_out, std::uint64_t seed);
  static GraphRecipe hourglass(int n_roots, int n_middle, int n_leaves, double edge_prob,
                               std::uint64_t seed);
  static GraphRecipe layered_random(int layers, int layer_width, int parents_per_node,
                                    std::uint64_t seed);
  static GraphRecipe trigenic_graph(TrigenicSpec spec);

  std::string name() const;
};

/// Throws InvalidRecipe on bad parameters. Random recipes are deterministic
/// functions of recipe.seed.
Dag gen_graph(const GraphRecipe& recipe);

/// Trigenic builder exposing node labels (genes, "a:b" pairs, "a:b:c"
/// triplets) for the I/O layer.
std::pair<Dag, std::vector<std::string>> build_trigenic(const TrigenicSpec& spec);

enum class AltKind {
  global_normal,       // nonnull z ~ N(mean, 1); every node flips independently
  incremental_normal,  // nonnull z ~ N(base + slope*(D-d), 1); leaves flip, parents are unions
  global_beta,         // nonnull p ~ Beta(exp(log_a), b)
  incremental_beta,    // nonnull p ~ Beta(exp(log_a - slope*(D-d)), b)
  layers_beta,         // depths 1..nonnull_depth are nonnull; p ~ Beta(fixed_a, b)
};

struct AlternativeScheme {
  AltKind kind = AltKind::global_normal;
  double nonnull_prob = 0.5;
  double normal_mean = 2.0;    // global_normal
  double normal_base = 1.0;    // incremental_normal
  double normal_slope = 0.3;   // incremental_normal
  double beta_log_a = -4.0;    // beta kinds
  double beta_slope = 0.3;     // incremental_beta
  double beta_b = 0.5;
  double fixed_beta_a = 0.1;   // layers_beta
  int nonnull_depth = 1;       // layers_beta

  static AlternativeScheme global_normal();
  static AlternativeScheme incremental_normal();
  static AlternativeScheme global_beta();
  static AlternativeScheme incremental_beta();
  static AlternativeScheme layers_beta(int nonnull_depth);

  bool is_beta() const;
  std::string name() const;
};

/// Draws a truth assignment. Global kinds flip every node independently in
/// reverse topological order and then close the flags upward; incremental
/// kinds flip only leaves and mark an internal node nonnull when any child
/// is; layers_beta marks depths 1..nonnull_depth deterministically.
TruthAssignment gen_truth(const Dag& dag, const AlternativeScheme& scheme, std::uint64_t seed);

/// One-sided p-value from an upper-tail z-score.
double pvalue_from_zscore(double z) noexcept;

/// Independent draws: null nodes get Uniform(0,1) p-values (via z ~ N(0,1)
/// for the normal kinds); nonnull nodes get the scheme's alternative.
PValueVector gen_pvalues_independent(const Dag& dag, const TruthAssignment& truth,
                                     const AlternativeScheme& scheme, std::uint64_t seed);

/// Null covariance of the graph Gaussian process in which each null node is
/// the average of its null parents plus unit noise. Returned dense over null
/// nodes; null_slot maps node -> row (or -1 for nonnull).
struct CopulaModel {
  std::vector<int> null_slot;
  std::vector<double> covariance;  // row-major, size nulls*nulls
  std::vector<double> scale;       // per node: sqrt(marginal variance), 1 for nonnull
  int null_count = 0;

  double cov(int a_slot, int b_slot) const {
    return covariance[static_cast<size_t>(a_slot) * null_count + b_slot];
  }
};

CopulaModel build_copula_model(const Dag& dag, const TruthAssignment& truth);

/// Dependent nulls: z-scores follow the graph Gaussian process above and are
/// mapped through their exact marginal CDF, so null p-values are marginally
/// uniform but positively correlated along edges. Nonnull values come from
/// the scheme's Beta alternative (beta kinds only; throws ConfigError).
PValueVector gen_pvalues_copula(const Dag& dag, const TruthAssignment& truth,
                                const AlternativeScheme& scheme, std::uint64_t seed);

/// Variant reusing a prebuilt model (the model depends on the truth only, so
/// repeated draws for a fixed truth can skip the covariance propagation).
PValueVector gen_pvalues_copula(const Dag& dag, const TruthAssignment& truth,
                                const AlternativeScheme& scheme, std::uint64_t seed,
                                const CopulaModel& model);

struct TrialMetrics {
  double power = 0.0;
  double fdp = 0.0;
  bool any_false = false;
  bool fdp_exceeds_gamma = false;
};

TrialMetrics compute_metrics(const SelectionResult& result, const TruthAssignment& truth,
                             double gamma);

enum class SelectorKind { fwer_mg, fdx, fdr_dagger, bh };

std::string selector_name(SelectorKind kind);
SelectorKind parse_selector(std::string_view name);

/// The ten-point target-level grid used throughout the benchmark suite.
std::vector<double> default_alpha_grid();

struct BenchmarkConfig {
  std::vector<GraphRecipe> recipes;
  std::vector<AlternativeScheme> schemes;
  std::vector<SmoothingSpec> smoothings;
  std::vector<SelectorKind> selectors;
  std::vector<double> alphas;
  int trials = 100;
  double gamma = 0.1;
  std::uint64_t seed = 0;
  bool copula_nulls = false;
  bool regenerate_graph_per_trial = false;
};

/// One (recipe, scheme, smoothing, selector, alpha) cell with per-trial
/// metrics retained for paired comparisons.
struct BenchmarkCell {
  int recipe_idx = 0;
  int scheme_idx = 0;
  int smoothing_idx = 0;
  SelectorKind selector = SelectorKind::bh;
  double alpha = 0.0;

  std::vector<TrialMetrics> trials;

  double mean_power = 0.0;
  double err_fwer = 0.0;  // fraction of trials with any false rejection
  double err_fdx = 0.0;   // fraction of trials with fdp > gamma
  double err_fdr = 0.0;   // mean fdp
  double se_power = 0.0;
  double se_fwer = 0.0;
  double se_fdx = 0.0;
  double se_fdr = 0.0;
};

/// Runs the full grid. Trials are independent work units executed in
/// parallel; trial t draws from streams derived from (seed, t) and the cell
/// indices, so results are reproducible trial-by-trial and identical for any
/// thread count. Throws ConfigError for empty grid dimensions or bad levels.
std::vector<BenchmarkCell> run_benchmark(const BenchmarkConfig& config);

/// Stream derivation used per trial, exposed so a single trial can be
/// replayed in isolation.
struct TrialStreams {
  std::uint64_t graph_seed;
  std::uint64_t truth_seed;
  std::uint64_t pvalue_seed;
};
TrialStreams trial_streams(std::uint64_t master_seed, int trial, int recipe_idx, int scheme_idx);

}  // namespace dagsmooth
