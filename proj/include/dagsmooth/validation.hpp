#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dagsmooth/simulation.hpp"

namespace dagsmooth {

enum class NullModel { independent_uniform, gaussian_copula };

struct SuperUniformPoint {
  double c = 0.0;
  double freq = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct SuperUniformNodeReport {
  int node = 0;
  std::vector<SuperUniformPoint> points;
  bool pass = false;
};

/// Per-node empirical check that smoothed null p-values stay super-uniform:
/// P(ptilde <= c) must not exceed c + 3*sqrt(c(1-c)/N) at any grid point.
struct SuperUniformReport {
  std::vector<double> grid;
  std::vector<SuperUniformNodeReport> nodes;
  int trials = 0;
  bool pass = false;
};

/// Simulates `trials` all-null p-vectors (independent uniforms or the graph
/// Gaussian process), smooths each, and tabulates tail frequencies against
/// the binomial bound. Requires trials >= 50000 (ConfigError below).
SuperUniformReport check_superuniformity(const Dag& dag, const SmoothingSpec& spec, int trials,
                                         std::uint64_t seed, std::span<const double> grid,
                                         NullModel null_model = NullModel::independent_uniform);

enum class ErrorTarget { fwer, fdx, fdr };

std::string error_target_name(ErrorTarget target);

struct ErrorControlCell {
  std::string recipe;
  std::string scheme;
  std::string smoothing;
  std::string selector;
  double alpha = 0.0;
  double empirical = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct ErrorControlReport {
  ErrorTarget target = ErrorTarget::fdr;
  std::vector<ErrorControlCell> cells;
  bool pass = false;
};

/// Runs the benchmark grid and asserts empirical error <= alpha + 3*SE per
/// cell. Only combinations with a validity guarantee are admitted: under
/// independent nulls every smoothing method qualifies; under copula nulls
/// only none and conservative Stouffer do. Throws ConfigError otherwise.
ErrorControlReport check_error_control(const BenchmarkConfig& config, ErrorTarget target);

struct PrdsProbe {
  std::vector<int> coords;
  std::vector<double> cut;
  double z = 0.0;          // trend statistic; large negative = violation
  bool violation = false;
  bool degenerate = false; // probe carried no information
};

struct PrdsReport {
  int null_node = 0;
  int trials = 0;
  int probe_count = 0;
  double probe_level = 0.0;       // per-probe one-sided test level
  double expected_false = 0.0;    // probes * level
  int violations = 0;
  int allowance = 0;              // false positives tolerated at the probe level
  std::vector<PrdsProbe> probes;
  bool pass = false;              // violations <= allowance
};

/// Necessary-condition screen for positive regression dependence: simulate
/// independent-uniform nulls, bin trials by the smoothed value at null_node
/// (deciles), and for sampled coordinate-threshold upper sets test whether
/// the conditional membership probability trends downward across bins
/// (one-sided test at the 0.1% level per probe). Not a proof; a detector.
/// Requires trials >= 200000.
PrdsReport prds_diagnostic(const Dag& dag, const SmoothingSpec& spec, int trials,
                           std::uint64_t seed, int null_node, int probe_count);

/// Same screen for an arbitrary transform of the null p-vector (used to
/// validate the detector on a constructed anti-monotone fixture).
PrdsReport prds_diagnostic_transform(
    const Dag& dag, const std::function<PValueVector(const PValueVector&)>& transform, int trials,
    std::uint64_t seed, int null_node, int probe_count);

/// Straight-from-the-definition implementations of the selection procedures,
/// kept deliberately unoptimized as oracles for the production code paths.
namespace reference {

std::vector<double> water_fill(const Dag& dag, const std::vector<char>& rejected);
std::vector<int> select_fwer_mg(const Dag& dag, const PValueVector& p, double alpha);
std::vector<int> select_fdx(const Dag& dag, const PValueVector& p, double gamma, double alpha);
std::vector<int> select_fdr_dagger(const Dag& dag, const PValueVector& p, double alpha);

}  // namespace reference

struct EquivalenceDiff {
  bool equal = true;
  std::string detail;  // empty when equal
};

/// Runs the production and reference selection procedures on the same input
/// and compares rejection sets exactly (water-filling weights to 1e-12).
/// Intended for small graphs.
EquivalenceDiff reference_equivalence(const Dag& dag, const PValueVector& p, double alpha,
                                      double gamma);

// Deterministic random fixtures shared by the validation CLI and the test
// suites.

/// Erdos-Renyi-style DAG on a random node count in [min_nodes, max_nodes]
/// (edges only from lower to higher index).
Dag random_dag(std::uint64_t seed, int min_nodes, int max_nodes);

/// Random p-vector skewed toward small values so selections are nontrivial.
PValueVector random_pvalues(const Dag& dag, std::uint64_t seed);

/// Upward-closed rejection set drawn top-down (a node can only be rejected
/// once all parents are).
std::vector<char> random_upward_closed_rejection(const Dag& dag, std::uint64_t seed,
                                                 double reject_prob = 0.6);

}  // namespace dagsmooth
