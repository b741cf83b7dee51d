// Compares the parallel trial kernels against single-threaded execution on
// two representative workloads and verifies the outputs are bit-identical, so
// the per-trial stream derivation stays honest. Also times the production
// selection procedures against the literal reference implementations.

#include <chrono>
#include <cstdio>
#include <functional>

#include "dagsmooth/parallel.hpp"
#include "dagsmooth/rng.hpp"
#include "dagsmooth/validation.hpp"

using namespace dagsmooth;

namespace {

double time_seconds(const std::function<void()>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

bool cells_equal(const std::vector<BenchmarkCell>& a, const std::vector<BenchmarkCell>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].trials.size() != b[i].trials.size()) return false;
    for (size_t t = 0; t < a[i].trials.size(); ++t) {
      if (a[i].trials[t].power != b[i].trials[t].power) return false;
      if (a[i].trials[t].fdp != b[i].trials[t].fdp) return false;
    }
  }
  return true;
}

}  // namespace

int main() {
  std::printf("openmp: %s, default workers: %d\n", openmp_enabled() ? "yes" : "no",
              max_threads());

  // Workload 1: benchmark grid on the depth-6 tree.
  BenchmarkConfig config;
  config.recipes.push_back(GraphRecipe::deep_tree(6, 2));
  config.schemes.push_back(AlternativeScheme::global_normal());
  config.smoothings.push_back(SmoothingSpec::parse("none"));
  config.smoothings.push_back(SmoothingSpec::parse("fisher"));
  config.selectors = {SelectorKind::fwer_mg, SelectorKind::fdx, SelectorKind::fdr_dagger};
  config.alphas = {0.05, 0.1, 0.2};
  config.trials = 200;
  config.seed = 7;

  std::vector<BenchmarkCell> serial_cells, parallel_cells;
  set_thread_cap(1);
  double t_serial = time_seconds([&] { serial_cells = run_benchmark(config); });
  set_thread_cap(0);
  double t_parallel = time_seconds([&] { parallel_cells = run_benchmark(config); });
  std::printf("benchmark grid   : serial %.3fs, parallel %.3fs, speedup %.2fx, identical: %s\n",
              t_serial, t_parallel, t_serial / t_parallel,
              cells_equal(serial_cells, parallel_cells) ? "yes" : "NO");

  // Workload 2: super-uniformity tabulation.
  Dag tree = gen_graph(GraphRecipe::deep_tree(3, 2));
  SmoothingSpec fisher = SmoothingSpec::parse("fisher");
  const double grid_pts[] = {0.01, 0.05, 0.1, 0.5};
  SuperUniformReport su_serial, su_parallel;
  set_thread_cap(1);
  double t_su_serial =
      time_seconds([&] { su_serial = check_superuniformity(tree, fisher, 100000, 11, grid_pts); });
  set_thread_cap(0);
  double t_su_parallel = time_seconds(
      [&] { su_parallel = check_superuniformity(tree, fisher, 100000, 11, grid_pts); });
  bool su_same = su_serial.pass == su_parallel.pass && su_serial.nodes.size() == su_parallel.nodes.size();
  for (size_t v = 0; su_same && v < su_serial.nodes.size(); ++v)
    for (size_t j = 0; j < su_serial.nodes[v].points.size(); ++j)
      su_same = su_same && su_serial.nodes[v].points[j].freq == su_parallel.nodes[v].points[j].freq;
  std::printf("super-uniformity : serial %.3fs, parallel %.3fs, speedup %.2fx, identical: %s\n",
              t_su_serial, t_su_parallel, t_su_serial / t_su_parallel, su_same ? "yes" : "NO");

  // Workload 3: production vs reference selection.
  double t_prod = 0.0, t_ref = 0.0;
  for (int i = 0; i < 50; ++i) {
    Dag dag = random_dag(derive_seed(99, static_cast<std::uint64_t>(i)), 40, 60);
    PValueVector p = random_pvalues(dag, derive_seed(99, 1000 + static_cast<std::uint64_t>(i)));
    t_prod += time_seconds([&] {
      (void)select_fwer_mg(dag, p, 0.1);
      (void)select_fdr_dagger(dag, p, 0.1);
    });
    t_ref += time_seconds([&] {
      (void)reference::select_fwer_mg(dag, p, 0.1);
      (void)reference::select_fdr_dagger(dag, p, 0.1);
    });
  }
  std::printf("selection        : production %.3fs, reference %.3fs (50 random instances)\n",
              t_prod, t_ref);
  return 0;
}
