#include "dagsmooth/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dagsmooth/errors.hpp"
#include "dagsmooth/io.hpp"
#include "dagsmooth/rng.hpp"
#include "dagsmooth/validation.hpp"
#include "dagsmooth/version.hpp"

namespace dagsmooth {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find(sep, start);
    if (end == std::string::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

double to_double(const std::string& s, const char* what) {
  try {
    size_t pos = 0;
    double x = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (...) {
    throw ConfigError(std::string("cannot parse ") + what + " '" + s + "'");
  }
}

int to_int(const std::string& s, const char* what) {
  try {
    size_t pos = 0;
    int x = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (...) {
    throw ConfigError(std::string("cannot parse ") + what + " '" + s + "'");
  }
}

// deep-tree:8:2 | wide-tree:3:20 | chain:5 | bipartite:100:100:20 |
// hourglass:30:10:30:0.2 | layered:5:50:3 | trigenic:<file>
GraphRecipe parse_recipe(const std::string& text, std::uint64_t graph_seed) {
  auto parts = split(text, ':');
  const std::string& kind = parts[0];
  auto arg_int = [&](size_t i, int fallback) {
    return parts.size() > i ? to_int(parts[i], "recipe parameter") : fallback;
  };
  auto arg_double = [&](size_t i, double fallback) {
    return parts.size() > i ? to_double(parts[i], "recipe parameter") : fallback;
  };
  GraphRecipe recipe;
  if (kind == "deep-tree") {
    recipe = GraphRecipe::deep_tree(arg_int(1, 8), arg_int(2, 2));
  } else if (kind == "wide-tree") {
    recipe = GraphRecipe::wide_tree(arg_int(1, 3), arg_int(2, 20));
  } else if (kind == "chain") {
    recipe = GraphRecipe::deep_tree(arg_int(1, 5), 1);
  } else if (kind == "edgeless") {
    recipe = GraphRecipe::edgeless(arg_int(1, 50));
  } else if (kind == "bipartite") {
    recipe = GraphRecipe::bipartite(arg_int(1, 100), arg_int(2, 100), arg_int(3, 20), graph_seed);
  } else if (kind == "hourglass") {
    recipe = GraphRecipe::hourglass(arg_int(1, 30), arg_int(2, 10), arg_int(3, 30),
                                    arg_double(4, 0.2), graph_seed);
  } else if (kind == "layered") {
    recipe = GraphRecipe::layered_random(arg_int(1, 5), arg_int(2, 50), arg_int(3, 3), graph_seed);
  } else if (kind == "trigenic") {
    if (parts.size() != 2) throw ConfigError("trigenic recipe needs a file: trigenic:<path>");
    recipe = GraphRecipe::trigenic_graph(read_trigenic_spec(parts[1]));
  } else {
    throw ConfigError("unknown recipe '" + text + "'");
  }
  return recipe;
}

AlternativeScheme parse_scheme(const std::string& text) {
  auto parts = split(text, ':');
  const std::string& kind = parts[0];
  if (kind == "global-normal") return AlternativeScheme::global_normal();
  if (kind == "incremental-normal") return AlternativeScheme::incremental_normal();
  if (kind == "global-beta") return AlternativeScheme::global_beta();
  if (kind == "incremental-beta") return AlternativeScheme::incremental_beta();
  if (kind == "layers-beta") {
    if (parts.size() != 2) throw ConfigError("layers-beta needs a depth: layers-beta:<k>");
    return AlternativeScheme::layers_beta(to_int(parts[1], "nonnull depth"));
  }
  throw ConfigError("unknown scheme '" + text + "'");
}

void write_output(const std::optional<std::string>& out, const std::string& content) {
  if (out)
    write_text_atomic(*out, content);
  else
    std::cout << content;
}

LabeledDag labeled_from_recipe(const GraphRecipe& recipe) {
  if (recipe.kind == GraphKind::trigenic) {
    auto [dag, labels] = build_trigenic(recipe.trigenic);
    return make_labeled(std::move(dag), std::move(labels));
  }
  Dag dag = gen_graph(recipe);
  std::vector<std::string> labels;
  labels.reserve(static_cast<size_t>(dag.node_count()));
  for (int v = 0; v < dag.node_count(); ++v) labels.push_back("n" + std::to_string(v));
  return make_labeled(std::move(dag), std::move(labels));
}

struct CommonSmoothingFlags {
  std::string smoothing = "none";
  int mc_samples = 100000;
  std::uint64_t seed = 0;

  SmoothingSpec spec() const {
    SmoothingSpec s = SmoothingSpec::parse(smoothing);
    s.mc_samples = mc_samples;
    s.seed = seed;
    s.validate();
    return s;
  }
};

int cmd_smooth(const std::string& graph_path, const std::string& pvalue_path,
               const CommonSmoothingFlags& flags, const std::optional<std::string>& out) {
  LabeledDag g = read_graph(graph_path);
  PValueVector p = read_pvalues(pvalue_path, g);
  PValueVector pt = smooth(g.dag, p, flags.spec());
  write_output(out, pvalues_to_csv(g, pt));
  return kExitOk;
}

int cmd_select(const std::string& graph_path, const std::string& pvalue_path,
               const std::string& method, double alpha, double gamma,
               const CommonSmoothingFlags& flags, const std::optional<std::string>& out,
               bool deterministic) {
  LabeledDag g = read_graph(graph_path);
  PValueVector p = read_pvalues(pvalue_path, g);
  SmoothingSpec spec = flags.spec();
  PValueVector pt = smooth(g.dag, p, spec);

  SelectionResult result;
  switch (parse_selector(method)) {
    case SelectorKind::fwer_mg:
      result = select_fwer_mg(g.dag, pt, alpha);
      break;
    case SelectorKind::fdx:
      result = select_fdx(g.dag, pt, gamma, alpha);
      break;
    case SelectorKind::fdr_dagger:
      result = select_fdr_dagger(g.dag, pt, alpha);
      break;
    case SelectorKind::bh:
      result = select_bh(pt, alpha);
      break;
  }
  write_output(out, selection_to_json(g, result, spec.name(), deterministic));
  return kExitOk;
}

int cmd_simulate(const std::string& recipe_text, const std::string& scheme_text,
                 const std::vector<std::string>& smoothing_texts,
                 const std::vector<std::string>& method_texts, int trials,
                 const std::vector<double>& alphas, double gamma, std::uint64_t seed,
                 std::optional<std::uint64_t> graph_seed, const std::string& nulls,
                 bool regen_graph, const std::optional<std::string>& out, bool deterministic) {
  BenchmarkConfig config;
  std::uint64_t gseed = graph_seed ? *graph_seed : derive_seed(seed, 0x6772617068ULL);
  config.recipes.push_back(parse_recipe(recipe_text, gseed));
  config.schemes.push_back(parse_scheme(scheme_text));
  for (const auto& text : smoothing_texts)
    config.smoothings.push_back(SmoothingSpec::parse(text));
  for (auto& spec : config.smoothings)
    if (spec.seed == 0) spec.seed = derive_seed(seed, 0x736d6f6f7468ULL);
  for (const auto& text : method_texts) config.selectors.push_back(parse_selector(text));
  config.alphas = alphas;
  config.trials = trials;
  config.gamma = gamma;
  config.seed = seed;
  if (nulls == "independent")
    config.copula_nulls = false;
  else if (nulls == "copula")
    config.copula_nulls = true;
  else
    throw ConfigError("--nulls must be 'independent' or 'copula'");
  config.regenerate_graph_per_trial = regen_graph;

  auto cells = run_benchmark(config);
  write_output(out, benchmark_to_csv(config, cells, deterministic));
  return kExitOk;
}

nlohmann::json superuniform_report_json(const SuperUniformReport& report) {
  nlohmann::json j;
  j["grid"] = report.grid;
  j["trials"] = report.trials;
  j["pass"] = report.pass;
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : report.nodes) {
    nlohmann::json nj;
    nj["node"] = node.node;
    nj["pass"] = node.pass;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& pt : node.points)
      pts.push_back({{"c", pt.c}, {"freq", pt.freq}, {"bound", pt.bound}, {"pass", pt.pass}});
    nj["points"] = pts;
    nodes.push_back(nj);
  }
  j["nodes"] = nodes;
  return j;
}

int cmd_validate(const std::string& check, const std::string& recipe_text,
                 const std::optional<std::string>& graph_path, const std::string& smoothing,
                 int mc_samples, int trials, std::uint64_t seed,
                 const std::vector<double>& alphas, const std::string& target_text, double gamma,
                 const std::string& nulls, int null_node, int probes, int instances,
                 const std::optional<std::string>& out, bool deterministic) {
  NullModel null_model;
  if (nulls == "independent")
    null_model = NullModel::independent_uniform;
  else if (nulls == "copula")
    null_model = NullModel::gaussian_copula;
  else
    throw ConfigError("--nulls must be 'independent' or 'copula'");

  nlohmann::json j;
  j["check"] = check;
  j["version"] = kVersion;
  if (!deterministic) j["generated_at"] = iso8601_utc_now();
  bool pass = false;

  if (check == "superuniform") {
    LabeledDag g = graph_path ? read_graph(*graph_path)
                              : labeled_from_recipe(parse_recipe(recipe_text, derive_seed(seed, 1)));
    SmoothingSpec spec = SmoothingSpec::parse(smoothing);
    spec.mc_samples = mc_samples;
    spec.seed = derive_seed(seed, 2);
    const std::vector<double> grid = {0.01, 0.02, 0.05, 0.1, 0.25, 0.5};
    auto report = check_superuniformity(g.dag, spec, trials, seed, grid, null_model);
    j.update(superuniform_report_json(report));
    j["smoothing"] = spec.name();
    j["nulls"] = nulls;
    pass = report.pass;
  } else if (check == "error-control") {
    ErrorTarget target;
    if (target_text == "fwer")
      target = ErrorTarget::fwer;
    else if (target_text == "fdx")
      target = ErrorTarget::fdx;
    else if (target_text == "fdr")
      target = ErrorTarget::fdr;
    else
      throw ConfigError("--target must be fwer, fdx or fdr");

    BenchmarkConfig config;
    config.recipes.push_back(parse_recipe(recipe_text, derive_seed(seed, 1)));
    config.schemes.push_back(null_model == NullModel::gaussian_copula
                                 ? AlternativeScheme::global_beta()
                                 : AlternativeScheme::global_normal());
    SmoothingSpec spec = SmoothingSpec::parse(smoothing);
    spec.mc_samples = mc_samples;
    spec.seed = derive_seed(seed, 2);
    config.smoothings.push_back(spec);
    config.selectors.push_back(target == ErrorTarget::fwer
                                   ? SelectorKind::fwer_mg
                                   : (target == ErrorTarget::fdx ? SelectorKind::fdx
                                                                 : SelectorKind::fdr_dagger));
    config.alphas = alphas;
    config.trials = trials;
    config.gamma = gamma;
    config.seed = seed;
    config.copula_nulls = null_model == NullModel::gaussian_copula;

    auto report = check_error_control(config, target);
    j["target"] = error_target_name(target);
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cell : report.cells)
      cells.push_back({{"recipe", cell.recipe},
                       {"scheme", cell.scheme},
                       {"smoothing", cell.smoothing},
                       {"method", cell.selector},
                       {"alpha", cell.alpha},
                       {"empirical", cell.empirical},
                       {"bound", cell.bound},
                       {"pass", cell.pass}});
    j["cells"] = cells;
    j["pass"] = report.pass;
    pass = report.pass;
  } else if (check == "prds") {
    LabeledDag g = graph_path ? read_graph(*graph_path)
                              : labeled_from_recipe(parse_recipe(recipe_text, derive_seed(seed, 1)));
    SmoothingSpec spec = SmoothingSpec::parse(smoothing);
    spec.mc_samples = mc_samples;
    spec.seed = derive_seed(seed, 2);
    auto report = prds_diagnostic(g.dag, spec, trials, seed, null_node, probes);
    j["smoothing"] = spec.name();
    j["null_node"] = report.null_node;
    j["trials"] = report.trials;
    j["probes"] = report.probe_count;
    j["violations"] = report.violations;
    j["expected_false"] = report.expected_false;
    j["pass"] = report.pass;
    pass = report.pass;
  } else if (check == "reference") {
    nlohmann::json failures = nlohmann::json::array();
    auto grid = default_alpha_grid();
    int checked = 0;
    for (int i = 0; i < instances; ++i) {
      std::uint64_t iseed = derive_seed(seed, static_cast<std::uint64_t>(i));
      Dag dag = random_dag(iseed, 8, 60);
      PValueVector p = random_pvalues(dag, derive_seed(iseed, 1));
      double alpha = grid[static_cast<size_t>(i) % grid.size()];
      auto diff = reference_equivalence(dag, p, alpha, gamma);
      ++checked;
      if (!diff.equal)
        failures.push_back({{"instance", i}, {"alpha", alpha}, {"detail", diff.detail}});
    }
    j["instances"] = checked;
    j["failures"] = failures;
    pass = failures.empty();
    j["pass"] = pass;
  } else {
    throw ConfigError("--check must be superuniform, error-control, prds or reference");
  }

  write_output(out, j.dump(2) + "\n");
  return pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Smoothing and selection for nested hypotheses on DAGs"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  bool deterministic = false;
  auto add_deterministic = [&deterministic](CLI::App* sub) {
    sub->add_flag("--deterministic", deterministic,
                  "omit timestamps so outputs are byte-stable across runs");
  };

  // ---- smooth ----
  auto* smooth_cmd = app.add_subcommand("smooth", "write smoothed p-values as CSV");
  std::string sm_graph, sm_pvalues;
  CommonSmoothingFlags sm_flags;
  std::optional<std::string> sm_out;
  smooth_cmd->add_option("--graph", sm_graph, "graph file")->required();
  smooth_cmd->add_option("--pvalues", sm_pvalues, "p-value CSV")->required();
  smooth_cmd->add_option("--smoothing", sm_flags.smoothing,
                         "none|fisher|stouffer|tippett|ruger:K|genmean:R|cons-stouffer[:children|:descendants]");
  smooth_cmd->add_option("--mc-samples", sm_flags.mc_samples, "Monte Carlo budget for genmean");
  smooth_cmd->add_option("--seed", sm_flags.seed, "smoothing seed");
  smooth_cmd->add_option("--out", sm_out, "output path (stdout when omitted)");
  add_deterministic(smooth_cmd);

  // ---- select ----
  auto* select_cmd = app.add_subcommand("select", "run a selection procedure, write JSON");
  std::string se_graph, se_pvalues, se_method;
  double se_alpha = 0.05, se_gamma = 0.1;
  CommonSmoothingFlags se_flags;
  std::optional<std::string> se_out;
  select_cmd->add_option("--graph", se_graph, "graph file")->required();
  select_cmd->add_option("--pvalues", se_pvalues, "p-value CSV")->required();
  select_cmd->add_option("--method", se_method, "fwer-mg|fdx|fdr-dagger|bh")->required();
  select_cmd->add_option("--alpha", se_alpha, "target level")->required();
  select_cmd->add_option("--gamma", se_gamma, "FDX exceedance proportion (default 0.1)");
  select_cmd->add_option("--smoothing", se_flags.smoothing, "smoothing spec (default none)");
  select_cmd->add_option("--mc-samples", se_flags.mc_samples, "Monte Carlo budget for genmean");
  select_cmd->add_option("--seed", se_flags.seed, "smoothing seed");
  select_cmd->add_option("--out", se_out, "output path (stdout when omitted)");
  add_deterministic(select_cmd);

  // ---- simulate ----
  auto* sim_cmd = app.add_subcommand("simulate", "benchmark grid, long-format CSV");
  std::string si_recipe = "deep-tree:8:2", si_scheme = "global-normal", si_nulls = "independent";
  std::vector<std::string> si_smoothing = {"none", "fisher"};
  std::vector<std::string> si_methods = {"fwer-mg", "fdx", "fdr-dagger", "bh"};
  std::vector<double> si_alphas = default_alpha_grid();
  int si_trials = 100;
  double si_gamma = 0.1;
  std::uint64_t si_seed = 0;
  std::optional<std::uint64_t> si_graph_seed;
  bool si_regen = false;
  std::optional<std::string> si_out;
  sim_cmd->add_option("--recipe", si_recipe,
                      "deep-tree:D:B|wide-tree:D:B|chain:N|bipartite:R:L:F|hourglass:R:M:L:P|layered:L:W:K");
  sim_cmd->add_option("--scheme", si_scheme,
                      "global-normal|incremental-normal|global-beta|incremental-beta|layers-beta:K");
  sim_cmd->add_option("--smoothing", si_smoothing, "smoothing specs")->delimiter(',');
  sim_cmd->add_option("--methods", si_methods, "selection methods")->delimiter(',');
  sim_cmd->add_option("--alphas", si_alphas, "target levels")->delimiter(',');
  sim_cmd->add_option("--trials", si_trials, "trials per cell");
  sim_cmd->add_option("--gamma", si_gamma, "FDX exceedance proportion");
  sim_cmd->add_option("--seed", si_seed, "master seed");
  sim_cmd->add_option("--graph-seed", si_graph_seed, "seed for random graph recipes");
  sim_cmd->add_option("--nulls", si_nulls, "independent|copula");
  sim_cmd->add_flag("--regen-graph", si_regen, "resample the graph every trial");
  sim_cmd->add_option("--out", si_out, "output path (stdout when omitted)");
  add_deterministic(sim_cmd);

  // ---- validate ----
  auto* val_cmd = app.add_subcommand("validate", "empirical guarantee checks, JSON report");
  std::string va_check, va_recipe = "chain:5", va_smoothing = "fisher", va_target = "fdr",
              va_nulls = "independent";
  std::optional<std::string> va_graph;
  int va_mc_samples = 100000;
  int va_trials = 0;
  std::uint64_t va_seed = 0;
  std::vector<double> va_alphas = {0.05, 0.1, 0.2};
  double va_gamma = 0.1;
  int va_null_node = 0, va_probes = 50, va_instances = 100;
  std::optional<std::string> va_out;
  val_cmd->add_option("--check", va_check, "superuniform|error-control|prds|reference")
      ->required();
  val_cmd->add_option("--recipe", va_recipe, "graph recipe for the check");
  val_cmd->add_option("--graph", va_graph, "graph file (overrides --recipe)");
  val_cmd->add_option("--smoothing", va_smoothing, "smoothing spec");
  val_cmd->add_option("--mc-samples", va_mc_samples, "Monte Carlo budget for genmean");
  val_cmd->add_option("--trials", va_trials, "simulation count (0 = per-check default)");
  val_cmd->add_option("--seed", va_seed, "master seed");
  val_cmd->add_option("--alphas", va_alphas, "levels for error-control")->delimiter(',');
  val_cmd->add_option("--target", va_target, "error-control target: fwer|fdx|fdr");
  val_cmd->add_option("--gamma", va_gamma, "FDX exceedance proportion");
  val_cmd->add_option("--nulls", va_nulls, "independent|copula");
  val_cmd->add_option("--null-node", va_null_node, "conditioning node for prds");
  val_cmd->add_option("--probes", va_probes, "upper-set probes for prds");
  val_cmd->add_option("--instances", va_instances, "instances for reference");
  val_cmd->add_option("--out", va_out, "output path (stdout when omitted)");
  add_deterministic(val_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help / --version
      app.exit(e);
      return kExitOk;
    }
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (smooth_cmd->parsed()) return cmd_smooth(sm_graph, sm_pvalues, sm_flags, sm_out);
    if (select_cmd->parsed())
      return cmd_select(se_graph, se_pvalues, se_method, se_alpha, se_gamma, se_flags, se_out,
                        deterministic);
    if (sim_cmd->parsed())
      return cmd_simulate(si_recipe, si_scheme, si_smoothing, si_methods, si_trials, si_alphas,
                          si_gamma, si_seed, si_graph_seed, si_nulls, si_regen, si_out,
                          deterministic);
    if (val_cmd->parsed()) {
      int trials = va_trials;
      if (trials == 0) {
        if (va_check == "superuniform") trials = 50000;
        else if (va_check == "prds") trials = 200000;
        else trials = 200;
      }
      return cmd_validate(va_check, va_recipe, va_graph, va_smoothing, va_mc_samples, trials,
                          va_seed, va_alphas, va_target, va_gamma, va_nulls, va_null_node,
                          va_probes, va_instances, va_out, deterministic);
    }
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const MissingNode& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DuplicateNode& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const OutOfRange& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const CycleDetected& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DuplicateEdge& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const IndexOutOfRange& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    // configuration / spec / domain problems are usage errors
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace dagsmooth
