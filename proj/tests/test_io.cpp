#include <doctest.h>

#include <fstream>
#include <sstream>

#include "dagsmooth/errors.hpp"
#include "dagsmooth/io.hpp"
#include "dagsmooth/smoothing.hpp"
#include "testutil.hpp"

using namespace dagsmooth;

namespace {

struct Quiet {
  Quiet() {
    set_warning_handler([](const std::string&) {});
  }
} quiet;

LabeledDag graph_from(const std::string& text) {
  std::istringstream in(text);
  return read_graph_text(in, "test");
}

PValueVector pvalues_from(const std::string& text, const LabeledDag& g) {
  std::istringstream in(text);
  return read_pvalues_text(in, g, "test");
}

}  // namespace

TEST_CASE("graph parsing: basic forms") {
  auto g = graph_from("nodes 2\nedge a b\n");
  CHECK(g.dag.node_count() == 2);
  CHECK(g.dag.edge_count() == 1);
  CHECK(g.index.at("a") == 0);
  CHECK(g.index.at("b") == 1);

  auto edgeless = graph_from("# a comment\nnodes 3\n");
  CHECK(edgeless.dag.node_count() == 3);
  CHECK(edgeless.dag.edge_count() == 0);
  CHECK(edgeless.labels == std::vector<std::string>{"n0", "n1", "n2"});

  auto declared = graph_from("nodes 3\nnode x\nnode y\nnode z\nedge x z\n");
  CHECK(declared.index.at("z") == 2);
}

TEST_CASE("graph parsing: errors carry positions") {
  CHECK_THROWS_AS(graph_from("nodes 1\nedge a b\n"), ParseError);   // b exceeds n
  CHECK_THROWS_AS(graph_from("nodes x\n"), ParseError);
  CHECK_THROWS_AS(graph_from("frobnicate 3\n"), ParseError);
  CHECK_THROWS_AS(graph_from(""), ParseError);
  CHECK_THROWS_AS(graph_from("nodes 2\nedge a a\n"), DuplicateEdge);
  CHECK_THROWS_AS(graph_from("nodes 2\nedge a b\nedge b a\n"), CycleDetected);
  CHECK_THROWS_AS(graph_from("nodes 2\nnode a\nnode a\n"), ParseError);
  try {
    graph_from("nodes 1\nedge a b\n");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("test:2") != std::string::npos);
  }
}

TEST_CASE("graph round trip reproduces structure and labels") {
  auto g = graph_from("nodes 4\nnode r\nedge r mid\nedge mid leaf\nedge r leaf\n");
  auto text = graph_to_text(g);
  auto g2 = graph_from(text);
  CHECK(g2.labels == g.labels);
  CHECK(std::vector<std::pair<int, int>>(g2.dag.edges().begin(), g2.dag.edges().end()) ==
        std::vector<std::pair<int, int>>(g.dag.edges().begin(), g.dag.edges().end()));
}

TEST_CASE("trigenic graph file") {
  auto g = graph_from(
      "trigenic\n"
      "gene a\ngene b\ngene c\n"
      "pair a b\npair b c\n"
      "triplet a b c\n");
  CHECK(g.dag.node_count() == 6);
  CHECK(g.index.at("a:b") == 3);
  CHECK(g.index.at("a:b:c") == 5);
  // The a:c pair is absent, so the triplet hangs off a:b and b:c only.
  CHECK(g.dag.parents(5).size() == 2);
  CHECK_THROWS_AS(graph_from("trigenic\npair a b\n"), ParseError);
  CHECK_THROWS_AS(graph_from("trigenic\ngene a\ngene a\n"), ParseError);
}

TEST_CASE("p-value parsing: happy path and each error") {
  auto g = graph_from("nodes 3\nedge a b\nedge b c\n");
  auto p = pvalues_from("node,p\na,0.01\nb,0.02\nc,0.9\n", g);
  CHECK(p == PValueVector{0.01, 0.02, 0.9});

  CHECK_THROWS_AS(pvalues_from("node,p\na,1.2\nb,0.5\nc,0.5\n", g), OutOfRange);
  CHECK_THROWS_AS(pvalues_from("node,p\na,-0.2\nb,0.5\nc,0.5\n", g), OutOfRange);
  CHECK_THROWS_AS(pvalues_from("node,p\na,0.1\nb,0.2\n", g), MissingNode);
  CHECK_THROWS_AS(pvalues_from("node,p\na,0.1\na,0.2\nb,0.3\nc,0.4\n", g), DuplicateNode);
  CHECK_THROWS_AS(pvalues_from("node,p\nzz,0.1\n", g), ParseError);
  CHECK_THROWS_AS(pvalues_from("node,p\na,zork\n", g), ParseError);
  CHECK_THROWS_AS(pvalues_from("p,node\na,0.1\n", g), ParseError);

  try {
    pvalues_from("node,p\na,0.1\nb,0.2\n", g);
  } catch (const MissingNode& e) {
    CHECK(std::string(e.what()).find("'c'") != std::string::npos);
  }
}

TEST_CASE("p-value round trip is exact") {
  auto g = graph_from("nodes 3\nedge a b\nedge b c\n");
  PValueVector p = {1e-15, 0.1 + 0.2, 1.0 - 1e-16};
  auto text = pvalues_to_csv(g, p);
  CHECK(pvalues_from(text, g) == p);
}

TEST_CASE("boundary p-values are accepted with a warning") {
  auto g = graph_from("nodes 2\nedge a b\n");
  int warnings = 0;
  set_warning_handler([&warnings](const std::string&) { ++warnings; });
  auto p = pvalues_from("node,p\na,0\nb,1\n", g);
  set_warning_handler([](const std::string&) {});
  CHECK(p == PValueVector{0.0, 1.0});
  CHECK(warnings == 1);
}

TEST_CASE("selection JSON is deterministic under the flag") {
  auto g = graph_from("nodes 3\nedge a b\nedge b c\n");
  auto p = pvalues_from("node,p\na,0.01\nb,0.02\nc,0.9\n", g);
  auto result = select_fwer_mg(g.dag, p, 0.05);
  auto j1 = selection_to_json(g, result, "none", true);
  auto j2 = selection_to_json(g, result, "none", true);
  CHECK(j1 == j2);
  CHECK(j1.find("generated_at") == std::string::npos);
  CHECK(j1.find("\"rejected\"") != std::string::npos);
  CHECK(selection_to_json(g, result, "none", false).find("generated_at") != std::string::npos);
}

TEST_CASE("selection results round-trip through JSON") {
  auto g = graph_from("nodes 3\nedge a b\nedge b c\n");
  auto p = pvalues_from("node,p\na,0.01\nb,0.02\nc,0.9\n", g);
  auto result = select_fdx(g.dag, p, 0.4, 0.05);
  auto back = selection_from_json(selection_to_json(g, result, "none", true), g);
  CHECK(back.method == result.method);
  CHECK(back.alpha == result.alpha);
  CHECK(back.gamma == result.gamma);
  CHECK(back.rejected == result.rejected);
  CHECK(back.rounds == result.rounds);
  for (int v = 0; v < 3; ++v) {
    CHECK(back.has_threshold(v) == result.has_threshold(v));
    if (result.has_threshold(v))
      CHECK(back.thresholds[static_cast<size_t>(v)] == result.thresholds[static_cast<size_t>(v)]);
  }
}

TEST_CASE("atomic writes leave no temp file behind") {
  auto dir = std::filesystem::temp_directory_path() / "dagsmooth_io_test";
  std::filesystem::create_directories(dir);
  auto path = dir / "out.txt";
  write_text_atomic(path, "hello\n");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "hello");
  CHECK(!std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove_all(dir);
}
