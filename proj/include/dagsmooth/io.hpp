#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "dagsmooth/graph.hpp"
#include "dagsmooth/selection.hpp"
#include "dagsmooth/simulation.hpp"

namespace dagsmooth {

/// Dag plus the external string labels (dense indices internally, labels in
/// every file format).
struct LabeledDag {
  Dag dag;
  std::vector<std::string> labels;
  std::unordered_map<std::string, int> index;

  int require(const std::string& label) const;  // MissingNode
};

LabeledDag make_labeled(Dag dag, std::vector<std::string> labels);

/// Graph text format: comments start with '#'; the first directive is either
/// `nodes <n>` followed by optional `node <label>` declarations and
/// `edge <parent> <child>` lines (unseen labels take the next free index,
/// overflowing n is an error), or `trigenic` followed by `gene`/`pair`/
/// `triplet` lines. Throws ParseError with file:line context, or the Dag
/// build errors.
LabeledDag read_graph(const std::filesystem::path& path);
LabeledDag read_graph_text(std::istream& in, const std::string& origin);

/// Reads a trigenic-format graph file back into its gene/pair/triplet lists
/// (ParseError when the file is not in trigenic format).
TrigenicSpec read_trigenic_spec(const std::filesystem::path& path);

std::string graph_to_text(const LabeledDag& g);

/// CSV with header `node,p`; every node exactly once. Values must lie in
/// [0,1] (OutOfRange otherwise); exact 0/1 entries are kept but a warning is
/// emitted since smoothing will clamp them.
PValueVector read_pvalues(const std::filesystem::path& path, const LabeledDag& g);
PValueVector read_pvalues_text(std::istream& in, const LabeledDag& g, const std::string& origin);

std::string pvalues_to_csv(const LabeledDag& g, const PValueVector& p);

std::string selection_to_json(const LabeledDag& g, const SelectionResult& result,
                              const std::string& smoothing_name, bool deterministic);

/// Inverse of selection_to_json; labels are resolved against g.
SelectionResult selection_from_json(const std::string& text, const LabeledDag& g);

std::string benchmark_to_csv(const BenchmarkConfig& config, const std::vector<BenchmarkCell>& cells,
                             bool deterministic);

/// Atomic write: temp file in the same directory, then rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string iso8601_utc_now();

}  // namespace dagsmooth
