#include "dagsmooth/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "dagsmooth/errors.hpp"
#include "dagsmooth/version.hpp"

namespace dagsmooth {

namespace {

// Shortest representation that parses back to the identical double.
std::string fmt_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, end);
}

std::string fmt_short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::string body = line.substr(0, line.find('#'));
  std::istringstream is(body);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void parse_fail(const std::string& origin, int line, const std::string& msg) {
  throw ParseError(origin + ":" + std::to_string(line) + ": " + msg);
}

TrigenicSpec parse_trigenic_block(std::istream& in, const std::string& origin, int& lineno) {
  TrigenicSpec spec;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    auto tok = tokenize(line);
    if (tok.empty()) continue;
    if (tok[0] == "gene" && tok.size() == 2) {
      spec.genes.push_back(tok[1]);
    } else if (tok[0] == "pair" && tok.size() == 3) {
      spec.pairs.push_back({tok[1], tok[2]});
    } else if (tok[0] == "triplet" && tok.size() == 4) {
      spec.triplets.push_back({tok[1], tok[2], tok[3]});
    } else {
      parse_fail(origin, lineno, "expected 'gene G', 'pair G G' or 'triplet G G G'");
    }
  }
  return spec;
}

}  // namespace

int LabeledDag::require(const std::string& label) const {
  auto it = index.find(label);
  if (it == index.end()) throw MissingNode("no node labeled '" + label + "'");
  return it->second;
}

LabeledDag make_labeled(Dag dag, std::vector<std::string> labels) {
  LabeledDag g;
  if (static_cast<int>(labels.size()) != dag.node_count())
    throw AlignmentError("label table size does not match node count");
  g.dag = std::move(dag);
  g.labels = std::move(labels);
  for (int i = 0; i < static_cast<int>(g.labels.size()); ++i) {
    if (!g.index.emplace(g.labels[static_cast<size_t>(i)], i).second)
      throw DuplicateNode("duplicate node label '" + g.labels[static_cast<size_t>(i)] + "'");
  }
  return g;
}

LabeledDag read_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file '" + path.string() + "'");
  return read_graph_text(in, path.string());
}

LabeledDag read_graph_text(std::istream& in, const std::string& origin) {
  std::string line;
  int lineno = 0;

  // leading comments / blanks until the mode directive
  std::vector<std::string> head;
  while (std::getline(in, line)) {
    ++lineno;
    head = tokenize(line);
    if (!head.empty()) break;
  }
  if (head.empty()) parse_fail(origin, lineno, "empty graph file");

  if (head[0] == "trigenic") {
    if (head.size() != 1) parse_fail(origin, lineno, "'trigenic' takes no arguments");
    TrigenicSpec spec = parse_trigenic_block(in, origin, lineno);
    try {
      auto [dag, labels] = build_trigenic(spec);
      return make_labeled(std::move(dag), std::move(labels));
    } catch (const InvalidRecipe& e) {
      throw ParseError(origin + ": " + e.what());
    }
  }

  if (head[0] != "nodes" || head.size() != 2)
    parse_fail(origin, lineno, "expected 'nodes <count>' or 'trigenic'");
  int n = 0;
  try {
    n = std::stoi(head[1]);
  } catch (...) {
    parse_fail(origin, lineno, "cannot parse node count '" + head[1] + "'");
  }
  if (n < 0) parse_fail(origin, lineno, "negative node count");

  std::vector<std::string> labels;
  std::unordered_map<std::string, int> index;
  auto resolve = [&](const std::string& label, int at_line) {
    auto it = index.find(label);
    if (it != index.end()) return it->second;
    if (static_cast<int>(labels.size()) >= n)
      parse_fail(origin, at_line,
                 "label '" + label + "' would exceed the declared " + std::to_string(n) +
                     " node(s)");
    int id = static_cast<int>(labels.size());
    labels.push_back(label);
    index.emplace(label, id);
    return id;
  };

  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    ++lineno;
    auto tok = tokenize(line);
    if (tok.empty()) continue;
    if (tok[0] == "node" && tok.size() == 2) {
      if (index.count(tok[1]))
        parse_fail(origin, lineno, "node '" + tok[1] + "' declared twice");
      resolve(tok[1], lineno);
    } else if (tok[0] == "edge" && tok.size() == 3) {
      int u = resolve(tok[1], lineno);
      int v = resolve(tok[2], lineno);
      edges.emplace_back(u, v);
    } else {
      parse_fail(origin, lineno, "expected 'node <label>' or 'edge <parent> <child>'");
    }
  }
  // Undeclared trailing indices get stable automatic labels.
  while (static_cast<int>(labels.size()) < n) {
    std::string label = "n" + std::to_string(labels.size());
    while (index.count(label)) label += "_";
    index.emplace(label, static_cast<int>(labels.size()));
    labels.push_back(label);
  }
  return make_labeled(Dag::build(n, edges), std::move(labels));
}

TrigenicSpec read_trigenic_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file '" + path.string() + "'");
  const std::string origin = path.string();
  std::string line;
  int lineno = 0;
  std::vector<std::string> head;
  while (std::getline(in, line)) {
    ++lineno;
    head = tokenize(line);
    if (!head.empty()) break;
  }
  if (head.empty() || head[0] != "trigenic")
    parse_fail(origin, lineno, "expected a 'trigenic' graph file");
  return parse_trigenic_block(in, origin, lineno);
}

std::string graph_to_text(const LabeledDag& g) {
  std::ostringstream os;
  os << "nodes " << g.dag.node_count() << "\n";
  for (const auto& label : g.labels) os << "node " << label << "\n";
  for (const auto& [u, v] : g.dag.edges())
    os << "edge " << g.labels[static_cast<size_t>(u)] << " " << g.labels[static_cast<size_t>(v)]
       << "\n";
  return os.str();
}

PValueVector read_pvalues(const std::filesystem::path& path, const LabeledDag& g) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open p-value file '" + path.string() + "'");
  return read_pvalues_text(in, g, path.string());
}

PValueVector read_pvalues_text(std::istream& in, const LabeledDag& g, const std::string& origin) {
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError(origin + ": empty p-value file");
  ++lineno;
  {
    std::string header = line;
    header.erase(std::remove_if(header.begin(), header.end(),
                                [](unsigned char c) { return c == ' ' || c == '\r'; }),
                 header.end());
    if (header != "node,p") parse_fail(origin, lineno, "expected header 'node,p'");
  }

  const int n = g.dag.node_count();
  PValueVector p(static_cast<size_t>(n), -1.0);
  std::vector<char> seen(static_cast<size_t>(n), 0);
  int exact_boundary = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) parse_fail(origin, lineno, "expected '<node>,<p>'");
    std::string label = line.substr(0, comma);
    std::string value = line.substr(comma + 1);
    auto it = g.index.find(label);
    if (it == g.index.end()) parse_fail(origin, lineno, "unknown node label '" + label + "'");
    if (seen[static_cast<size_t>(it->second)])
      throw DuplicateNode(origin + ":" + std::to_string(lineno) + ": node '" + label +
                          "' listed twice");
    double x = 0.0;
    try {
      size_t pos = 0;
      x = std::stod(value, &pos);
      while (pos < value.size() && (value[pos] == ' ' || value[pos] == '\t')) ++pos;
      if (pos != value.size()) throw std::invalid_argument("trailing");
    } catch (...) {
      parse_fail(origin, lineno, "cannot parse p-value '" + value + "'");
    }
    if (!(x >= 0.0 && x <= 1.0))
      throw OutOfRange(origin + ":" + std::to_string(lineno) + ": p-value " + value +
                       " for node '" + label + "' outside [0,1]");
    exact_boundary += x == 0.0 || x == 1.0;
    seen[static_cast<size_t>(it->second)] = 1;
    p[static_cast<size_t>(it->second)] = x;
  }
  for (int v = 0; v < n; ++v)
    if (!seen[static_cast<size_t>(v)])
      throw MissingNode("no p-value for node '" + g.labels[static_cast<size_t>(v)] + "'");
  if (exact_boundary > 0)
    emit_warning(std::to_string(exact_boundary) +
                 " p-value(s) equal to 0 or 1; smoothing will clamp them");
  return p;
}

std::string pvalues_to_csv(const LabeledDag& g, const PValueVector& p) {
  if (static_cast<int>(p.size()) != g.dag.node_count())
    throw AlignmentError("p-value vector misaligned with graph");
  std::ostringstream os;
  os << "node,p\n";
  for (int v = 0; v < g.dag.node_count(); ++v)
    os << g.labels[static_cast<size_t>(v)] << "," << fmt_double(p[static_cast<size_t>(v)]) << "\n";
  return os.str();
}

std::string selection_to_json(const LabeledDag& g, const SelectionResult& result,
                              const std::string& smoothing_name, bool deterministic) {
  nlohmann::json j;
  j["method"] = result.method;
  j["alpha"] = result.alpha;
  if (result.gamma)
    j["gamma"] = *result.gamma;
  else
    j["gamma"] = nullptr;
  j["smoothing"] = smoothing_name;
  j["version"] = kVersion;
  if (!deterministic) j["generated_at"] = iso8601_utc_now();
  j["labels"] = g.labels;

  std::vector<std::string> rejected;
  for (int v : result.rejected) rejected.push_back(g.labels[static_cast<size_t>(v)]);
  j["rejected"] = rejected;

  nlohmann::json rounds = nlohmann::json::array();
  for (size_t r = 0; r < result.rounds.size(); ++r) {
    nlohmann::json round;
    round["round"] = r + 1;
    std::vector<std::string> nodes;
    for (int v : result.rounds[r]) nodes.push_back(g.labels[static_cast<size_t>(v)]);
    round["nodes"] = nodes;
    rounds.push_back(round);
  }
  j["rounds"] = rounds;

  nlohmann::json thresholds = nlohmann::json::object();
  for (int v = 0; v < g.dag.node_count(); ++v)
    if (result.has_threshold(v))
      thresholds[g.labels[static_cast<size_t>(v)]] = result.thresholds[static_cast<size_t>(v)];
  j["thresholds"] = thresholds;

  return j.dump(2) + "\n";
}

SelectionResult selection_from_json(const std::string& text, const LabeledDag& g) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("selection JSON: ") + e.what());
  }
  SelectionResult result;
  result.method = j.at("method").get<std::string>();
  result.alpha = j.at("alpha").get<double>();
  if (!j.at("gamma").is_null()) result.gamma = j.at("gamma").get<double>();
  const int n = g.dag.node_count();
  result.rejected_mask.assign(static_cast<size_t>(n), 0);
  result.thresholds.assign(static_cast<size_t>(n), std::numeric_limits<double>::quiet_NaN());
  for (const auto& label : j.at("rejected")) {
    int v = g.require(label.get<std::string>());
    result.rejected_mask[static_cast<size_t>(v)] = 1;
    result.rejected.push_back(v);
  }
  std::sort(result.rejected.begin(), result.rejected.end());
  for (const auto& round : j.at("rounds")) {
    std::vector<int> nodes;
    for (const auto& label : round.at("nodes")) nodes.push_back(g.require(label.get<std::string>()));
    result.rounds.push_back(std::move(nodes));
  }
  for (const auto& [label, value] : j.at("thresholds").items())
    result.thresholds[static_cast<size_t>(g.require(label))] = value.get<double>();
  return result;
}

std::string benchmark_to_csv(const BenchmarkConfig& config, const std::vector<BenchmarkCell>& cells,
                             bool deterministic) {
  std::ostringstream os;
  if (!deterministic) os << "# generated_at " << iso8601_utc_now() << "\n";
  os << "recipe,scheme,smoothing,method,alpha,trials,power,err_fwer,err_fdx,err_fdr,"
        "se_power,se_fwer,se_fdx,se_fdr\n";
  for (const auto& cell : cells) {
    os << config.recipes[static_cast<size_t>(cell.recipe_idx)].name() << ","
       << config.schemes[static_cast<size_t>(cell.scheme_idx)].name() << ","
       << config.smoothings[static_cast<size_t>(cell.smoothing_idx)].name() << ","
       << selector_name(cell.selector) << "," << fmt_short(cell.alpha) << ","
       << cell.trials.size() << "," << fmt_short(cell.mean_power) << ","
       << fmt_short(cell.err_fwer) << "," << fmt_short(cell.err_fdx) << ","
       << fmt_short(cell.err_fdr) << "," << fmt_short(cell.se_power) << ","
       << fmt_short(cell.se_fwer) << "," << fmt_short(cell.se_fdx) << ","
       << fmt_short(cell.se_fdr) << "\n";
  }
  return os.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string iso8601_utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace dagsmooth
