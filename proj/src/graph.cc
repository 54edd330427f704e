#include "nethist/graph.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "nethist/error.h"

namespace nethist {

Graph::Graph(int n, std::span<const std::pair<int, int>> edges,
             std::vector<std::string> labels)
    : n_(n), labels_(std::move(labels)) {
  if (n < 0) throw ConfigError("graph size must be non-negative");
  if (!labels_.empty() && static_cast<int>(labels_.size()) != n) {
    throw ConfigError("label count does not match node count");
  }
  std::vector<std::vector<int>> lists(n);
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw ConfigError("edge endpoint out of range");
    }
    if (i == j) continue;
    lists[i].push_back(j);
    lists[j].push_back(i);
  }
  offsets_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& l = lists[i];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    offsets_[i + 1] = offsets_[i] + static_cast<int>(l.size());
  }
  adjacency_.reserve(offsets_[n]);
  for (auto& l : lists) adjacency_.insert(adjacency_.end(), l.begin(), l.end());
  num_edges_ = offsets_[n] / 2;
}

bool Graph::has_edge(int i, int j) const {
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::string Graph::label(int i) const {
  return labels_.empty() ? std::to_string(i) : labels_[i];
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(num_edges_);
  for (int i = 0; i < n_; ++i) {
    for (int j : neighbors(i)) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

Graph Graph::induced_subgraph(const std::vector<bool>& keep) const {
  std::vector<int> new_id(n_, -1);
  std::vector<std::string> labels;
  int m = 0;
  for (int i = 0; i < n_; ++i) {
    if (!keep[i]) continue;
    new_id[i] = m++;
    if (!labels_.empty()) labels.push_back(labels_[i]);
  }
  std::vector<std::pair<int, int>> sub;
  for (auto [i, j] : edges()) {
    if (new_id[i] >= 0 && new_id[j] >= 0) sub.emplace_back(new_id[i], new_id[j]);
  }
  return Graph(m, sub, std::move(labels));
}

Graph Graph::permuted(std::span<const int> perm) const {
  std::vector<std::pair<int, int>> moved;
  for (auto [i, j] : edges()) moved.emplace_back(perm[i], perm[j]);
  std::vector<std::string> labels;
  if (!labels_.empty()) {
    labels.resize(n_);
    for (int i = 0; i < n_; ++i) labels[perm[i]] = labels_[i];
  }
  return Graph(n_, moved, std::move(labels));
}

namespace {

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : line) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Accumulates undirected edges and tallies what was dropped.
class EdgeCollector {
 public:
  explicit EdgeCollector(bool collapse) : collapse_(collapse) {}

  void add(int i, int j, LoadReport& report) {
    if (i == j) {
      ++report.self_loops_dropped;
      return;
    }
    if (seen_directed_.count({i, j})) {
      ++report.duplicates_dropped;
      return;
    }
    seen_directed_.insert({i, j});
    auto key = std::minmax(i, j);
    if (!undirected_.insert({key.first, key.second}).second) {
      if (collapse_) {
        ++report.reciprocal_merged;
      } else {
        ++report.duplicates_dropped;
      }
      return;
    }
    edges_.emplace_back(key.first, key.second);
  }

  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

 private:
  bool collapse_;
  std::set<std::pair<int, int>> seen_directed_;
  std::set<std::pair<int, int>> undirected_;
  std::vector<std::pair<int, int>> edges_;
};

}  // namespace

LoadedGraph load_edge_list(const std::string& path, bool directed_collapse) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list: " + path);

  LoadReport report;
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> labels;
  EdgeCollector collector(directed_collapse);
  auto id_of = [&](const std::string& token) {
    auto [it, inserted] = ids.emplace(token, static_cast<int>(labels.size()));
    if (inserted) labels.push_back(token);
    return it->second;
  };

  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      ++report.comment_lines;
      continue;
    }
    auto tokens = split_tokens(t);
    if (tokens.size() != 2) {
      throw IoError(path + ":" + std::to_string(line_no) + ": expected 2 tokens, found " +
                    std::to_string(tokens.size()));
    }
    ++report.lines_read;
    const int i = id_of(tokens[0]);
    const int j = id_of(tokens[1]);
    collector.add(i, j, report);
  }
  if (labels.empty()) throw IoError("empty edge list: " + path);

  const int n = static_cast<int>(labels.size());
  return {Graph(n, collector.edges(), std::move(labels)), report};
}

namespace {

// Minimal GML reader: a tree of key/value pairs where values are numbers,
// quoted strings or bracketed lists.
struct GmlValue {
  std::string scalar;
  bool is_list = false;
  bool is_string = false;
  std::vector<std::pair<std::string, GmlValue>> children;
};

class GmlParser {
 public:
  explicit GmlParser(std::string text) : text_(std::move(text)) {}

  std::vector<std::pair<std::string, GmlValue>> parse_top() {
    auto items = parse_items(/*nested=*/false);
    return items;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string read_word() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '[' && text_[pos_] != ']') {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  GmlValue parse_value() {
    skip_space();
    if (pos_ >= text_.size()) throw IoError("GML: unexpected end of input");
    GmlValue v;
    char c = text_[pos_];
    if (c == '[') {
      ++pos_;
      v.is_list = true;
      v.children = parse_items(/*nested=*/true);
    } else if (c == '"') {
      ++pos_;
      size_t end = text_.find('"', pos_);
      if (end == std::string::npos) throw IoError("GML: unterminated string");
      v.scalar = text_.substr(pos_, end - pos_);
      v.is_string = true;
      pos_ = end + 1;
    } else {
      v.scalar = read_word();
    }
    return v;
  }

  std::vector<std::pair<std::string, GmlValue>> parse_items(bool nested) {
    std::vector<std::pair<std::string, GmlValue>> items;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) {
        if (nested) throw IoError("GML: unbalanced '['");
        return items;
      }
      if (text_[pos_] == ']') {
        if (!nested) throw IoError("GML: unbalanced ']'");
        ++pos_;
        return items;
      }
      std::string key = read_word();
      if (key.empty()) throw IoError("GML: malformed key");
      items.emplace_back(key, parse_value());
    }
  }

  std::string text_;
  size_t pos_ = 0;
};

std::optional<long long> as_integer(const GmlValue& v) {
  if (v.is_list || v.is_string) return std::nullopt;
  long long out = 0;
  const char* b = v.scalar.data();
  const char* e = b + v.scalar.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc() || ptr != e) return std::nullopt;
  return out;
}

}  // namespace

LoadedGml load_gml(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open GML file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();

  auto top = GmlParser(buffer.str()).parse_top();
  const GmlValue* graph = nullptr;
  for (const auto& [key, value] : top) {
    if (key == "graph" && value.is_list) graph = &value;
  }
  if (graph == nullptr) throw IoError("GML: no graph block in " + path);

  std::map<long long, int> ids;
  std::vector<std::string> labels;
  std::vector<std::map<std::string, long long>> node_attrs;
  std::set<std::string> attr_names;
  std::vector<std::pair<long long, long long>> raw_edges;

  for (const auto& [key, value] : graph->children) {
    if (key == "node" && value.is_list) {
      std::optional<long long> id;
      std::string label;
      std::map<std::string, long long> attrs;
      for (const auto& [k, v] : value.children) {
        if (k == "id") {
          id = as_integer(v);
        } else if (k == "label") {
          label = v.scalar;
        } else if (auto iv = as_integer(v)) {
          attrs[k] = *iv;
          attr_names.insert(k);
        }
      }
      if (!id) throw IoError("GML: node without integer id");
      if (!ids.emplace(*id, static_cast<int>(labels.size())).second) {
        throw IoError("GML: duplicate node id " + std::to_string(*id));
      }
      labels.push_back(label.empty() ? std::to_string(*id) : label);
      node_attrs.push_back(std::move(attrs));
    } else if (key == "edge" && value.is_list) {
      std::optional<long long> s, t;
      for (const auto& [k, v] : value.children) {
        if (k == "source") s = as_integer(v);
        if (k == "target") t = as_integer(v);
      }
      if (!s || !t) throw IoError("GML: edge without source/target");
      raw_edges.emplace_back(*s, *t);
    }
  }
  if (labels.empty()) throw IoError("GML: no nodes in " + path);

  // Labels must be unique to serve as identifiers downstream.
  std::set<std::string> unique_labels(labels.begin(), labels.end());
  if (unique_labels.size() != labels.size()) {
    for (const auto& [gml_id, dense] : ids) labels[dense] = std::to_string(gml_id);
  }

  LoadReport report;
  EdgeCollector collector(/*collapse=*/true);
  for (auto [s, t] : raw_edges) {
    auto si = ids.find(s), ti = ids.find(t);
    if (si == ids.end() || ti == ids.end()) {
      throw IoError("GML: edge references unknown node");
    }
    ++report.lines_read;
    collector.add(si->second, ti->second, report);
  }

  const int n = static_cast<int>(labels.size());
  std::vector<std::string> columns(attr_names.begin(), attr_names.end());
  CovariateTable table(columns, n);
  for (int i = 0; i < n; ++i) {
    for (size_t c = 0; c < columns.size(); ++c) {
      auto it = node_attrs[i].find(columns[c]);
      if (it != node_attrs[i].end()) {
        table.set(i, static_cast<int>(c), static_cast<int>(it->second));
      }
    }
  }
  return {Graph(n, collector.edges(), std::move(labels)), report,
          std::move(table)};
}

LoadedGraph load_graph(const std::string& path, bool directed_collapse) {
  const bool gml = path.size() >= 4 &&
                   path.compare(path.size() - 4, 4, ".gml") == 0;
  if (gml) {
    auto loaded = load_gml(path);
    return {std::move(loaded.graph), loaded.report};
  }
  return load_edge_list(path, directed_collapse);
}

CovariateTable::CovariateTable(std::vector<std::string> columns, int num_nodes)
    : columns_(std::move(columns)),
      num_nodes_(num_nodes),
      values_(static_cast<size_t>(num_nodes) * columns_.size()) {}

int CovariateTable::column_index(const std::string& name) const {
  auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw ConfigError("unknown covariate column: " + name);
  return static_cast<int>(it - columns_.begin());
}

int CovariateTable::missing_count(int node) const {
  int missing = 0;
  for (size_t c = 0; c < columns_.size(); ++c) {
    if (!value(node, static_cast<int>(c))) ++missing;
  }
  return missing;
}

CovariateTable CovariateTable::subset(const std::vector<bool>& keep) const {
  int m = static_cast<int>(std::count(keep.begin(), keep.end(), true));
  CovariateTable out(columns_, m);
  int row = 0;
  for (int i = 0; i < num_nodes_; ++i) {
    if (!keep[i]) continue;
    for (size_t c = 0; c < columns_.size(); ++c) {
      out.set(row, static_cast<int>(c), value(i, static_cast<int>(c)));
    }
    ++row;
  }
  return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(trim(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  cells.push_back(trim(current));
  return cells;
}

}  // namespace

CovariateTable load_covariates(const std::string& path, const Graph& graph,
                               std::span<const CovariateColumn> schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open covariate file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw IoError("empty covariate file: " + path);
  auto header = split_csv(line);
  if (header.size() < 2) {
    throw ConfigError("covariate header needs an id column and at least one covariate");
  }

  // Map requested columns (or all, if no schema) to header positions.
  std::vector<std::string> names;
  std::vector<size_t> positions;
  std::vector<CovariateColumn> specs;
  if (schema.empty()) {
    for (size_t c = 1; c < header.size(); ++c) {
      names.push_back(header[c]);
      positions.push_back(c);
      specs.push_back({header[c], std::nullopt, std::nullopt});
    }
  } else {
    for (const auto& col : schema) {
      auto it = std::find(header.begin() + 1, header.end(), col.name);
      if (it == header.end()) {
        throw ConfigError("covariate schema mismatch: column '" + col.name +
                          "' not in header of " + path);
      }
      names.push_back(col.name);
      positions.push_back(static_cast<size_t>(it - header.begin()));
      specs.push_back(col);
    }
  }

  std::unordered_map<std::string, int> ids;
  for (int i = 0; i < graph.num_nodes(); ++i) ids.emplace(graph.label(i), i);

  CovariateTable table(names, graph.num_nodes());
  std::vector<bool> seen(graph.num_nodes(), false);
  int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": covariate schema mismatch (wrong cell count)");
    }
    auto it = ids.find(cells[0]);
    if (it == ids.end()) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": unknown node '" + cells[0] + "'");
    }
    const int node = it->second;
    if (seen[node]) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": duplicate node id '" + cells[0] + "'");
    }
    seen[node] = true;
    for (size_t c = 0; c < positions.size(); ++c) {
      const std::string& cell = cells[positions[c]];
      if (cell.empty() || cell == "NA") continue;
      int code = 0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), code);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw ConfigError(path + ":" + std::to_string(line_no) +
                          ": non-integer code '" + cell + "'");
      }
      if ((specs[c].min_code && code < *specs[c].min_code) ||
          (specs[c].max_code && code > *specs[c].max_code)) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": code " +
                          cell + " outside declared range of '" + names[c] + "'");
      }
      table.set(node, static_cast<int>(c), code);
    }
  }
  return table;
}

std::vector<int> degrees(const Graph& g) {
  std::vector<int> d(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) d[i] = g.degree(i);
  return d;
}

double estimate_density(const Graph& g) {
  const int64_t n = g.num_nodes();
  if (n < 2) throw ConfigError("density needs at least 2 nodes");
  return static_cast<double>(g.num_edges()) / (static_cast<double>(n * (n - 1)) / 2.0);
}

FilteredGraph filter_nodes(const Graph& g, const CovariateTable* covariates,
                           int max_missing) {
  const int n = g.num_nodes();
  if (covariates != nullptr && covariates->num_nodes() != n) {
    throw ConfigError("covariate table does not match graph size");
  }
  FilterReport report;
  std::vector<bool> keep(n, true);
  for (int i = 0; i < n; ++i) {
    if (g.degree(i) == 0) {
      keep[i] = false;
      ++report.removed_zero_degree;
    }
  }
  if (covariates != nullptr && max_missing > 0) {
    for (int i = 0; i < n; ++i) {
      if (keep[i] && covariates->missing_count(i) >= max_missing) {
        keep[i] = false;
        ++report.removed_missing_covariates;
      }
    }
  }
  FilteredGraph out{g.induced_subgraph(keep), {}, report};
  for (int i = 0; i < n; ++i) {
    if (keep[i]) out.kept.push_back(i);
  }
  return out;
}

}  // namespace nethist
