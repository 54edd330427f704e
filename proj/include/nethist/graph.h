#ifndef NETHIST_GRAPH_H_
#define NETHIST_GRAPH_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nethist {

// Simple undirected graph on dense node ids 0..n-1. Immutable once built.
// Neighborhoods are stored sorted, so membership queries are a binary search.
class Graph {
 public:
  Graph() = default;

  // Builds from an edge list. Self-loops and repeated pairs are ignored.
  // Labels are optional; when given there must be exactly n of them.
  Graph(int n, std::span<const std::pair<int, int>> edges,
        std::vector<std::string> labels = {});

  int num_nodes() const { return n_; }
  int64_t num_edges() const { return num_edges_; }

  bool has_edge(int i, int j) const;
  std::span<const int> neighbors(int i) const {
    return {adjacency_.data() + offsets_[i],
            adjacency_.data() + offsets_[i + 1]};
  }
  int degree(int i) const { return offsets_[i + 1] - offsets_[i]; }

  bool has_labels() const { return !labels_.empty(); }
  // Original token for node i, or its decimal id when the graph is unlabeled.
  std::string label(int i) const;
  const std::vector<std::string>& labels() const { return labels_; }

  // All edges (i, j) with i < j, in lexicographic order.
  std::vector<std::pair<int, int>> edges() const;

  // Graph induced by the nodes with keep[i] set, relabeled in order.
  Graph induced_subgraph(const std::vector<bool>& keep) const;

  // Applies a node permutation: node i of this graph becomes node perm[i].
  Graph permuted(std::span<const int> perm) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.offsets_ == b.offsets_ &&
           a.adjacency_ == b.adjacency_ && a.labels_ == b.labels_;
  }

 private:
  int n_ = 0;
  int64_t num_edges_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> adjacency_;
  std::vector<std::string> labels_;
};

struct LoadReport {
  int64_t lines_read = 0;
  int64_t comment_lines = 0;
  int64_t self_loops_dropped = 0;
  int64_t duplicates_dropped = 0;
  // Reverse pairs (j, i) merged into an existing (i, j); only counted when
  // the input is declared directed and collapsed.
  int64_t reciprocal_merged = 0;
};

struct LoadedGraph {
  Graph graph;
  LoadReport report;
};

// Reads one edge per line: two node tokens separated by whitespace or a comma.
// Blank lines and lines starting with '#' are skipped. Tokens map to dense ids
// in first-appearance order. With directed_collapse set, (i, j) and (j, i)
// are merged into one undirected edge and counted as reciprocal; otherwise a
// reverse pair counts as a duplicate.
LoadedGraph load_edge_list(const std::string& path, bool directed_collapse);

// Per-node covariates. Values are integer codes; a missing cell is nullopt.
struct CovariateColumn {
  std::string name;
  std::optional<int> min_code;
  std::optional<int> max_code;
};

class CovariateTable {
 public:
  CovariateTable() = default;
  CovariateTable(std::vector<std::string> columns, int num_nodes);

  const std::vector<std::string>& columns() const { return columns_; }
  int num_nodes() const { return num_nodes_; }
  // Index of the named column; throws ConfigError if absent.
  int column_index(const std::string& name) const;

  std::optional<int> value(int node, int column) const {
    return values_[static_cast<size_t>(node) * columns_.size() + column];
  }
  void set(int node, int column, std::optional<int> v) {
    values_[static_cast<size_t>(node) * columns_.size() + column] = v;
  }
  int missing_count(int node) const;

  // Restricts to the nodes with keep[i] set, relabeled in order.
  CovariateTable subset(const std::vector<bool>& keep) const;

 private:
  std::vector<std::string> columns_;
  int num_nodes_ = 0;
  std::vector<std::optional<int>> values_;
};

// GML input, as distributed for several public network datasets. Directed
// GML edges are always collapsed. Integer node attributes other than id are
// returned as covariates (e.g. "value" for political affiliation).
struct LoadedGml {
  Graph graph;
  LoadReport report;
  CovariateTable attributes;
};
LoadedGml load_gml(const std::string& path);

// Loads whichever format the extension indicates (.gml, else edge list).
LoadedGraph load_graph(const std::string& path, bool directed_collapse);

// CSV with a header row; the first column holds node labels matching the
// graph, the remaining columns integer codes. Blank cells are missing.
// Every declared schema column must be present in the header. Nodes absent
// from the file get all-missing records.
CovariateTable load_covariates(const std::string& path, const Graph& graph,
                               std::span<const CovariateColumn> schema);

std::vector<int> degrees(const Graph& g);

// Sample proportion of present edges among all n(n-1)/2 pairs.
double estimate_density(const Graph& g);

struct FilterReport {
  int removed_zero_degree = 0;
  int removed_missing_covariates = 0;
};

struct FilteredGraph {
  Graph graph;
  std::vector<int> kept;  // original node ids, in order
  FilterReport report;
};

// Drops nodes with no neighbors. When covariates are given, also drops nodes
// whose missing-cell count reaches max_missing (if max_missing > 0). The
// zero-degree pass is applied to the input graph, covariate filtering after.
FilteredGraph filter_nodes(const Graph& g,
                           const CovariateTable* covariates = nullptr,
                           int max_missing = 0);

}  // namespace nethist

#endif  // NETHIST_GRAPH_H_
