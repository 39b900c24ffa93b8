#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kronmeet {

/// Ordered pair of 0-based node indices.
using Edge = std::pair<int, int>;

/// Directed graph on nodes 0..n-1 (1..n in every external format).
///
/// Immutable after construction. Edges are kept sorted lexicographically and
/// duplicates are rejected, so two graphs with the same arc set compare equal.
class Digraph {
 public:
  Digraph(int n, std::vector<Edge> edges);

  int size() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  bool has_edge(int from, int to) const;
  const std::vector<int>& successors(int node) const { return out_[node]; }
  int out_degree(int node) const { return static_cast<int>(out_[node].size()); }
  bool has_all_self_loops() const;

  /// Dense 0/1 mask of the arc set.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> support() const;

  friend bool operator==(const Digraph& a, const Digraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> out_;
};

Digraph make_ring(int n, bool with_self_loops = true);
Digraph make_complete(int n, bool with_self_loops = true);
/// Row-major numbering: node (r, c) has index r * cols + c.
Digraph make_grid(int rows, int cols, bool with_self_loops = true);

bool is_strongly_connected(const Digraph& g);

/// Strongly connected components of an adjacency structure, in reverse
/// topological order of the condensation (Tarjan). Each component lists its
/// nodes in increasing order.
std::vector<std::vector<int>> strongly_connected_components(
    const std::vector<std::vector<int>>& adjacency);

/// Accepts either the edge-list format or the JSON graph document; the
/// format is detected from the first non-blank character.
Digraph parse_graph(std::string_view text);
Digraph parse_edge_list(std::string_view text);
Digraph parse_graph_json(std::string_view text);

std::string serialize_edge_list(const Digraph& g);
std::string serialize_graph_json(const Digraph& g);

/// Graphviz export. With a transition matrix attached, each arc carries its
/// probability as a label and as the alpha channel of its colour; node
/// widths scale with `node_weights` when given.
std::string to_dot(const Digraph& g,
                   const Eigen::MatrixXd* transition = nullptr,
                   const Eigen::VectorXd* node_weights = nullptr,
                   std::string_view name = "G");

}  // namespace kronmeet
