#include "kronmeet/graph.hpp"

#include "kronmeet/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>

namespace kronmeet {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSize: return "invalid_size";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::Support: return "support_violation";
    case ErrorKind::RowSum: return "row_sum_violation";
    case ErrorKind::NegativeEntry: return "negative_entry";
    case ErrorKind::ZeroOutDegree: return "zero_out_degree";
    case ErrorKind::NonUniqueStationary: return "non_unique_stationary";
    case ErrorKind::Reducible: return "reducible";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::UnsupportedGraph: return "unsupported_graph";
    case ErrorKind::InvalidArgument: return "invalid_argument";
  }
  return "unknown";
}

Digraph::Digraph(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  if (n < 1) throw Error(ErrorKind::InvalidSize, "graph needs at least one node");
  for (const auto& [i, j] : edges_) {
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw Error(ErrorKind::InvalidArgument,
                  "edge (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                      ") has an endpoint outside 1.." + std::to_string(n));
    }
  }
  std::sort(edges_.begin(), edges_.end());
  auto dup = std::adjacent_find(edges_.begin(), edges_.end());
  if (dup != edges_.end()) {
    throw Error(ErrorKind::InvalidArgument,
                "duplicate edge (" + std::to_string(dup->first + 1) + ", " +
                    std::to_string(dup->second + 1) + ")");
  }
  out_.assign(n, {});
  for (const auto& [i, j] : edges_) out_[i].push_back(j);
}

bool Digraph::has_edge(int from, int to) const {
  if (from < 0 || from >= n_) return false;
  const auto& s = out_[from];
  return std::binary_search(s.begin(), s.end(), to);
}

bool Digraph::has_all_self_loops() const {
  for (int i = 0; i < n_; ++i)
    if (!has_edge(i, i)) return false;
  return true;
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> Digraph::support() const {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n_, n_, false);
  for (const auto& [i, j] : edges_) mask(i, j) = true;
  return mask;
}

Digraph make_ring(int n, bool with_self_loops) {
  if (n < 3) throw Error(ErrorKind::InvalidSize, "ring needs n >= 3, got " + std::to_string(n));
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    edges.emplace_back(i, (i + 1) % n);
    edges.emplace_back(i, (i + n - 1) % n);
    if (with_self_loops) edges.emplace_back(i, i);
  }
  return Digraph(n, std::move(edges));
}

Digraph make_complete(int n, bool with_self_loops) {
  if (n < 2) throw Error(ErrorKind::InvalidSize, "complete graph needs n >= 2, got " + std::to_string(n));
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j || with_self_loops) edges.emplace_back(i, j);
  return Digraph(n, std::move(edges));
}

Digraph make_grid(int rows, int cols, bool with_self_loops) {
  if (rows < 2 || cols < 2) {
    throw Error(ErrorKind::InvalidSize, "grid needs rows >= 2 and cols >= 2, got " +
                                            std::to_string(rows) + "x" + std::to_string(cols));
  }
  std::vector<Edge> edges;
  auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int u = id(r, c);
      if (with_self_loops) edges.emplace_back(u, u);
      if (r > 0) edges.emplace_back(u, id(r - 1, c));
      if (r + 1 < rows) edges.emplace_back(u, id(r + 1, c));
      if (c > 0) edges.emplace_back(u, id(r, c - 1));
      if (c + 1 < cols) edges.emplace_back(u, id(r, c + 1));
    }
  }
  return Digraph(rows * cols, std::move(edges));
}

std::vector<std::vector<int>> strongly_connected_components(
    const std::vector<std::vector<int>>& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  std::vector<std::vector<int>> components;
  int counter = 0;

  // Iterative Tarjan: frames hold (node, next successor position).
  std::vector<std::pair<int, std::size_t>> frames;
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    frames.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      if (pos < adjacency[v].size()) {
        const int w = adjacency[v][pos++];
        if (index[w] == -1) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const int done = v;
      frames.pop_back();
      if (!frames.empty()) {
        const int parent = frames.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        std::vector<int> comp;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
      }
    }
  }
  return components;
}

bool is_strongly_connected(const Digraph& g) {
  std::vector<std::vector<int>> adj(g.size());
  for (int i = 0; i < g.size(); ++i) adj[i] = g.successors(i);
  return strongly_connected_components(adj).size() == 1;
}

namespace {

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    pos = line.find_first_not_of(" \t\r", pos);
    if (pos == std::string_view::npos) break;
    const std::size_t end = line.find_first_of(" \t\r", pos);
    out.push_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    pos = end;
  }
  return out;
}

std::optional<long> to_integer(std::string_view token) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

}  // namespace

Digraph parse_edge_list(std::string_view text) {
  std::optional<int> n;
  std::vector<Edge> edges;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (blank(line)) {
      if (end == text.size()) break;
      continue;
    }
    const auto tok = tokens(line);
    if (!n) {
      const auto value = tok.size() == 1 ? to_integer(tok[0]) : std::nullopt;
      if (!value || *value < 1) throw ParseError(line_no, "expected a positive node count");
      n = static_cast<int>(*value);
    } else {
      if (tok.size() != 2) throw ParseError(line_no, "expected two node indices");
      const auto i = to_integer(tok[0]);
      const auto j = to_integer(tok[1]);
      if (!i || !j) throw ParseError(line_no, "node indices must be integers");
      if (*i < 1 || *i > *n || *j < 1 || *j > *n) {
        throw ParseError(line_no, "node index out of range 1.." + std::to_string(*n));
      }
      const Edge e{static_cast<int>(*i - 1), static_cast<int>(*j - 1)};
      if (std::find(edges.begin(), edges.end(), e) != edges.end()) {
        throw ParseError(line_no, "duplicate edge");
      }
      edges.push_back(e);
    }
    if (end == text.size()) break;
  }
  if (!n) throw ParseError(line_no, "missing node count");
  return Digraph(*n, std::move(edges));
}

Digraph parse_graph_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(1, e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("edges")) {
    throw ParseError(1, "graph document needs \"n\" and \"edges\"");
  }
  if (!doc["n"].is_number_integer() || doc["n"].get<long>() < 1) {
    throw ParseError(1, "\"n\" must be a positive integer");
  }
  const int n = doc["n"].get<int>();
  std::vector<Edge> edges;
  int k = 0;
  for (const auto& e : doc["edges"]) {
    ++k;
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      throw ParseError(1, "edge #" + std::to_string(k) + " must be a pair of integers");
    }
    const long i = e[0].get<long>(), j = e[1].get<long>();
    if (i < 1 || i > n || j < 1 || j > n) {
      throw ParseError(1, "edge #" + std::to_string(k) + " has a node out of range 1.." + std::to_string(n));
    }
    edges.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
  }
  try {
    return Digraph(n, std::move(edges));
  } catch (const Error& e) {
    throw ParseError(1, e.what());
  }
}

Digraph parse_graph(std::string_view text) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return parse_graph_json(text);
  return parse_edge_list(text);
}

std::string serialize_edge_list(const Digraph& g) {
  std::ostringstream out;
  out << g.size() << '\n';
  for (const auto& [i, j] : g.edges()) out << i + 1 << ' ' << j + 1 << '\n';
  return out.str();
}

std::string serialize_graph_json(const Digraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [i, j] : g.edges()) edges.push_back({i + 1, j + 1});
  return nlohmann::json{{"n", g.size()}, {"edges", edges}}.dump();
}

std::string to_dot(const Digraph& g, const Eigen::MatrixXd* transition,
                   const Eigen::VectorXd* node_weights, std::string_view name) {
  std::ostringstream out;
  out << "digraph " << name << " {\n";
  double max_weight = 0.0;
  if (node_weights) max_weight = node_weights->maxCoeff();
  for (int i = 0; i < g.size(); ++i) {
    out << "  " << i + 1;
    if (node_weights && max_weight > 0.0) {
      char buf[64];
      std::snprintf(buf, sizeof buf, " [width=%.4f, xlabel=\"%.4f\"]",
                    0.2 + 0.8 * (*node_weights)(i) / max_weight, (*node_weights)(i));
      out << buf;
    }
    out << ";\n";
  }
  for (const auto& [i, j] : g.edges()) {
    out << "  " << i + 1 << " -> " << j + 1;
    if (transition) {
      const double p = (*transition)(i, j);
      if (p <= 0.0) {
        out << " [style=invis]";
      } else {
        char buf[96];
        const int alpha = static_cast<int>(std::lround(255.0 * std::clamp(p, 0.0, 1.0)));
        std::snprintf(buf, sizeof buf, " [label=\"%.4f\", color=\"#000000%02x\", penwidth=%.3f]", p,
                      alpha, 0.5 + 2.5 * p);
        out << buf;
      }
    }
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace kronmeet
