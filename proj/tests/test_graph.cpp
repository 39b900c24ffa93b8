#include "oracles.hpp"

#include "kronmeet/error.hpp"
#include "kronmeet/graph.hpp"

#include <doctest.h>

#include <random>

using namespace kronmeet;

namespace {

int count_grid_arcs(int rows, int cols, bool loops) {
  int arcs = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      arcs += loops ? 1 : 0;
      const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int rr = r + dr[k], cc = c + dc[k];
        if (rr >= 0 && rr < rows && cc >= 0 && cc < cols) ++arcs;
      }
    }
  return arcs;
}

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("ring sizes and connectivity") {
    CHECK(make_ring(3).edge_count() == 9);
    const auto g = make_ring(5);
    CHECK(g.edge_count() == 15);
    CHECK(is_strongly_connected(g));
    CHECK(oracle::strongly_connected(g.support()));
    CHECK(g.has_all_self_loops());
    CHECK(g.has_edge(4, 0));
    CHECK(g.has_edge(0, 4));
    CHECK(make_ring(4, false).edge_count() == 8);
  }

  TEST_CASE("ring below three nodes is rejected") {
    try {
      make_ring(2);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidSize);
    }
  }

  TEST_CASE("complete graphs") {
    CHECK(make_complete(5).edge_count() == 25);
    const auto two = make_complete(2, false);
    CHECK(two.edges() == std::vector<Edge>{{0, 1}, {1, 0}});
    const auto six = make_complete(6);
    CHECK(six.edge_count() == 36);
    CHECK(is_strongly_connected(six));
    CHECK(oracle::strongly_connected(six.support()));
    CHECK_THROWS_AS(make_complete(1), Error);
  }

  TEST_CASE("grid arc counts match enumeration") {
    const auto g = make_grid(3, 3);
    CHECK(g.size() == 9);
    CHECK(g.edge_count() == static_cast<std::size_t>(count_grid_arcs(3, 3, true)));
    CHECK(g.edge_count() == 9 + 24);
    CHECK(make_grid(2, 2, false).edge_count() == 8);
    const auto bare = make_grid(3, 3, false);
    CHECK(bare.out_degree(0) == 2);
    CHECK(bare.out_degree(4) == 4);
    // Row-major: node 1 sits right of node 0, node 3 below it.
    CHECK(bare.has_edge(0, 1));
    CHECK(bare.has_edge(0, 3));
    CHECK_FALSE(bare.has_edge(2, 3));
    CHECK(is_strongly_connected(bare));
    CHECK(oracle::strongly_connected(bare.support()));
    CHECK(make_grid(4, 5).edge_count() == static_cast<std::size_t>(count_grid_arcs(4, 5, true)));
    CHECK_THROWS_AS(make_grid(1, 3), Error);
  }

  TEST_CASE("strong connectivity on small cases") {
    CHECK(is_strongly_connected(Digraph(2, {{0, 1}, {1, 0}})));
    CHECK_FALSE(is_strongly_connected(Digraph(2, {{0, 1}})));
  }

  TEST_CASE("SCC agrees with the closure oracle on random digraphs") {
    std::mt19937_64 rng(7);
    std::bernoulli_distribution coin(0.25);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 2 + trial % 7;
      std::vector<Edge> edges;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (coin(rng)) edges.emplace_back(i, j);
      Digraph g(n, edges);
      const auto reach = oracle::reachability(g.support());
      CHECK(is_strongly_connected(g) == reach.all());
      std::vector<std::vector<int>> adjacency(n);
      for (int v = 0; v < n; ++v) adjacency[v] = g.successors(v);
      const auto classes = strongly_connected_components(adjacency);
      std::vector<int> label(n, -1);
      for (std::size_t c = 0; c < classes.size(); ++c)
        for (int v : classes[c]) label[v] = static_cast<int>(c);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) CHECK((label[i] == label[j]) == (reach(i, j) && reach(j, i)));
    }
  }

  TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(Digraph(2, {{0, 2}}), Error);
    CHECK_THROWS_AS(Digraph(2, {{0, 1}, {0, 1}}), Error);
    CHECK_THROWS_AS(Digraph(0, {}), Error);
  }

  TEST_CASE("edge list parsing") {
    const auto g = parse_edge_list("3\n1 2\n2 3\n3 1\n");
    CHECK(g.size() == 3);
    CHECK(g.edges() == std::vector<Edge>{{0, 1}, {1, 2}, {2, 0}});
    CHECK_FALSE(g.has_all_self_loops());
    CHECK(parse_graph(serialize_edge_list(g)) == g);
    CHECK(serialize_edge_list(parse_edge_list("3\n3 1\n1 2\n\n2 3\n")) == "3\n1 2\n2 3\n3 1\n");
  }

  TEST_CASE("edge list errors carry the line number") {
    try {
      parse_edge_list("2\n1 3\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.kind() == ErrorKind::Parse);
    }
    try {
      parse_edge_list("3\n1 2\n2 x\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_edge_list("3\n1 2\n1 2\n"), ParseError);
    CHECK_THROWS_AS(parse_edge_list(""), ParseError);
  }

  TEST_CASE("json round trip") {
    for (const auto& g : {make_ring(5), make_grid(2, 3, false), make_complete(3)}) {
      CHECK(parse_graph(serialize_graph_json(g)) == g);
      CHECK(parse_graph(serialize_edge_list(g)) == g);
    }
    CHECK_THROWS_AS(parse_graph_json("{\"n\": 2, \"edges\": [[1, 5]]}"), ParseError);
  }

  TEST_CASE("dot export") {
    const auto g = make_complete(2, false);
    const auto plain = to_dot(g);
    CHECK(plain.find("digraph") != std::string::npos);
    CHECK(plain.find("1 -> 2") != std::string::npos);
    Eigen::MatrixXd p(2, 2);
    p << 0, 1, 1, 0;
    const auto weighted = to_dot(g, &p);
    CHECK(weighted.find("#000000ff") != std::string::npos);
  }
}
