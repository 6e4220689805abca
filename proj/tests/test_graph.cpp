#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "jane/error.hpp"
#include "jane/graph.hpp"
#include "support.hpp"

using namespace jane;
using testing::Pairs;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::IOError;
}

}  // namespace

TEST_CASE("path graph from two edges") {
  const Graph g = testing::make_graph(3, {{0, 1}, {1, 2}});
  CHECK(g.num_nodes() == 3);
  CHECK(g.num_edges() == 2);
  CHECK(g.degree(0) == 1);
  CHECK(g.degree(1) == 2);
  CHECK(g.degree(2) == 1);
  CHECK(g.is_connected());
}

TEST_CASE("both orientations collapse to one edge") {
  const Graph g = testing::make_graph(2, {{0, 1}, {1, 0}});
  CHECK(g.num_edges() == 1);
  CHECK(g.has_edge(0, 1));
  CHECK(g.has_edge(1, 0));
}

TEST_CASE("empty edge set is flagged disconnected, not rejected") {
  const Graph g = testing::make_graph(4, {});
  CHECK(g.num_edges() == 0);
  CHECK_FALSE(g.is_connected());
  CHECK_FALSE(validate_connected(g));
}

TEST_CASE("construction errors") {
  CHECK(code_of([] { testing::make_graph(3, {{0, 3}}); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([] { testing::make_graph(3, {{-1, 2}}); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([] { testing::make_graph(3, {{1, 1}}); }) == ErrorCode::SelfLoop);
}

TEST_CASE("neighbours are sorted and symmetric") {
  const Graph g = testing::make_graph(5, {{4, 0}, {2, 0}, {0, 1}, {3, 2}});
  const auto nb = g.neighbors(0);
  CHECK(std::vector<NodeId>(nb.begin(), nb.end()) == std::vector<NodeId>{1, 2, 4});
  CHECK(g.has_edge(2, 3));
  CHECK_FALSE(g.has_edge(1, 4));
}

TEST_CASE("laplacian of small named graphs") {
  SUBCASE("P3") {
    const Eigen::MatrixXd L = laplacian(testing::path_graph(3)).dense();
    Eigen::MatrixXd expected(3, 3);
    expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    CHECK(L == expected);
  }
  SUBCASE("K3") {
    const Eigen::MatrixXd L = laplacian(testing::complete_graph(3)).dense();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) CHECK(L(i, j) == (i == j ? 2.0 : -1.0));
    }
  }
  SUBCASE("star S4 centred at 0") {
    const Eigen::MatrixXd L = laplacian(testing::star_graph(4)).dense();
    CHECK(L(0, 0) == 3.0);
    for (int i = 1; i < 4; ++i) CHECK(L(i, i) == 1.0);
  }
}

TEST_CASE("validate_connected examples") {
  CHECK(validate_connected(testing::path_graph(3)));
  CHECK_FALSE(validate_connected(testing::make_graph(4, {{0, 1}, {2, 3}})));
  CHECK(validate_connected(testing::complete_graph(5)));
}

TEST_CASE("degree sum and zero row sums on random graphs") {
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const Graph g = testing::random_graph(5 + trial, 0.3, rng);
    NodeId total = 0;
    for (NodeId i = 0; i < g.num_nodes(); ++i) total += g.degree(i);
    CHECK(static_cast<std::size_t>(total) == 2 * g.num_edges());
    const Eigen::MatrixXd L = laplacian(g).dense();
    CHECK(L.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
    CHECK(L.isApprox(L.transpose()));
  }
}

TEST_CASE("laplacian is positive semidefinite on random probes") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Laplacian L(testing::random_graph(15, 0.3, rng));
    for (int probe = 0; probe < 20; ++probe) {
      const Eigen::VectorXd x = testing::gaussian(15, 1, rng);
      CHECK(x.dot(L.apply(x)) >= -1e-12);
    }
  }
}

TEST_CASE("relabelling permutes the laplacian") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const NodeId n = 3 + trial % 18;
    const Graph g = testing::random_graph(n, 0.4, rng);
    std::vector<NodeId> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Pairs relabelled;
    for (const Edge& e : g.edges()) relabelled.emplace_back(perm[e.u], perm[e.v]);
    const Graph h = testing::make_graph(n, relabelled);

    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (NodeId i = 0; i < n; ++i) P(perm[i], i) = 1.0;
    CHECK(laplacian(h).dense() == P * laplacian(g).dense() * P.transpose());
  }
}

TEST_CASE("largest component extraction") {
  // Components {0,1,2}, {3,4}, {5}.
  const Graph g = testing::make_graph(6, {{0, 1}, {1, 2}, {3, 4}});
  const auto comp = component_ids(g);
  CHECK(comp == std::vector<NodeId>{0, 0, 0, 1, 1, 2});
  const ComponentExtraction ex = extract_largest_component(g);
  CHECK(ex.graph.num_nodes() == 3);
  CHECK(ex.kept == std::vector<NodeId>{0, 1, 2});
  CHECK(ex.dropped == std::vector<NodeId>{3, 4, 5});
  CHECK(ex.graph.is_connected());
}

TEST_CASE("induced subgraph relabels densely") {
  const Graph g = testing::make_graph(5, {{0, 2}, {2, 4}, {1, 3}});
  const std::vector<NodeId> keep{0, 2, 4};
  const Graph s = g.induced_subgraph(keep);
  CHECK(s == testing::make_graph(3, {{0, 1}, {1, 2}}));
}

TEST_CASE("dense conversion refuses large graphs") {
  const Graph g = testing::make_graph(kMaxDenseNodes + 1, {});
  CHECK(code_of([&] { g.dense_adjacency(); }) == ErrorCode::TooLarge);
}

TEST_CASE("edge-list round trip and positioned errors") {
  testing::TempDir dir;
  Rng rng(14);
  const Graph g = testing::random_graph(30, 0.2, rng);
  write_edge_list(g, dir.path() / "g.txt");
  const EdgeListFile file = read_edge_list(dir.path() / "g.txt");
  CHECK(file.declared_nodes == 30);
  CHECK(Graph::from_edges(file.pairs, implied_node_count(file)) == g);

  {
    std::ofstream out(dir.path() / "bad.txt");
    out << "# comment\n0 1\n1 x\n";
  }
  try {
    read_edge_list(dir.path() / "bad.txt");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 3);
  }
  {
    std::ofstream out(dir.path() / "short.txt");
    out << "0 1\n  2\n";
  }
  try {
    read_edge_list(dir.path() / "short.txt");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("implied node count without a header is max id + 1") {
  testing::TempDir dir;
  {
    std::ofstream out(dir.path() / "g.txt");
    out << "0 4\n2 1\n";
  }
  CHECK(implied_node_count(read_edge_list(dir.path() / "g.txt")) == 5);
}
