#include <doctest.h>

#include <random>

#include "jointmap/error.hpp"
#include "jointmap/graph.hpp"
#include "jointmap/text.hpp"
#include "oracles.hpp"

using namespace jointmap;

namespace {

Eigen::MatrixXd dense(const StructureMatrix& q) { return Eigen::MatrixXd(q.entries); }

AdjacencyGraph graph_from(std::size_t n, const oracle::EdgeList& edges) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("n" + std::to_string(i));
  return AdjacencyGraph(labels, edges);
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::io;
}

}  // namespace

TEST_CASE("parse_adjacency reads labelled lines") {
  const auto g = parse_adjacency("A: B\nB: A\nC:");
  CHECK(g.n_nodes() == 3);
  CHECK(g.labels() == std::vector<std::string>{"A", "B", "C"});
  REQUIRE(g.edges().size() == 1);
  CHECK(g.edges()[0] == AdjacencyGraph::Edge{0, 1});
  CHECK(g.degree(2) == 0);
}

TEST_CASE("one-directional neighbour lists are symmetrized") {
  const auto g = parse_adjacency("A: B\nB:\n");
  REQUIRE(g.edges().size() == 1);
  CHECK(g.neighbours(1) == std::vector<NodeId>{0});
}

TEST_CASE("comments, blank lines and CRLF are tolerated") {
  const auto g = parse_adjacency("# header\r\n\r\nX: Y, Z\r\nY:\r\n  # indented comment\nZ: Y\n");
  CHECK(g.n_nodes() == 3);
  CHECK(g.edges().size() == 3);
}

TEST_CASE("parse_adjacency errors") {
  CHECK(code_of([] { parse_adjacency("A: B\nB:\nA:\n"); }) == ErrorCode::format);
  CHECK(code_of([] { parse_adjacency("A: B, Q\nB:\n"); }) == ErrorCode::unknown_label);
  CHECK(code_of([] { parse_adjacency("A B\n"); }) == ErrorCode::format);
  CHECK(code_of([] { parse_adjacency("A: A\n"); }) == ErrorCode::format);
  CHECK(code_of([] { parse_adjacency("A: B,,\nB:\n"); }) == ErrorCode::format);
}

TEST_CASE("AdjacencyGraph rejects self loops and duplicate labels") {
  CHECK(code_of([] { AdjacencyGraph({"a", "b"}, {{1, 1}}); }) == ErrorCode::domain);
  CHECK(code_of([] { AdjacencyGraph({"a", "a"}, {}); }) == ErrorCode::duplicate);
  CHECK(code_of([] { AdjacencyGraph({"a", "b"}, {{0, 2}}); }) == ErrorCode::domain);
}

TEST_CASE("shipped province adjacency is connected with Laplacian rank 29") {
  const auto g = parse_adjacency(text::read_file(JOINTMAP_DATA_DIR "/iran_provinces.adj"));
  CHECK(g.n_nodes() == 30);
  const auto q = structure_matrix(g);
  CHECK(q.rank == 29);
  CHECK(connected_components(g).size() == 1);
  // eigenvalue oracle on the dense matrix
  CHECK(oracle::count_small_eigenvalues(dense(q), 1e-9) == 1);
}

TEST_CASE("structure_matrix of a path and of an edgeless graph") {
  const auto q = structure_matrix(parse_adjacency("A: B\nB: C\nC:\n"));
  Eigen::MatrixXd expected(3, 3);
  expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK(dense(q) == expected);
  CHECK(q.rank == 2);

  const auto empty = structure_matrix(parse_adjacency("A:\nB:\nC:\n"));
  CHECK(dense(empty).isZero(0.0));
  CHECK(empty.rank == 0);
}

TEST_CASE("structure_matrix equals dense D - W on random graphs") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 25; ++rep) {
    const auto edges = oracle::random_edges(6, 0.4, rng);
    const auto q = structure_matrix(graph_from(6, edges));
    CHECK(dense(q) == oracle::dense_laplacian(6, edges));
  }
}

TEST_CASE("rw1_structure is the path Laplacian") {
  Eigen::MatrixXd two(2, 2);
  two << 1, -1, -1, 1;
  CHECK(dense(rw1_structure(2)) == two);

  const auto five = rw1_structure(5);
  CHECK(five.rank == 4);
  Eigen::VectorXd diag(5);
  diag << 1, 2, 2, 2, 1;
  CHECK(dense(five).diagonal() == diag);
  for (Eigen::Index i = 0; i + 1 < 5; ++i) {
    CHECK(dense(five)(i, i + 1) == -1.0);
    CHECK(dense(five)(i + 1, i) == -1.0);
  }
  CHECK(dense(five)(0, 2) == 0.0);

  for (std::size_t n = 2; n <= 9; ++n) {
    oracle::EdgeList path;
    for (std::size_t t = 0; t + 1 < n; ++t) path.emplace_back(t, t + 1);
    CHECK(dense(rw1_structure(n)) == oracle::dense_laplacian(n, path));
  }
  CHECK_THROWS_AS(rw1_structure(1), Error);
}

TEST_CASE("connected_components examples") {
  const auto one = connected_components(parse_adjacency("A: B\nB: C\nC:\n"));
  CHECK(one == std::vector<std::vector<NodeId>>{{0, 1, 2}});
  const auto two = connected_components(parse_adjacency("A: B\nB:\nC:\n"));
  CHECK(two == std::vector<std::vector<NodeId>>{{0, 1}, {2}});
}

TEST_CASE("connected_components agrees with transitive closure") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 8;
    const auto edges = oracle::random_edges(n, 0.18, rng);
    const auto blocks = connected_components(graph_from(n, edges));
    const auto reach = oracle::transitive_closure(n, edges);
    std::vector<std::size_t> block_of(n, n);
    std::size_t covered = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (auto v : blocks[b]) {
        CHECK(block_of[v] == n);
        block_of[v] = b;
        ++covered;
      }
    CHECK(covered == n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) CHECK((block_of[a] == block_of[b]) == reach[a][b]);
  }
}

TEST_CASE("Laplacian rows sum to zero and rank + components = nodes") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 2 + rep % 11;
    const auto edges = oracle::random_edges(n, 0.25, rng);
    const auto g = graph_from(n, edges);
    const auto q = structure_matrix(g);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    CHECK((q.entries * ones).isZero(0.0));
    const auto islands = connected_components(g).size();
    CHECK(q.rank + islands == n);
    CHECK(oracle::count_small_eigenvalues(dense(q), 1e-9) == islands);
  }
}

TEST_CASE("serialize then parse is the identity on canonical graphs") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto g = graph_from(7, oracle::random_edges(7, 0.3, rng));
    const auto text = serialize_adjacency(g);
    const auto back = parse_adjacency(text);
    CHECK(back.labels() == g.labels());
    CHECK(back.edges() == g.edges());
    CHECK(serialize_adjacency(back) == text);
  }
}
