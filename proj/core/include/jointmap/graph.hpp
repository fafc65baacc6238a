#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

namespace jointmap {

using NodeId = std::size_t;

// Undirected contiguity graph over labelled areas. Immutable once built.
class AdjacencyGraph {
 public:
  using Edge = std::pair<NodeId, NodeId>;  // always first < second

  AdjacencyGraph() = default;

  // Edges may be given in any orientation and with repeats; they are stored
  // canonicalized and deduplicated. Throws on self-loops, out-of-range ids or
  // duplicate labels.
  AdjacencyGraph(std::vector<std::string> labels, std::vector<Edge> edges);

  std::size_t n_nodes() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<NodeId>& neighbours(NodeId node) const { return adjacency_.at(node); }
  std::size_t degree(NodeId node) const { return adjacency_.at(node).size(); }

  // Index of `label`, or n_nodes() when absent.
  NodeId find(std::string_view label) const;

 private:
  std::vector<std::string> labels_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
};

// Graph Laplacian D - W of a 0/1 adjacency, as used for intrinsic CAR and RW1
// precisions. `rank` is dim minus the number of connected components.
struct StructureMatrix {
  Eigen::SparseMatrix<double> entries;
  std::size_t rank = 0;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(entries.rows()); }

  // x' Q x
  double quadratic_form(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

// Parses the labelled-line format:
//
//   # comment
//   Tehran: Qom, Semnan, Mazandaran
//   Bushehr:
//
// One line per node. Node ids follow order of first definition. Neighbour
// lists are symmetrized.
AdjacencyGraph parse_adjacency(std::string_view text);

// Inverse of parse_adjacency: one line per node in id order, neighbours in id
// order.
std::string serialize_adjacency(const AdjacencyGraph& graph);

StructureMatrix structure_matrix(const AdjacencyGraph& graph);

// Path-graph Laplacian over n_periods >= 2 consecutive periods.
StructureMatrix rw1_structure(std::size_t n_periods);

// Nodes partitioned into connected components; blocks ordered by their smallest
// node id, node ids ascending within each block.
std::vector<std::vector<NodeId>> connected_components(const AdjacencyGraph& graph);

// Chain 0-1-2-...-(n-1) with labels "t0", "t1", ...
AdjacencyGraph path_graph(std::size_t n_nodes);

}  // namespace jointmap
