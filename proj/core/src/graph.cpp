#include "jointmap/graph.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "jointmap/error.hpp"
#include "jointmap/text.hpp"

namespace jointmap {

AdjacencyGraph::AdjacencyGraph(std::vector<std::string> labels, std::vector<Edge> edges)
    : labels_{std::move(labels)} {
  std::unordered_map<std::string_view, NodeId> seen;
  for (NodeId id = 0; id < labels_.size(); ++id) {
    if (!seen.emplace(labels_[id], id).second) {
      throw Error(ErrorCode::duplicate, "duplicate area label '" + labels_[id] + "'");
    }
  }
  for (auto& [a, b] : edges) {
    if (a >= labels_.size() || b >= labels_.size()) {
      throw Error(ErrorCode::domain, "edge endpoint out of range");
    }
    if (a == b) {
      throw Error(ErrorCode::domain, "self-loop on '" + labels_[a] + "'");
    }
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  adjacency_.resize(labels_.size());
  for (const auto& [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

NodeId AdjacencyGraph::find(std::string_view label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  return static_cast<NodeId>(it - labels_.begin());
}

double StructureMatrix::quadratic_form(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw Error(ErrorCode::dimension_mismatch, "quadratic form: vector length does not match matrix");
  }
  return x.dot(entries * x);
}

AdjacencyGraph parse_adjacency(std::string_view text) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::pair<NodeId, std::vector<std::string>>> pending;

  std::size_t line_no = 0;
  for (auto raw : text::lines(text)) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::format,
                  "adjacency line " + std::to_string(line_no) + ": expected '<label>: <neighbours>'");
    }
    std::string label{text::trim(line.substr(0, colon))};
    if (label.empty()) {
      throw Error(ErrorCode::format, "adjacency line " + std::to_string(line_no) + ": empty label");
    }
    const NodeId id = labels.size();
    if (!ids.emplace(label, id).second) {
      throw Error(ErrorCode::format, "adjacency: node '" + label + "' defined twice");
    }
    labels.push_back(label);

    std::vector<std::string> nbrs;
    const auto rhs = text::trim(line.substr(colon + 1));
    if (!rhs.empty()) {
      for (auto tok : text::split(rhs, ',')) {
        tok = text::trim(tok);
        if (tok.empty()) {
          throw Error(ErrorCode::format,
                      "adjacency line " + std::to_string(line_no) + ": empty neighbour entry");
        }
        nbrs.emplace_back(tok);
      }
    }
    pending.emplace_back(id, std::move(nbrs));
  }

  std::vector<AdjacencyGraph::Edge> edges;
  for (const auto& [id, nbrs] : pending) {
    for (const auto& name : nbrs) {
      const auto it = ids.find(name);
      if (it == ids.end()) {
        throw Error(ErrorCode::unknown_label,
                    "adjacency: neighbour '" + name + "' of '" + labels[id] + "' has no line of its own");
      }
      if (it->second == id) {
        throw Error(ErrorCode::format, "adjacency: '" + name + "' lists itself");
      }
      edges.emplace_back(id, it->second);
    }
  }
  return AdjacencyGraph(std::move(labels), std::move(edges));
}

std::string serialize_adjacency(const AdjacencyGraph& graph) {
  std::string out;
  for (NodeId id = 0; id < graph.n_nodes(); ++id) {
    out += graph.labels()[id];
    out += ':';
    bool first = true;
    for (auto nb : graph.neighbours(id)) {
      out += first ? " " : ", ";
      out += graph.labels()[nb];
      first = false;
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<NodeId>> connected_components(const AdjacencyGraph& graph) {
  const auto n = graph.n_nodes();
  std::vector<std::size_t> block_of(n, n);
  std::vector<std::vector<NodeId>> blocks;
  std::vector<NodeId> stack;
  for (NodeId root = 0; root < n; ++root) {
    if (block_of[root] != n) continue;
    const auto b = blocks.size();
    blocks.emplace_back();
    block_of[root] = b;
    stack.push_back(root);
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      blocks[b].push_back(v);
      for (auto w : graph.neighbours(v)) {
        if (block_of[w] == n) {
          block_of[w] = b;
          stack.push_back(w);
        }
      }
    }
    std::sort(blocks[b].begin(), blocks[b].end());
  }
  return blocks;
}

StructureMatrix structure_matrix(const AdjacencyGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.n_nodes());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.n_nodes() + 2 * graph.edges().size());
  for (NodeId v = 0; v < graph.n_nodes(); ++v) {
    const auto iv = static_cast<Eigen::Index>(v);
    triplets.emplace_back(iv, iv, static_cast<double>(graph.degree(v)));
  }
  for (const auto& [a, b] : graph.edges()) {
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    triplets.emplace_back(ia, ib, -1.0);
    triplets.emplace_back(ib, ia, -1.0);
  }
  StructureMatrix q;
  q.entries.resize(n, n);
  q.entries.setFromTriplets(triplets.begin(), triplets.end());
  q.entries.makeCompressed();
  q.rank = graph.n_nodes() - connected_components(graph).size();
  return q;
}

AdjacencyGraph path_graph(std::size_t n_nodes) {
  std::vector<std::string> labels(n_nodes);
  std::vector<AdjacencyGraph::Edge> edges;
  for (std::size_t t = 0; t < n_nodes; ++t) {
    labels[t] = "t" + std::to_string(t);
    if (t + 1 < n_nodes) edges.emplace_back(t, t + 1);
  }
  return AdjacencyGraph(std::move(labels), std::move(edges));
}

StructureMatrix rw1_structure(std::size_t n_periods) {
  if (n_periods < 2) {
    throw Error(ErrorCode::domain, "RW1 structure needs at least 2 periods");
  }
  return structure_matrix(path_graph(n_periods));
}

}  // namespace jointmap
