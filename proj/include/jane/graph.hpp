#pragma once

#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace jane {

using NodeId = std::int32_t;

/// Undirected edge stored with `u < v`.
struct Edge {
  NodeId u;
  NodeId v;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Dense conversions above this node count are refused.
inline constexpr NodeId kMaxDenseNodes = 2000;

/// Undirected, unweighted simple graph on nodes 0..n-1.
///
/// Storage is a sorted, deduplicated edge list plus CSR rows holding each
/// node's sorted neighbours. The object is immutable after construction.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from node pairs given in either orientation. Duplicates
  /// are merged. Throws IndexOutOfRange for endpoints outside [0, n) and
  /// SelfLoop for (i, i) pairs. A graph with more than one component is
  /// accepted; `is_connected()` reports it.
  static Graph from_edges(std::span<const std::pair<NodeId, NodeId>> pairs, NodeId n);

  NodeId num_nodes() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::span<const NodeId> neighbors(NodeId i) const {
    return {col_.data() + row_ptr_[i], col_.data() + row_ptr_[i + 1]};
  }
  NodeId degree(NodeId i) const noexcept { return row_ptr_[i + 1] - row_ptr_[i]; }
  bool has_edge(NodeId i, NodeId j) const;
  bool is_connected() const noexcept { return connected_; }

  /// 0/1 adjacency matrix. Throws TooLarge above kMaxDenseNodes.
  Eigen::MatrixXd dense_adjacency() const;

  /// Subgraph induced by `nodes` (old ids, strictly increasing); node
  /// `nodes[k]` becomes node k.
  Graph induced_subgraph(std::span<const NodeId> nodes) const;

  friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.edges_ == b.edges_; }

 private:
  NodeId n_ = 0;
  std::vector<Edge> edges_;
  std::vector<NodeId> row_ptr_{0};
  std::vector<NodeId> col_;
  bool connected_ = true;
};

/// True iff a breadth-first search from node 0 reaches every node. The empty
/// graph on zero nodes counts as connected.
bool validate_connected(const Graph& g);

/// Connected component id per node, numbered in order of smallest member.
std::vector<NodeId> component_ids(const Graph& g);

struct ComponentExtraction {
  Graph graph;
  std::vector<NodeId> kept;     ///< kept[new_id] = old_id
  std::vector<NodeId> dropped;  ///< old ids outside the largest component
};

/// Largest connected component (ties go to the component holding the
/// smallest node id), relabelled densely in original order.
ComponentExtraction extract_largest_component(const Graph& g);

/// Unnormalized Laplacian L = D - A of a graph.
class Laplacian {
 public:
  explicit Laplacian(const Graph& g);

  NodeId size() const noexcept { return static_cast<NodeId>(degrees_.size()); }
  const Eigen::SparseMatrix<double>& matrix() const noexcept { return matrix_; }
  const Eigen::VectorXd& degrees() const noexcept { return degrees_; }
  bool connected() const noexcept { return connected_; }

  /// y = L x without forming L densely.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return matrix_ * x; }
  /// Throws TooLarge above kMaxDenseNodes.
  Eigen::MatrixXd dense() const;

 private:
  Eigen::SparseMatrix<double> matrix_;
  Eigen::VectorXd degrees_;
  bool connected_;
};

inline Laplacian laplacian(const Graph& g) { return Laplacian(g); }

struct EdgeListFile {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  std::vector<std::size_t> lines;  ///< source line of each pair
  NodeId declared_nodes = -1;      ///< from a `# nodes <n>` comment, else -1
};

/// Reads an edge-list file: one edge per line as two whitespace-separated
/// integers, '#' lines and blank lines ignored. Errors are positioned.
EdgeListFile read_edge_list(const std::filesystem::path& path);

/// Node count implied by a file: the declared count, else max id + 1.
NodeId implied_node_count(const EdgeListFile& file);

/// Writes `u v` per line, sorted, preceded by a `# nodes <n>` header.
void write_edge_list(const Graph& g, const std::filesystem::path& path);

}  // namespace jane
