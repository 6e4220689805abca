#include "jane/graph.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <string>

#include "jane/error.hpp"

namespace jane {

Graph Graph::from_edges(std::span<const std::pair<NodeId, NodeId>> pairs, NodeId n) {
  if (n < 0) throw Error(ErrorCode::InvalidConfig, "negative node count");
  Graph g;
  g.n_ = n;
  g.edges_.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    if (a < 0 || a >= n || b < 0 || b >= n) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "edge (" + std::to_string(a) + "," + std::to_string(b) + ") outside [0," +
                      std::to_string(n) + ")");
    }
    if (a == b) throw Error(ErrorCode::SelfLoop, "self-loop at node " + std::to_string(a));
    g.edges_.push_back(Edge{std::min(a, b), std::max(a, b)});
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

  std::vector<NodeId> deg(static_cast<std::size_t>(n), 0);
  for (const auto& e : g.edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  g.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (NodeId i = 0; i < n; ++i) g.row_ptr_[i + 1] = g.row_ptr_[i] + deg[i];
  g.col_.resize(2 * g.edges_.size());
  std::vector<NodeId> fill(g.row_ptr_.begin(), g.row_ptr_.end() - 1);
  // Lexicographic edge order fills every row in ascending neighbour order.
  for (const auto& e : g.edges_) {
    g.col_[fill[e.u]++] = e.v;
    g.col_[fill[e.v]++] = e.u;
  }
  g.connected_ = validate_connected(g);
  return g;
}

bool Graph::has_edge(NodeId i, NodeId j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

Eigen::MatrixXd Graph::dense_adjacency() const {
  if (n_ > kMaxDenseNodes) throw Error(ErrorCode::TooLarge, "dense adjacency limited to 2000 nodes");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (const auto& e : edges_) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

Graph Graph::induced_subgraph(std::span<const NodeId> nodes) const {
  std::vector<NodeId> remap(static_cast<std::size_t>(n_), -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const NodeId old = nodes[k];
    if (old < 0 || old >= n_) throw Error(ErrorCode::IndexOutOfRange, "subgraph node out of range");
    remap[old] = static_cast<NodeId>(k);
  }
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (const auto& e : edges_) {
    if (remap[e.u] >= 0 && remap[e.v] >= 0) pairs.emplace_back(remap[e.u], remap[e.v]);
  }
  return from_edges(pairs, static_cast<NodeId>(nodes.size()));
}

std::vector<NodeId> component_ids(const Graph& g) {
  const NodeId n = g.num_nodes();
  std::vector<NodeId> comp(static_cast<std::size_t>(n), -1);
  NodeId next = 0;
  std::deque<NodeId> queue;
  for (NodeId s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    queue.push_back(s);
    while (!queue.empty()) {
      const NodeId v = queue.front();
      queue.pop_front();
      for (NodeId w : g.neighbors(v)) {
        if (comp[w] < 0) {
          comp[w] = next;
          queue.push_back(w);
        }
      }
    }
    ++next;
  }
  return comp;
}

bool validate_connected(const Graph& g) {
  const auto comp = component_ids(g);
  return std::all_of(comp.begin(), comp.end(), [](NodeId c) { return c == 0; });
}

ComponentExtraction extract_largest_component(const Graph& g) {
  const auto comp = component_ids(g);
  ComponentExtraction out;
  if (comp.empty()) return out;
  const NodeId num_comp = *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<NodeId> sizes(static_cast<std::size_t>(num_comp), 0);
  for (NodeId c : comp) ++sizes[c];
  const NodeId best = static_cast<NodeId>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    (comp[i] == best ? out.kept : out.dropped).push_back(i);
  }
  out.graph = out.dropped.empty() ? g : g.induced_subgraph(out.kept);
  return out;
}

Laplacian::Laplacian(const Graph& g) : degrees_(g.num_nodes()), connected_(g.is_connected()) {
  const NodeId n = g.num_nodes();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) + 2 * g.num_edges());
  for (NodeId i = 0; i < n; ++i) {
    // Degrees are exact integers; the cast happens after summation.
    degrees_[i] = static_cast<double>(g.degree(i));
    trips.emplace_back(i, i, degrees_[i]);
  }
  for (const auto& e : g.edges()) {
    trips.emplace_back(e.u, e.v, -1.0);
    trips.emplace_back(e.v, e.u, -1.0);
  }
  matrix_.resize(n, n);
  matrix_.setFromTriplets(trips.begin(), trips.end());
  matrix_.makeCompressed();
}

Eigen::MatrixXd Laplacian::dense() const {
  if (size() > kMaxDenseNodes) throw Error(ErrorCode::TooLarge, "dense Laplacian limited to 2000 nodes");
  return Eigen::MatrixXd(matrix_);
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

}  // namespace

EdgeListFile read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IOError, "cannot open " + path.string());
  EdgeListFile out;
  const std::string name = path.filename().string();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t pos = 0;
    while (pos < line.size() && is_space(line[pos])) ++pos;
    if (pos == line.size()) continue;
    if (line[pos] == '#') {
      constexpr std::string_view kHeader = "# nodes ";
      if (line.compare(pos, kHeader.size(), kHeader) == 0) {
        const char* first = line.data() + pos + kHeader.size();
        NodeId n = -1;
        auto [p, ec] = std::from_chars(first, line.data() + line.size(), n);
        if (ec == std::errc() && n >= 0) out.declared_nodes = n;
      }
      continue;
    }
    NodeId ids[2];
    for (int t = 0; t < 2; ++t) {
      while (pos < line.size() && is_space(line[pos])) ++pos;
      if (pos == line.size()) throw ParseError(name, lineno, pos + 1, "expected two node ids");
      const char* first = line.data() + pos;
      auto [p, ec] = std::from_chars(first, line.data() + line.size(), ids[t]);
      if (ec != std::errc() || (p != line.data() + line.size() && !is_space(*p))) {
        throw ParseError(name, lineno, pos + 1, "invalid node id");
      }
      if (ids[t] < 0) throw ParseError(name, lineno, pos + 1, "negative node id");
      pos = static_cast<std::size_t>(p - line.data());
    }
    while (pos < line.size() && is_space(line[pos])) ++pos;
    if (pos != line.size()) throw ParseError(name, lineno, pos + 1, "trailing tokens after edge");
    out.pairs.emplace_back(ids[0], ids[1]);
    out.lines.push_back(lineno);
  }
  return out;
}

NodeId implied_node_count(const EdgeListFile& file) {
  if (file.declared_nodes >= 0) return file.declared_nodes;
  NodeId n = 0;
  for (const auto& [a, b] : file.pairs) n = std::max({n, a + 1, b + 1});
  return n;
}

void write_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IOError, "cannot write " + path.string());
  out << "# nodes " << g.num_nodes() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
  if (!out) throw Error(ErrorCode::IOError, "write failed for " + path.string());
}

}  // namespace jane
