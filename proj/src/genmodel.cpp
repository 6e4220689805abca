#include "jane/genmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "jane/error.hpp"

namespace jane {

namespace {

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int label_code_bits(int num_classes) {
  int bits = 0;
  while ((1 << bits) < num_classes) ++bits;
  return bits;
}

void check_split(const std::vector<NodeId>& idx, NodeId n, const char* name, std::vector<char>& seen) {
  for (NodeId i : idx) {
    if (i < 0 || i >= n) throw Error(ErrorCode::IndexOutOfRange, std::string(name) + " split index out of range");
    if (seen[i]) throw Error(ErrorCode::InvalidConfig, std::string(name) + " split overlaps another split");
    seen[i] = 1;
  }
}

}  // namespace

void LatentState::validate() const {
  if (!(scale_sq > 0.0) || !std::isfinite(scale_sq)) {
    throw Error(ErrorCode::NonPositiveScale, "scale_sq must be positive and finite");
  }
  if (!U.allFinite()) throw Error(ErrorCode::InvalidConfig, "latent positions contain NaN or Inf");
}

void SynthConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidConfig, "alpha must lie in [0, 1]");
  if (M < 2 || n < M) throw Error(ErrorCode::InvalidConfig, "need n >= M >= 2");
  if (d < 1 || k < 1) throw Error(ErrorCode::InvalidConfig, "need d >= 1 and k >= 1");
  if (informative_x_slots(*this) > d || informative_u_slots(*this) > k) {
    throw Error(ErrorCode::InvalidConfig, "label code needs more coordinates than d or k provide");
  }
  if (!(scale_sq_gen > 0.0) || !std::isfinite(scale_sq_gen)) {
    throw Error(ErrorCode::InvalidConfig, "scale_sq_gen must be positive and finite");
  }
  if (!(class_sep >= 0.0) || !std::isfinite(class_sep)) throw Error(ErrorCode::InvalidConfig, "class_sep must be >= 0");
}

int informative_x_slots(const SynthConfig& cfg) {
  const int bits = label_code_bits(cfg.M);
  // The epsilon keeps alpha * bits = 1.0000000000000002 from rounding up.
  return static_cast<int>(std::ceil(cfg.alpha * bits - 1e-9));
}

int informative_u_slots(const SynthConfig& cfg) { return label_code_bits(cfg.M) - informative_x_slots(cfg); }

void Dataset::validate() const {
  const NodeId n = num_nodes();
  if (static_cast<NodeId>(labels.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "label count differs from attribute rows");
  }
  if (true_U && true_U->rows() != n) throw Error(ErrorCode::DimensionMismatch, "true_U row count differs");
  if (!original_ids.empty() && static_cast<NodeId>(original_ids.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "original_ids length differs");
  }
  for (int y : labels) {
    if (y != kUnknownLabel && (y < 0 || y >= num_classes)) {
      throw Error(ErrorCode::UnknownLabelValue, "label " + std::to_string(y) + " outside [0, M)");
    }
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  check_split(train, n, "train", seen);
  check_split(val, n, "val", seen);
  check_split(test, n, "test", seen);
  for (const auto* split : {&train, &val}) {
    for (NodeId i : *split) {
      if (labels[i] == kUnknownLabel) throw Error(ErrorCode::InvalidConfig, "train/val node without a label");
    }
  }
}

double edge_prob(const Eigen::Ref<const Eigen::RowVectorXd>& u_i, const Eigen::Ref<const Eigen::RowVectorXd>& u_j,
                 double scale_sq) {
  if (!(scale_sq > 0.0)) throw Error(ErrorCode::NonPositiveScale, "scale_sq must be positive");
  if (u_i.size() != u_j.size()) throw Error(ErrorCode::ShapeMismatch, "latent vectors differ in length");
  return std::exp(-(u_i - u_j).squaredNorm() / scale_sq);
}

Graph sample_graph(const LatentState& state, Rng& rng) {
  state.validate();
  const auto n = static_cast<NodeId>(state.U.rows());
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      const double p = std::exp(-(state.U.row(i) - state.U.row(j)).squaredNorm() / state.scale_sq);
      if (uniform01(rng) < p) pairs.emplace_back(i, j);
    }
  }
  return Graph::from_edges(pairs, n);
}

namespace {

void check_pair_shapes(const Graph& g, const LatentState& state) {
  state.validate();
  if (state.U.rows() != g.num_nodes()) {
    throw Error(ErrorCode::ShapeMismatch, "U has " + std::to_string(state.U.rows()) + " rows, graph has " +
                                              std::to_string(g.num_nodes()) + " nodes");
  }
}

/// Calls f(i, j, is_edge, squared_distance) for every unordered pair.
template <typename F>
void for_each_pair(const Graph& g, const Eigen::MatrixXd& U, F&& f) {
  const NodeId n = g.num_nodes();
  std::vector<char> adjacent(static_cast<std::size_t>(n), 0);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j : g.neighbors(i)) adjacent[j] = 1;
    for (NodeId j = i + 1; j < n; ++j) f(i, j, adjacent[j] != 0, (U.row(i) - U.row(j)).squaredNorm());
    for (NodeId j : g.neighbors(i)) adjacent[j] = 0;
  }
}

}  // namespace

double log_likelihood_adjacency(const Graph& g, const LatentState& state) {
  check_pair_shapes(g, state);
  double total = 0.0;
  bool impossible = false;
  for_each_pair(g, state.U, [&](NodeId, NodeId, bool edge, double dist2) {
    const double t = dist2 / state.scale_sq;
    if (edge) {
      total -= t;
    } else if (t == 0.0) {
      impossible = true;
    } else {
      total += std::log1p(-std::exp(-t));
    }
  });
  return impossible ? -std::numeric_limits<double>::infinity() : total;
}

double adjacency_surrogate(const Graph& g, const LatentState& state) {
  check_pair_shapes(g, state);
  double total = 0.0;
  for_each_pair(g, state.U, [&](NodeId, NodeId, bool edge, double dist2) {
    const double t = dist2 / state.scale_sq;
    total += edge ? t : std::exp(-t);
  });
  return total;
}

Dataset restrict_nodes(const Dataset& ds, const std::vector<NodeId>& kept) {
  const NodeId n = ds.num_nodes();
  std::vector<NodeId> remap(static_cast<std::size_t>(n), -1);
  for (std::size_t k = 0; k < kept.size(); ++k) remap[kept[k]] = static_cast<NodeId>(k);

  Dataset out;
  const auto m = static_cast<Eigen::Index>(kept.size());
  out.X.resize(m, ds.X.cols());
  out.labels.resize(kept.size());
  if (ds.true_U) out.true_U = Eigen::MatrixXd(m, ds.true_U->cols());
  for (Eigen::Index r = 0; r < m; ++r) {
    const NodeId old = kept[static_cast<std::size_t>(r)];
    out.X.row(r) = ds.X.row(old);
    out.labels[static_cast<std::size_t>(r)] = ds.labels[old];
    if (ds.true_U) out.true_U->row(r) = ds.true_U->row(old);
    out.original_ids.push_back(ds.original_ids.empty() ? old : ds.original_ids[old]);
  }
  auto remap_split = [&](const std::vector<NodeId>& in) {
    std::vector<NodeId> res;
    for (NodeId i : in) {
      if (remap[i] >= 0) res.push_back(remap[i]);
    }
    return res;
  };
  out.train = remap_split(ds.train);
  out.val = remap_split(ds.val);
  out.test = remap_split(ds.test);
  out.num_classes = ds.num_classes;
  out.class_names = ds.class_names;
  out.synth = ds.synth;
  return out;
}

AttributedGraph generate_synthetic(const SynthConfig& cfg, Rng& rng) {
  cfg.validate();
  const int x_slots = informative_x_slots(cfg);
  const int bits = label_code_bits(cfg.M);

  std::vector<int> labels(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) labels[i] = i % cfg.M;
  std::shuffle(labels.begin(), labels.end(), rng);

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd X(cfg.n, cfg.d);
  Eigen::MatrixXd U(cfg.n, cfg.k);
  for (int i = 0; i < cfg.n; ++i) {
    for (int c = 0; c < cfg.d; ++c) X(i, c) = normal(rng);
    for (int c = 0; c < cfg.k; ++c) U(i, c) = normal(rng);
    for (int b = 0; b < bits; ++b) {
      const double shift = ((labels[i] >> b) & 1) ? 0.5 * cfg.class_sep : -0.5 * cfg.class_sep;
      if (b < x_slots) {
        X(i, b) += shift;
      } else {
        U(i, b - x_slots) += shift;
      }
    }
  }

  const Graph full = sample_graph(LatentState{U, cfg.scale_sq_gen}, rng);

  Dataset ds;
  ds.X = std::move(X);
  ds.labels = std::move(labels);
  ds.num_classes = cfg.M;
  for (int c = 0; c < cfg.M; ++c) ds.class_names.push_back(std::to_string(c));
  ds.true_U = std::move(U);
  ds.synth = cfg;

  AttributedGraph out;
  if (full.is_connected()) {
    out.data = std::move(ds);
    out.graph = full;
    return out;
  }
  ComponentExtraction lcc = extract_largest_component(full);
  out.data = restrict_nodes(ds, lcc.kept);
  out.graph = std::move(lcc.graph);
  out.dropped = std::move(lcc.dropped);
  return out;
}

AttributedGraph generate_synthetic(const SynthConfig& cfg) {
  Rng rng(cfg.seed);
  return generate_synthetic(cfg, rng);
}

namespace {

/// Splits `total` units across buckets proportional to `quota` with floors
/// plus largest remainders (ties to the lower bucket index).
std::vector<std::size_t> apportion(const std::vector<double>& quota, std::size_t total) {
  std::vector<std::size_t> counts(quota.size());
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < quota.size(); ++c) {
    counts[c] = static_cast<std::size_t>(std::floor(quota[c]));
    assigned += counts[c];
  }
  std::vector<std::size_t> order(quota.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quota[a] - std::floor(quota[a]) > quota[b] - std::floor(quota[b]);
  });
  for (std::size_t t = 0; assigned < total && t < order.size(); ++t, ++assigned) ++counts[order[t]];
  return counts;
}

}  // namespace

Dataset make_splits(Dataset ds, double train_frac, double val_frac, Rng& rng) {
  if (!(train_frac > 0.0) || !(val_frac >= 0.0) || !(train_frac + val_frac < 1.0)) {
    throw Error(ErrorCode::InvalidFraction, "need 0 < train_frac, 0 <= val_frac, train_frac + val_frac < 1");
  }
  const NodeId n = ds.num_nodes();
  std::vector<std::vector<NodeId>> by_class(static_cast<std::size_t>(ds.num_classes));
  std::size_t labelled = 0;
  for (NodeId i = 0; i < n; ++i) {
    if (ds.labels[i] != kUnknownLabel) {
      by_class[ds.labels[i]].push_back(i);
      ++labelled;
    }
  }
  std::vector<double> train_quota;
  std::vector<double> val_quota;
  for (const auto& members : by_class) {
    train_quota.push_back(train_frac * static_cast<double>(members.size()));
    val_quota.push_back(val_frac * static_cast<double>(members.size()));
  }
  const auto train_counts =
      apportion(train_quota, static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(labelled))));
  const auto val_counts =
      apportion(val_quota, static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(labelled))));

  std::vector<char> role(static_cast<std::size_t>(n), 0);  // 1 train, 2 val
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto members = by_class[c];
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t nt = std::min(train_counts[c], members.size());
    const std::size_t nv = std::min(val_counts[c], members.size() - nt);
    for (std::size_t t = 0; t < nt; ++t) role[members[t]] = 1;
    for (std::size_t t = nt; t < nt + nv; ++t) role[members[t]] = 2;
  }
  ds.train.clear();
  ds.val.clear();
  ds.test.clear();
  for (NodeId i = 0; i < n; ++i) {
    (role[i] == 1 ? ds.train : role[i] == 2 ? ds.val : ds.test).push_back(i);
  }
  return ds;
}

}  // namespace jane
