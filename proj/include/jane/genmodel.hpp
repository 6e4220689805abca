#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jane/graph.hpp"
#include "jane/random.hpp"

namespace jane {

inline constexpr int kUnknownLabel = -1;

/// Latent node positions U (n x k) and the edge-probability scale s^2.
struct LatentState {
  Eigen::MatrixXd U;
  double scale_sq = 1.0;

  /// Throws NonPositiveScale for s^2 <= 0 or non-finite, InvalidConfig for
  /// non-finite entries of U.
  void validate() const;
};

struct SynthConfig {
  int n = 200;
  int d = 2;
  int k = 2;
  int M = 4;
  double alpha = 0.0;
  double scale_sq_gen = 1.0;
  /// Distance between the two class means on every label-informative
  /// coordinate; noise on each coordinate has unit variance.
  double class_sep = 4.5;
  std::uint64_t seed = 0;

  /// Throws InvalidConfig when any field is out of range or the label code
  /// does not fit in the available coordinates.
  void validate() const;

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

/// Node attributes, labels, and a transductive split.
struct Dataset {
  Eigen::MatrixXd X;
  std::vector<int> labels;  ///< class index per node, or kUnknownLabel
  int num_classes = 0;
  std::vector<std::string> class_names;  ///< class index -> external name
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
  /// Generating latent positions, kept for diagnostics only.
  std::optional<Eigen::MatrixXd> true_U;
  /// original_ids[node] = id in the source data; empty means identity.
  std::vector<std::int64_t> original_ids;
  /// Generator settings when the dataset is synthetic.
  std::optional<SynthConfig> synth;

  NodeId num_nodes() const noexcept { return static_cast<NodeId>(X.rows()); }

  /// Checks shapes, label range, and that splits are disjoint, in range,
  /// and (for train/val) labelled. Throws DimensionMismatch,
  /// UnknownLabelValue, or InvalidConfig.
  void validate() const;
};

/// A dataset together with its graph.
struct AttributedGraph {
  Dataset data;
  Graph graph;
  /// Nodes removed by largest-component extraction, as ids before removal.
  std::vector<NodeId> dropped;
};

/// exp(-|u_i - u_j|^2 / s^2). Throws NonPositiveScale, ShapeMismatch.
double edge_prob(const Eigen::Ref<const Eigen::RowVectorXd>& u_i, const Eigen::Ref<const Eigen::RowVectorXd>& u_j,
                 double scale_sq);

/// Samples every unordered pair independently with its edge probability.
/// Pairs are visited in (i, j), i < j, order with one uniform draw each.
Graph sample_graph(const LatentState& state, Rng& rng);

/// log Pr[A | U] summed over all unordered pairs. Returns -infinity when a
/// non-edge has probability exactly 1.
double log_likelihood_adjacency(const Graph& g, const LatentState& state);

/// Upper bound on -log Pr[A | U] used during optimization:
/// sum over edges of |du|^2 / s^2 plus sum over non-edges of exp(-|du|^2 / s^2).
double adjacency_surrogate(const Graph& g, const LatentState& state);

/// Synthetic attributed graph whose labels depend on X, U, or both.
///
/// Labels are balanced over the M classes and shuffled. Each class is coded
/// by ceil(log2 M) binary "informative slots"; the first ceil(alpha * slots)
/// slots live on the leading coordinates of X and the rest on the leading
/// coordinates of U. On an informative coordinate a node is drawn from
/// N(+-class_sep/2, 1) by its bit; every other coordinate is N(0, 1). The
/// graph is sampled from U and reduced to its largest component, with X,
/// labels, and U restricted accordingly. No split is made.
AttributedGraph generate_synthetic(const SynthConfig& cfg, Rng& rng);

/// Same, seeded from `cfg.seed`.
AttributedGraph generate_synthetic(const SynthConfig& cfg);

/// Number of label-informative X coordinates for a config.
int informative_x_slots(const SynthConfig& cfg);
/// Number of label-informative U coordinates for a config.
int informative_u_slots(const SynthConfig& cfg);

/// Stratified random split of the labelled nodes. Each class contributes
/// floor or ceil of its share (largest-remainder rounding keeps the totals at
/// round(frac * labelled)). Every node not in train or val goes to test.
/// Throws InvalidFraction unless 0 < train_frac, 0 <= val_frac, and
/// train_frac + val_frac < 1.
Dataset make_splits(Dataset ds, double train_frac, double val_frac, Rng& rng);

/// Restricts a dataset to `kept` nodes (old ids, ascending), remapping splits
/// and dropping split entries for removed nodes.
Dataset restrict_nodes(const Dataset& ds, const std::vector<NodeId>& kept);

}  // namespace jane
