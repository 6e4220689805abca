#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "jane/genmodel.hpp"
#include "jane/graph.hpp"
#include "jane/random.hpp"

namespace jane {

/// Weights of softmax(ReLU([X U] W0) W1).
struct ClassifierParams {
  Eigen::MatrixXd W0;  ///< (d + k) x h
  Eigen::MatrixXd W1;  ///< h x M

  int input_dim() const noexcept { return static_cast<int>(W0.rows()); }
  int hidden() const noexcept { return static_cast<int>(W0.cols()); }
  int num_classes() const noexcept { return static_cast<int>(W1.cols()); }

  /// Uniform(-a, a) entries with a = sqrt(6 / (fan_in + fan_out)), per layer.
  static ClassifierParams glorot(int input_dim, int hidden, int num_classes, Rng& rng);

  friend bool operator==(const ClassifierParams& a, const ClassifierParams& b) {
    return a.W0.rows() == b.W0.rows() && a.W0.cols() == b.W0.cols() && a.W1.rows() == b.W1.rows() &&
           a.W1.cols() == b.W1.cols() && a.W0 == b.W0 && a.W1 == b.W1;
  }
};

struct ParamGrads {
  Eigen::MatrixXd dW0;
  Eigen::MatrixXd dW1;
};

/// Intermediate values of one forward pass, kept for backprop.
struct ForwardTrace {
  Eigen::MatrixXd input;        ///< [X U], after input dropout
  Eigen::MatrixXd input_mask;   ///< kept entries scaled by 1/(1-p); empty without dropout
  Eigen::MatrixXd z0;           ///< input * W0
  Eigen::MatrixXd a0;           ///< ReLU(z0), after hidden dropout
  Eigen::MatrixXd hidden_mask;  ///< same convention as input_mask
  Eigen::MatrixXd a1;           ///< row-wise softmax probabilities
  int x_cols = 0;
};

/// Nodes whose labels enter the loss. `labels` is indexed by node id.
struct LabelSet {
  std::span<const NodeId> nodes;
  std::span<const int> labels;
};

/// Probabilities are clamped to this floor before taking logs.
inline constexpr double kProbabilityFloor = 1e-12;

/// Row-wise softmax with max subtraction.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

/// Evaluation pass, no dropout. Throws ShapeMismatch.
ForwardTrace forward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, const ClassifierParams& params);

/// Training pass with inverted dropout of `rate` on the inputs of both
/// layers. A rate of 0 draws nothing from `rng`.
ForwardTrace forward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, const ClassifierParams& params,
                     double dropout_rate, Rng& rng);

/// Mean negative log-probability of the true class over `labelled`.
/// Throws EmptyLabelSet.
double nll_loss(const ForwardTrace& trace, const LabelSet& labelled);

/// Exact gradients of nll_loss + (weight_decay / 2) * (|W0|^2 + |W1|^2).
ParamGrads grad_params(const ForwardTrace& trace, const Eigen::MatrixXd& X, const Eigen::MatrixXd& U,
                       const LabelSet& labelled, const ClassifierParams& params, double weight_decay);

/// Gradient of nll_loss with respect to U (rows outside `labelled` are 0).
Eigen::MatrixXd grad_U_supervised(const ForwardTrace& trace, const Eigen::MatrixXd& X, const Eigen::MatrixXd& U,
                                  const LabelSet& labelled, const ClassifierParams& params);

/// Gradient of adjacency_surrogate with respect to U:
///   sum_{j~i} 2 (u_i - u_j) / s^2 - sum_{j!~i} 2 (u_i - u_j) / s^2 exp(-|u_i - u_j|^2 / s^2).
Eigen::MatrixXd grad_U_adjacency(const Graph& g, const LatentState& state);

/// Arg-max class per node without dropout; ties go to the lowest index.
std::vector<int> predict(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, const ClassifierParams& params);

/// Arg-max per row with lowest-index tie-break.
std::vector<int> argmax_rows(const Eigen::MatrixXd& probs);

/// Fraction of `nodes` whose prediction equals the known label; nodes with
/// unknown labels are skipped. Returns 0 when nothing is scorable.
double accuracy(std::span<const int> predicted, std::span<const int> labels, std::span<const NodeId> nodes);

struct Checkpoint {
  ClassifierParams params;
  std::optional<Eigen::MatrixXd> U;
  double latent_scale = 1.0;  ///< the network input is [X, latent_scale * U]
};

/// JSON container, format "jane-classifier" version 1:
///   {"format", "version", "input_dim", "hidden", "num_classes",
///    "W0": [row-major], "W1": [row-major], "latent_scale",
///    optional "U": {"rows", "cols", "data"}}
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace jane
