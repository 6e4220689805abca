#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "jane/classifier.hpp"
#include "jane/error.hpp"
#include "jane/genmodel.hpp"
#include "jane/graph.hpp"
#include "jane/random.hpp"
#include "jane/spectral.hpp"

namespace jane {

/// JANE updates U each epoch; JaneNU keeps the spectral estimate fixed;
/// JaneR starts U from a random matrix and updates it like JANE.
enum class Variant { Jane, JaneNU, JaneR };

std::string_view to_string(Variant v);
/// Accepts "jane", "jane-nu", "jane-r". Throws InvalidConfig otherwise.
Variant parse_variant(std::string_view name);

enum class WeightOptimizer { Adam, GradientDescent };

struct TrainConfig {
  int epochs = 200;
  double lr_w = 0.005;
  double lr_u = 1e-4;
  double dropout = 0.2;
  double weight_decay = 5e-2;
  int k = 2;
  double scale_sq = 0.01;
  int hidden = 16;
  /// The network sees [X, c * U]. c = 0 selects sqrt(n), which gives the
  /// unit-norm spectral columns unit root-mean-square entries like X. This
  /// only rescales the latent rows of W0; the adjacency term uses U as is.
  double latent_input_scale = 0.0;
  Variant variant = Variant::Jane;
  std::uint64_t seed = 0;
  /// Stop after this many epochs without a validation-accuracy gain; 0 = off.
  int early_stop_patience = 0;
  /// U is updated on epochs divisible by this.
  int u_update_every = 1;
  WeightOptimizer optimizer = WeightOptimizer::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  /// Throws InvalidConfig.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;     ///< training nll after the epoch's updates, dropout off
  double adj_nll = 0.0;  ///< adjacency surrogate
  double objective = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainReport {
  TrainConfig config;
  std::vector<EpochRecord> epochs;
  double initial_objective = 0.0;
  ClassifierParams params;
  Eigen::MatrixXd U;
  double latent_input_scale = 1.0;  ///< resolved value of c
  int epochs_run = 0;
  double test_acc = 0.0;
  double wall_ms = 0.0;

  /// Everything except wall time.
  bool same_outcome(const TrainReport& other) const;
};

/// Raised when the objective stops being finite; carries the epochs so far.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(TrainReport partial)
      : Error(ErrorCode::DivergenceDetected, "objective became non-finite at epoch " +
                                                 std::to_string(partial.epochs_run)),
        report_(std::move(partial)) {}
  const TrainReport& report() const noexcept { return report_; }

 private:
  TrainReport report_;
};

/// Initial latent estimate: the k smallest nontrivial Laplacian eigenvectors
/// (JANE, JANE-NU), or i.i.d. N(0, 1/n) entries projected onto centered,
/// unit-norm columns (JANE-R).
LatentState init_U(const Graph& g, const TrainConfig& cfg, Rng& rng);

/// Alternating maximum-likelihood training. Each epoch takes one optimizer
/// step on (W0, W1) using a dropout forward pass on the training labels, then
/// (JANE, JANE-R) one gradient step on U with W held at its new value. The U
/// step evaluates the network without dropout.
///
/// `initial` overrides the seeded Glorot initialization of the weights.
/// Throws DivergenceError when the objective becomes NaN or infinite.
TrainReport train(const Dataset& ds, const Graph& g, const TrainConfig& cfg, Rng& rng,
                  const std::optional<ClassifierParams>& initial = std::nullopt);

/// Seeds an Rng from `cfg.seed`.
TrainReport train(const Dataset& ds, const Graph& g, const TrainConfig& cfg);

/// Resolves `cfg.latent_input_scale` for a graph with n nodes.
double resolve_latent_scale(const TrainConfig& cfg, NodeId n);

/// Training nll (no dropout) with network input [X, latent_scale * U] plus
/// the adjacency surrogate at `state`.
double objective(const Dataset& ds, const Graph& g, const LatentState& state, const ClassifierParams& params,
                 double latent_scale = 1.0);

/// Predictions of a trained report on its dataset.
std::vector<int> predict(const Dataset& ds, const TrainReport& report);

}  // namespace jane
