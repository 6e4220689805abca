#include "jane/trainer.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace jane {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Jane: return "jane";
    case Variant::JaneNU: return "jane-nu";
    case Variant::JaneR: return "jane-r";
  }
  return "jane";
}

Variant parse_variant(std::string_view name) {
  if (name == "jane") return Variant::Jane;
  if (name == "jane-nu") return Variant::JaneNU;
  if (name == "jane-r") return Variant::JaneR;
  throw Error(ErrorCode::InvalidConfig, "unknown variant '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (!(lr_w > 0.0)) throw Error(ErrorCode::InvalidConfig, "lr_w must be > 0");
  // lr_u = 0 is allowed: it reduces JANE to JANE-NU.
  if (!(lr_u >= 0.0)) throw Error(ErrorCode::InvalidConfig, "lr_u must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorCode::InvalidConfig, "dropout must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw Error(ErrorCode::InvalidConfig, "weight_decay must be >= 0");
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  if (!(scale_sq > 0.0)) throw Error(ErrorCode::NonPositiveScale, "scale_sq must be > 0");
  if (hidden < 1) throw Error(ErrorCode::InvalidConfig, "hidden must be >= 1");
  if (early_stop_patience < 0) throw Error(ErrorCode::InvalidConfig, "early_stop_patience must be >= 0");
  if (!(latent_input_scale >= 0.0)) throw Error(ErrorCode::InvalidConfig, "latent_input_scale must be >= 0");
  if (u_update_every < 1) throw Error(ErrorCode::InvalidConfig, "u_update_every must be >= 1");
}

bool TrainReport::same_outcome(const TrainReport& o) const {
  return config == o.config && epochs == o.epochs && initial_objective == o.initial_objective &&
         params == o.params && latent_input_scale == o.latent_input_scale && U.rows() == o.U.rows() && U.cols() == o.U.cols() && U == o.U &&
         epochs_run == o.epochs_run && test_acc == o.test_acc;
}

LatentState init_U(const Graph& g, const TrainConfig& cfg, Rng& rng) {
  LatentState state;
  state.scale_sq = cfg.scale_sq;
  if (cfg.variant != Variant::JaneR) {
    state.U = smallest_nontrivial_eigs(Laplacian(g), cfg.k).eigenvectors;
    return state;
  }
  const NodeId n = g.num_nodes();
  if (cfg.k > n - 1) throw Error(ErrorCode::KTooLarge, "k exceeds n-1");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  state.U.resize(n, cfg.k);
  for (NodeId i = 0; i < n; ++i) {
    for (int c = 0; c < cfg.k; ++c) state.U(i, c) = scale * normal(rng);
  }
  for (int c = 0; c < cfg.k; ++c) {
    auto col = state.U.col(c);
    col.array() -= col.mean();
    col.normalize();
  }
  return state;
}

double resolve_latent_scale(const TrainConfig& cfg, NodeId n) {
  return cfg.latent_input_scale > 0.0 ? cfg.latent_input_scale : std::sqrt(static_cast<double>(n));
}

double objective(const Dataset& ds, const Graph& g, const LatentState& state, const ClassifierParams& params,
                 double latent_scale) {
  const ForwardTrace trace = forward(ds.X, latent_scale * state.U, params);
  return nll_loss(trace, LabelSet{ds.train, ds.labels}) + adjacency_surrogate(g, state);
}

std::vector<int> predict(const Dataset& ds, const TrainReport& report) {
  return predict(ds.X, report.latent_input_scale * report.U, report.params);
}

namespace {

struct AdamMoments {
  Eigen::MatrixXd m;
  Eigen::MatrixXd v;
};

void adam_step(Eigen::MatrixXd& w, const Eigen::MatrixXd& grad, AdamMoments& s, const TrainConfig& cfg,
               int step) {
  if (s.m.size() == 0) {
    s.m = Eigen::MatrixXd::Zero(w.rows(), w.cols());
    s.v = Eigen::MatrixXd::Zero(w.rows(), w.cols());
  }
  s.m = cfg.adam_beta1 * s.m + (1.0 - cfg.adam_beta1) * grad;
  s.v = cfg.adam_beta2 * s.v + (1.0 - cfg.adam_beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, step);
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, step);
  w.array() -= cfg.lr_w * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + cfg.adam_eps);
}

}  // namespace

TrainReport train(const Dataset& ds, const Graph& g, const TrainConfig& cfg, Rng& rng,
                  const std::optional<ClassifierParams>& initial) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  if (ds.train.empty()) throw Error(ErrorCode::EmptyLabelSet, "training split is empty");
  if (ds.num_nodes() != g.num_nodes()) throw Error(ErrorCode::ShapeMismatch, "dataset and graph sizes differ");

  TrainReport report;
  report.config = cfg;
  LatentState state = init_U(g, cfg, rng);
  const int input_dim = static_cast<int>(ds.X.cols()) + cfg.k;
  ClassifierParams params =
      initial ? *initial : ClassifierParams::glorot(input_dim, cfg.hidden, ds.num_classes, rng);
  if (params.input_dim() != input_dim || params.num_classes() != ds.num_classes) {
    throw Error(ErrorCode::ShapeMismatch, "initial parameters do not fit the dataset");
  }

  const LabelSet train_set{ds.train, ds.labels};
  const bool updates_u = cfg.variant != Variant::JaneNU;
  AdamMoments adam0;
  AdamMoments adam1;
  const double c = resolve_latent_scale(cfg, g.num_nodes());
  report.latent_input_scale = c;
  double adj = adjacency_surrogate(g, state);
  report.initial_objective = nll_loss(forward(ds.X, c * state.U, params), train_set) + adj;

  auto finish = [&] {
    report.params = params;
    report.U = state.U;
    report.epochs_run = static_cast<int>(report.epochs.size());
    report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };

  double best_val = -1.0;
  int since_best = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Eigen::MatrixXd net_u = c * state.U;
    const ForwardTrace trace = forward(ds.X, net_u, params, cfg.dropout, rng);
    const ParamGrads grads = grad_params(trace, ds.X, net_u, train_set, params, cfg.weight_decay);
    if (cfg.optimizer == WeightOptimizer::Adam) {
      adam_step(params.W0, grads.dW0, adam0, cfg, epoch);
      adam_step(params.W1, grads.dW1, adam1, cfg, epoch);
    } else {
      params.W0 -= cfg.lr_w * grads.dW0;
      params.W1 -= cfg.lr_w * grads.dW1;
    }

    if (updates_u && epoch % cfg.u_update_every == 0) {
      const ForwardTrace fixed_w = forward(ds.X, net_u, params);
      const Eigen::MatrixXd dU =
          c * grad_U_supervised(fixed_w, ds.X, net_u, train_set, params) + grad_U_adjacency(g, state);
      state.U -= cfg.lr_u * dU;
      net_u = c * state.U;
      if (!state.U.allFinite()) {
        finish();
        throw DivergenceError(std::move(report));
      }
      adj = adjacency_surrogate(g, state);
    }

    const ForwardTrace eval = forward(ds.X, net_u, params);
    const std::vector<int> predicted = argmax_rows(eval.a1);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = nll_loss(eval, train_set);
    rec.adj_nll = adj;
    rec.objective = rec.loss + rec.adj_nll;
    rec.train_acc = accuracy(predicted, ds.labels, ds.train);
    rec.val_acc = accuracy(predicted, ds.labels, ds.val);
    report.epochs.push_back(rec);
    if (!std::isfinite(rec.objective)) {
      finish();
      throw DivergenceError(std::move(report));
    }

    if (cfg.early_stop_patience > 0 && !ds.val.empty()) {
      if (rec.val_acc > best_val) {
        best_val = rec.val_acc;
        since_best = 0;
      } else if (++since_best >= cfg.early_stop_patience) {
        break;
      }
    }
  }

  report.test_acc = accuracy(predict(ds.X, c * state.U, params), ds.labels, ds.test);
  finish();
  return report;
}

TrainReport train(const Dataset& ds, const Graph& g, const TrainConfig& cfg) {
  Rng rng(cfg.seed);
  return train(ds, g, cfg, rng);
}

}  // namespace jane
