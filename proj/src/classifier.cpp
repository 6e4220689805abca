#include "jane/classifier.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "jane/error.hpp"

namespace jane {

namespace {

using json = nlohmann::json;

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = bound * (2.0 * uniform01(rng) - 1.0);
  }
  return m;
}

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Eigen::MatrixXd mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) mask(r, c) = uniform01(rng) < rate ? 0.0 : keep_scale;
  }
  return mask;
}

void check_inputs(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, const ClassifierParams& params) {
  if (X.rows() != U.rows()) throw Error(ErrorCode::ShapeMismatch, "X and U differ in row count");
  if (X.cols() + U.cols() != params.W0.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "W0 expects " + std::to_string(params.W0.rows()) + " inputs, got " +
                                              std::to_string(X.cols() + U.cols()));
  }
  if (params.W0.cols() != params.W1.rows()) throw Error(ErrorCode::ShapeMismatch, "W0 and W1 hidden widths differ");
}

ForwardTrace run_forward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, const ClassifierParams& params,
                         double rate, Rng* rng) {
  check_inputs(X, U, params);
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(ErrorCode::InvalidConfig, "dropout rate must lie in [0, 1)");
  ForwardTrace t;
  t.x_cols = static_cast<int>(X.cols());
  t.input.resize(X.rows(), X.cols() + U.cols());
  t.input << X, U;
  const bool drop = rng != nullptr && rate > 0.0;
  if (drop) {
    t.input_mask = dropout_mask(t.input.rows(), t.input.cols(), rate, *rng);
    t.input.array() *= t.input_mask.array();
  }
  t.z0.noalias() = t.input * params.W0;
  t.a0 = t.z0.cwiseMax(0.0);
  if (drop) {
    t.hidden_mask = dropout_mask(t.a0.rows(), t.a0.cols(), rate, *rng);
    t.a0.array() *= t.hidden_mask.array();
  }
  t.a1 = softmax_rows(t.a0 * params.W1);
  return t;
}

void check_labels(const ForwardTrace& trace, const LabelSet& labelled) {
  if (labelled.nodes.empty()) throw Error(ErrorCode::EmptyLabelSet, "no labelled nodes");
  for (NodeId i : labelled.nodes) {
    if (i < 0 || i >= trace.a1.rows() || static_cast<std::size_t>(i) >= labelled.labels.size()) {
      throw Error(ErrorCode::ShapeMismatch, "labelled node outside the trace");
    }
    const int y = labelled.labels[i];
    if (y < 0 || y >= trace.a1.cols()) throw Error(ErrorCode::UnknownLabelValue, "label outside [0, M)");
  }
}

/// d(nll_loss)/d(z0). Rows whose true-class probability sits below the floor
/// contribute zero.
Eigen::MatrixXd backprop_to_hidden(const ForwardTrace& trace, const LabelSet& labelled,
                                   const ClassifierParams& params, Eigen::MatrixXd* dlogits_out) {
  check_labels(trace, labelled);
  if (params.W1.cols() != trace.a1.cols() || params.W0.cols() != trace.z0.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "parameters do not match the trace");
  }
  Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(trace.a1.rows(), trace.a1.cols());
  const double scale = 1.0 / static_cast<double>(labelled.nodes.size());
  for (NodeId i : labelled.nodes) {
    const int y = labelled.labels[i];
    if (trace.a1(i, y) < kProbabilityFloor) continue;
    dlogits.row(i) += scale * trace.a1.row(i);
    dlogits(i, y) -= scale;
  }
  Eigen::MatrixXd dz0 = dlogits * params.W1.transpose();
  if (trace.hidden_mask.size() != 0) dz0.array() *= trace.hidden_mask.array();
  dz0.array() *= (trace.z0.array() > 0.0).cast<double>();
  if (dlogits_out != nullptr) *dlogits_out = std::move(dlogits);
  return dz0;
}

json matrix_payload(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return data;
}

Eigen::MatrixXd matrix_from_payload(const json& data, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw Error(ErrorCode::DimensionMismatch, std::string("checkpoint field ") + name + " has the wrong size");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)].get<double>();
  }
  return m;
}

}  // namespace

ClassifierParams ClassifierParams::glorot(int input_dim, int hidden, int num_classes, Rng& rng) {
  if (input_dim < 1 || hidden < 1 || num_classes < 1) throw Error(ErrorCode::InvalidConfig, "layer sizes must be >= 1");
  ClassifierParams p;
  p.W0 = uniform_matrix(input_dim, hidden, std::sqrt(6.0 / (input_dim + hidden)), rng);
  p.W1 = uniform_matrix(hidden, num_classes, std::sqrt(6.0 / (hidden + num_classes)), rng);
  return p;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double top = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - top).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

ForwardTrace forward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, const ClassifierParams& params) {
  return run_forward(X, U, params, 0.0, nullptr);
}

ForwardTrace forward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, const ClassifierParams& params,
                     double dropout_rate, Rng& rng) {
  return run_forward(X, U, params, dropout_rate, &rng);
}

double nll_loss(const ForwardTrace& trace, const LabelSet& labelled) {
  check_labels(trace, labelled);
  double total = 0.0;
  for (NodeId i : labelled.nodes) total -= std::log(std::max(trace.a1(i, labelled.labels[i]), kProbabilityFloor));
  return total / static_cast<double>(labelled.nodes.size());
}

ParamGrads grad_params(const ForwardTrace& trace, const Eigen::MatrixXd& X, const Eigen::MatrixXd& U,
                       const LabelSet& labelled, const ClassifierParams& params, double weight_decay) {
  check_inputs(X, U, params);
  Eigen::MatrixXd dlogits;
  const Eigen::MatrixXd dz0 = backprop_to_hidden(trace, labelled, params, &dlogits);
  ParamGrads g;
  g.dW1.noalias() = trace.a0.transpose() * dlogits;
  g.dW0.noalias() = trace.input.transpose() * dz0;
  if (weight_decay != 0.0) {
    g.dW1 += weight_decay * params.W1;
    g.dW0 += weight_decay * params.W0;
  }
  return g;
}

Eigen::MatrixXd grad_U_supervised(const ForwardTrace& trace, const Eigen::MatrixXd& X, const Eigen::MatrixXd& U,
                                  const LabelSet& labelled, const ClassifierParams& params) {
  check_inputs(X, U, params);
  const Eigen::MatrixXd dz0 = backprop_to_hidden(trace, labelled, params, nullptr);
  Eigen::MatrixXd dinput = dz0 * params.W0.transpose();
  if (trace.input_mask.size() != 0) dinput.array() *= trace.input_mask.array();
  return dinput.rightCols(U.cols());
}

Eigen::MatrixXd grad_U_adjacency(const Graph& g, const LatentState& state) {
  state.validate();
  const NodeId n = g.num_nodes();
  if (state.U.rows() != n) throw Error(ErrorCode::ShapeMismatch, "U rows differ from node count");
  const Eigen::MatrixXd& U = state.U;
  const double inv = 2.0 / state.scale_sq;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, U.cols());
  std::vector<char> adjacent(static_cast<std::size_t>(n), 0);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j : g.neighbors(i)) adjacent[j] = 1;
    for (NodeId j = i + 1; j < n; ++j) {
      const Eigen::RowVectorXd diff = U.row(i) - U.row(j);
      const double w = adjacent[j] ? inv : -inv * std::exp(-diff.squaredNorm() / state.scale_sq);
      grad.row(i) += w * diff;
      grad.row(j) -= w * diff;
    }
    for (NodeId j : g.neighbors(i)) adjacent[j] = 0;
  }
  return grad;
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& probs) {
  std::vector<int> out(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c) {
      if (probs(r, c) > probs(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> predict(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U, const ClassifierParams& params) {
  return argmax_rows(forward(X, U, params).a1);
}

double accuracy(std::span<const int> predicted, std::span<const int> labels, std::span<const NodeId> nodes) {
  std::size_t scored = 0;
  std::size_t correct = 0;
  for (NodeId i : nodes) {
    if (labels[i] == kUnknownLabel) continue;
    ++scored;
    if (predicted[i] == labels[i]) ++correct;
  }
  return scored == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(scored);
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto& p = ckpt.params;
  json doc = {{"format", "jane-classifier"},
              {"version", 1},
              {"input_dim", p.input_dim()},
              {"hidden", p.hidden()},
              {"num_classes", p.num_classes()},
              {"W0", matrix_payload(p.W0)},
              {"W1", matrix_payload(p.W1)},
              {"latent_scale", ckpt.latent_scale}};
  if (ckpt.U) doc["U"] = {{"rows", ckpt.U->rows()}, {"cols", ckpt.U->cols()}, {"data", matrix_payload(*ckpt.U)}};
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IOError, "cannot write " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw Error(ErrorCode::IOError, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IOError, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  if (doc.value("format", "") != "jane-classifier" || doc.value("version", 0) != 1) {
    throw Error(ErrorCode::ParseError, path.string() + ": not a version 1 jane-classifier checkpoint");
  }
  const auto input_dim = doc.at("input_dim").get<Eigen::Index>();
  const auto hidden = doc.at("hidden").get<Eigen::Index>();
  const auto classes = doc.at("num_classes").get<Eigen::Index>();
  Checkpoint ckpt;
  ckpt.params.W0 = matrix_from_payload(doc.at("W0"), input_dim, hidden, "W0");
  ckpt.params.W1 = matrix_from_payload(doc.at("W1"), hidden, classes, "W1");
  ckpt.latent_scale = doc.value("latent_scale", 1.0);
  if (doc.contains("U")) {
    const auto& u = doc["U"];
    ckpt.U = matrix_from_payload(u.at("data"), u.at("rows").get<Eigen::Index>(), u.at("cols").get<Eigen::Index>(), "U");
  }
  return ckpt;
}

}  // namespace jane
