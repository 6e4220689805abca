#include "jane/baselines.hpp"

#include <cmath>

#include "jane/classifier.hpp"
#include "jane/error.hpp"

namespace jane {

void LPConfig::validate() const {
  if (max_iters < 1) throw Error(ErrorCode::InvalidConfig, "max_iters must be >= 1");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "tol must be > 0");
}

LPResult label_propagation(const Graph& g, std::span<const NodeId> labelled, std::span<const int> labels,
                           int num_classes, const LPConfig& cfg) {
  cfg.validate();
  if (labelled.empty()) throw Error(ErrorCode::NoLabels, "label propagation needs at least one labelled node");
  if (num_classes < 1) throw Error(ErrorCode::InvalidConfig, "num_classes must be >= 1");
  const NodeId n = g.num_nodes();

  std::vector<char> clamped(static_cast<std::size_t>(n), 0);
  LPResult res;
  res.distribution = Eigen::MatrixXd::Constant(n, num_classes, 1.0 / num_classes);
  for (NodeId i : labelled) {
    if (i < 0 || i >= n) throw Error(ErrorCode::IndexOutOfRange, "labelled node out of range");
    const int y = labels[i];
    if (y < 0 || y >= num_classes) throw Error(ErrorCode::UnknownLabelValue, "label outside [0, M)");
    clamped[i] = 1;
    res.distribution.row(i).setZero();
    res.distribution(i, y) = 1.0;
  }

  const auto comp = component_ids(g);
  std::vector<char> comp_has_label(static_cast<std::size_t>(n), 0);
  for (NodeId i : labelled) comp_has_label[comp[i]] = 1;
  std::size_t unreached = 0;
  for (NodeId i = 0; i < n; ++i) {
    if (!comp_has_label[comp[i]]) ++unreached;
  }
  if (unreached > 0) {
    res.warnings.push_back(std::to_string(unreached) +
                           " node(s) lie in components without labels and default to class 0");
  }

  Eigen::MatrixXd next(n, num_classes);
  for (res.iterations = 1; res.iterations <= cfg.max_iters; ++res.iterations) {
    double change = 0.0;
    for (NodeId i = 0; i < n; ++i) {
      if (clamped[i] || g.degree(i) == 0) {
        next.row(i) = res.distribution.row(i);
        continue;
      }
      next.row(i).setZero();
      for (NodeId j : g.neighbors(i)) next.row(i) += res.distribution.row(j);
      next.row(i) /= static_cast<double>(g.degree(i));
      change = std::max(change, (next.row(i) - res.distribution.row(i)).cwiseAbs().maxCoeff());
    }
    res.distribution.swap(next);
    if (change < cfg.tol) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged) res.iterations = cfg.max_iters;
  res.labels = argmax_rows(res.distribution);
  return res;
}

}  // namespace jane
