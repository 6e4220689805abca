#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jane/graph.hpp"

namespace jane {

struct LPConfig {
  int max_iters = 1000;
  double tol = 1e-6;

  void validate() const;
  friend bool operator==(const LPConfig&, const LPConfig&) = default;
};

struct LPResult {
  std::vector<int> labels;
  Eigen::MatrixXd distribution;  ///< n x M, rows sum to 1
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Label propagation with row-stochastic diffusion F <- D^-1 A F.
///
/// Labelled rows are clamped to their one-hot vector, the rest start uniform.
/// Iteration stops when the largest entry change falls below `tol` or after
/// `max_iters`. Isolated unlabelled nodes keep the uniform row. Components
/// without any labelled node end at class 0 and add a warning. Arg-max ties
/// go to the lowest class index. Throws NoLabels when `labelled` is empty.
LPResult label_propagation(const Graph& g, std::span<const NodeId> labelled, std::span<const int> labels,
                           int num_classes, const LPConfig& cfg = {});

}  // namespace jane
