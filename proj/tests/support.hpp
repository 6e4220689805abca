#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "jane/graph.hpp"
#include "jane/random.hpp"

namespace testing {

using jane::Graph;
using jane::NodeId;
using jane::Rng;
using Pairs = std::vector<std::pair<NodeId, NodeId>>;

inline Graph make_graph(NodeId n, const Pairs& pairs) { return Graph::from_edges(pairs, n); }

inline Graph path_graph(NodeId n) {
  Pairs p;
  for (NodeId i = 0; i + 1 < n; ++i) p.emplace_back(i, i + 1);
  return make_graph(n, p);
}

inline Graph complete_graph(NodeId n) {
  Pairs p;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) p.emplace_back(i, j);
  }
  return make_graph(n, p);
}

inline Graph star_graph(NodeId n) {
  Pairs p;
  for (NodeId i = 1; i < n; ++i) p.emplace_back(0, i);
  return make_graph(n, p);
}

/// G(n, p) plus a random spanning tree, so the result is connected.
inline Graph random_connected(NodeId n, double p, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Pairs pairs;
  for (NodeId i = 1; i < n; ++i) {
    std::uniform_int_distribution<NodeId> parent(0, i - 1);
    pairs.emplace_back(parent(rng), i);
  }
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      if (u(rng) < p) pairs.emplace_back(i, j);
    }
  }
  return make_graph(n, pairs);
}

/// G(n, p) without any connectivity guarantee.
inline Graph random_graph(NodeId n, double p, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Pairs pairs;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      if (u(rng) < p) pairs.emplace_back(i, j);
    }
  }
  return make_graph(n, pairs);
}

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng, double sd = 1.0) {
  std::normal_distribution<double> nd(0.0, sd);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = nd(rng);
  }
  return m;
}

/// Centered, unit-norm columns.
inline Eigen::MatrixXd random_centered_unit(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m = gaussian(rows, cols, rng);
  for (Eigen::Index c = 0; c < cols; ++c) {
    m.col(c).array() -= m.col(c).mean();
    m.col(c).normalize();
  }
  return m;
}

/// Largest principal angle between the column spaces of two orthonormal bases.
inline double max_principal_angle(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A.transpose() * B);
  const double smallest = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  return std::acos(smallest);
}

/// |a - b| / max(1, |a|, |b|).
inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

/// Worst relative error between an analytic gradient and central differences
/// of f over every entry of x, step h.
template <typename F>
double finite_difference_error(F&& f, Eigen::MatrixXd& x, const Eigen::MatrixXd& analytic, double h = 1e-5) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double saved = x(r, c);
      x(r, c) = saved + h;
      const double fp = f();
      x(r, c) = saved - h;
      const double fm = f();
      x(r, c) = saved;
      worst = std::max(worst, rel_err(analytic(r, c), (fp - fm) / (2.0 * h)));
    }
  }
  return worst;
}

/// Multinomial logistic regression on the given feature columns with an L2
/// penalty on the non-bias weights, trained by full-batch gradient descent;
/// returns test accuracy.
inline double logistic_oracle(const Eigen::MatrixXd& F, const std::vector<int>& y, int M,
                              const std::vector<NodeId>& train, const std::vector<NodeId>& test,
                              double l2 = 0.5) {
  const Eigen::Index d = F.cols();
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d + 1, M);
  auto features = [&](NodeId i) {
    Eigen::RowVectorXd row(d + 1);
    row << F.row(i), 1.0;
    return row;
  };
  for (int it = 0; it < 2000; ++it) {
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(d + 1, M);
    for (NodeId i : train) {
      const Eigen::RowVectorXd x = features(i);
      Eigen::RowVectorXd z = x * W;
      z.array() -= z.maxCoeff();
      Eigen::RowVectorXd p = z.array().exp();
      p /= p.sum();
      p(y[i]) -= 1.0;
      grad += x.transpose() * p;
    }
    grad /= static_cast<double>(train.size());
    grad.topRows(d) += l2 * W.topRows(d);
    W -= 0.5 * grad;
  }
  int correct = 0;
  for (NodeId i : test) {
    Eigen::Index arg = 0;
    (features(i) * W).maxCoeff(&arg);
    if (arg == y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("jane-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
