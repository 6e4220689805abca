#include "jane/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "jane/error.hpp"

namespace jane {

namespace {

void sort_ascending(Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  Eigen::VectorXd v(values.size());
  Eigen::MatrixXd m(vectors.rows(), vectors.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = values[order[i]];
    m.col(static_cast<Eigen::Index>(i)) = vectors.col(order[i]);
  }
  values = std::move(v);
  vectors = std::move(m);
}

void check_rank(const Laplacian& L, int k) {
  const NodeId n = L.size();
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be at least 1");
  if (k > n - 1) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " exceeds n-1=" + std::to_string(n - 1));
  }
  if (!L.connected()) throw Error(ErrorCode::NotConnected, "zero eigenspace has dimension > 1");
}

/// Removes the all-ones direction from every column, then normalizes.
void center_and_normalize(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    auto col = vectors.col(c);
    col.array() -= col.mean();
    col.normalize();
  }
}

SpectralBasis dense_smallest(const Laplacian& L, int k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L.dense());
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::PreconditionViolated, "dense eigensolver failed");
  SpectralBasis out;
  out.eigenvalues = solver.eigenvalues().segment(1, k);
  out.eigenvectors = solver.eigenvectors().middleCols(1, k);
  return out;
}

/// Result of one Lanczos run restricted to the orthogonal complement of a
/// locked basis.
struct RitzPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

class LanczosSolver {
 public:
  LanczosSolver(const Laplacian& L, double abs_tol, std::uint64_t seed)
      : L_(L), n_(L.size()), abs_tol_(abs_tol), rng_(seed) {}

  /// Smallest `wanted` eigenpairs of L on the complement of span(locked).
  /// Returns fewer pairs only when the Krylov space is exhausted first.
  RitzPairs run(const Eigen::MatrixXd& locked, int wanted) {
    const Eigen::Index max_dim = n_ - locked.cols();
    Eigen::MatrixXd Q(n_, std::min<Eigen::Index>(max_dim, 64));
    std::vector<double> alpha;
    std::vector<double> beta;

    Eigen::VectorXd q = random_start(locked);
    Eigen::Index m = 0;
    while (true) {
      if (m == Q.cols()) Q.conservativeResize(Eigen::NoChange, std::min<Eigen::Index>(max_dim, 2 * Q.cols()));
      Q.col(m) = q;
      Eigen::VectorXd w = L_.apply(q);
      if (m > 0) w -= beta.back() * Q.col(m - 1);
      alpha.push_back(q.dot(w));
      w -= alpha.back() * q;
      // Two rounds of classical Gram-Schmidt against everything seen so far.
      for (int pass = 0; pass < 2; ++pass) {
        w -= Q.leftCols(m + 1) * (Q.leftCols(m + 1).transpose() * w);
        w -= locked * (locked.transpose() * w);
      }
      const double b = w.norm();
      ++m;

      const bool exhausted = m == max_dim || b <= 1e-13 * std::max(1.0, std::abs(alpha.back()));
      const Eigen::Index check_every = std::max<Eigen::Index>(4, m / 8);
      if (exhausted || (m >= wanted && m % check_every == 0)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
        Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), m - 1))
                                    : Eigen::VectorXd();
        tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        const int take = static_cast<int>(std::min<Eigen::Index>(wanted, m));
        bool converged = true;
        for (int i = 0; i < take && !exhausted; ++i) {
          const double residual = std::abs(b * tri.eigenvectors()(m - 1, i));
          if (residual > abs_tol_) converged = false;
        }
        if (exhausted || converged) {
          RitzPairs out;
          out.values = tri.eigenvalues().head(take);
          out.vectors = Q.leftCols(m) * tri.eigenvectors().leftCols(take);
          return out;
        }
      }
      beta.push_back(b);
      q = w / b;
    }
  }

 private:
  Eigen::VectorXd random_start(const Eigen::MatrixXd& locked) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd q(n_);
    for (Eigen::Index i = 0; i < n_; ++i) q[i] = normal(rng_);
    for (int pass = 0; pass < 2; ++pass) q -= locked * (locked.transpose() * q);
    return q.normalized();
  }

  const Laplacian& L_;
  Eigen::Index n_;
  double abs_tol_;
  std::mt19937_64 rng_;
};

SpectralBasis lanczos_smallest(const Laplacian& L, int k, const SpectralOptions& options) {
  const NodeId n = L.size();
  const double norm_bound = std::max(1.0, 2.0 * L.degrees().maxCoeff());
  LanczosSolver solver(L, options.tolerance * norm_bound, options.seed);

  Eigen::MatrixXd found(n, 0);
  std::vector<double> values;
  auto locked_basis = [&] {
    Eigen::MatrixXd b(n, found.cols() + 1);
    b.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
    b.rightCols(found.cols()) = found;
    return b;
  };
  auto append = [&](const RitzPairs& pairs) {
    const Eigen::Index old = found.cols();
    found.conservativeResize(Eigen::NoChange, old + pairs.vectors.cols());
    found.rightCols(pairs.vectors.cols()) = pairs.vectors;
    values.insert(values.end(), pairs.values.data(), pairs.values.data() + pairs.values.size());
  };

  while (static_cast<int>(values.size()) < k) {
    append(solver.run(locked_basis(), k - static_cast<int>(values.size())));
  }

  // A single start vector misses repeated eigenvalues. Probe the complement
  // with fresh vectors until nothing below the current k-th value remains.
  for (int round = 0; round < 4 * k + 8 && found.cols() < n - 1; ++round) {
    const RitzPairs probe = solver.run(locked_basis(), 1);
    const auto worst = std::max_element(values.begin(), values.end());
    if (probe.values[0] >= *worst - 1e3 * options.tolerance * norm_bound) break;
    const Eigen::Index drop = worst - values.begin();
    found.col(drop) = probe.vectors.col(0);
    *worst = probe.values[0];
  }

  // Rayleigh-Ritz cleanup on the locked subspace.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(found);
  Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, found.cols());
  Eigen::MatrixXd lb(n, basis.cols());
  for (Eigen::Index c = 0; c < basis.cols(); ++c) lb.col(c) = L.apply(basis.col(c));
  Eigen::MatrixXd projected = basis.transpose() * lb;
  projected = 0.5 * (projected + projected.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(projected);
  SpectralBasis out;
  out.eigenvalues = small.eigenvalues();
  out.eigenvectors = basis * small.eigenvectors();
  return out;
}

}  // namespace

void fix_signs(Eigen::MatrixXd& vectors, double eps) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double x = vectors(r, c);
      if (std::abs(x) > eps) {
        if (x < 0) vectors.col(c) *= -1.0;
        break;
      }
    }
  }
}

SpectralBasis smallest_nontrivial_eigs(const Laplacian& L, int k, const SpectralOptions& options) {
  check_rank(L, k);
  const bool dense = options.method == EigenMethod::Dense ||
                     (options.method == EigenMethod::Auto && L.size() <= options.dense_threshold);
  SpectralBasis out = dense ? dense_smallest(L, k) : lanczos_smallest(L, k, options);
  center_and_normalize(out.eigenvectors);
  sort_ascending(out.eigenvalues, out.eigenvectors);
  fix_signs(out.eigenvectors, 1e-8);
  return out;
}

double embedding_energy(const Eigen::MatrixXd& U, const Laplacian& L) {
  if (U.rows() != L.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "U has " + std::to_string(U.rows()) + " rows, graph has " + std::to_string(L.size()) + " nodes");
  }
  for (Eigen::Index c = 0; c < U.cols(); ++c) {
    const auto col = U.col(c);
    if (std::abs(col.sum()) > 1e-8 || std::abs(col.norm() - 1.0) > 1e-8) {
      throw Error(ErrorCode::PreconditionViolated, "columns of U must be centered and unit norm");
    }
  }
  double total = 0.0;
  for (Eigen::Index c = 0; c < U.cols(); ++c) total += U.col(c).dot(L.apply(U.col(c)));
  return total;
}

namespace {

/// Householder reduction A = Q T Q^T of a symmetric matrix. On return `diag`
/// and `sub` hold T (sub[i] couples i and i+1) and `q` holds Q.
void householder_tridiagonalize(Eigen::MatrixXd a, Eigen::VectorXd& diag, Eigen::VectorXd& sub,
                                Eigen::MatrixXd& q) {
  const Eigen::Index n = a.rows();
  q = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    const Eigen::Index m = n - k - 1;
    Eigen::VectorXd v = a.col(k).tail(m);
    double alpha = v.norm();
    if (alpha == 0.0) continue;
    if (v[0] > 0) alpha = -alpha;
    v[0] -= alpha;
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    v /= vnorm;

    // Reflect the trailing block from both sides: B <- H B H with H = I - 2vv^T.
    auto block = a.bottomRightCorner(m, m);
    const Eigen::VectorXd p = 2.0 * (block * v);
    const Eigen::VectorXd w = p - v.dot(p) * v;
    block.noalias() -= v * w.transpose() + w * v.transpose();

    a.col(k).tail(m).setZero();
    a.row(k).tail(m).setZero();
    a(k + 1, k) = alpha;
    a(k, k + 1) = alpha;

    auto right = q.rightCols(m);
    const Eigen::VectorXd qv = right * v;
    right.noalias() -= 2.0 * qv * v.transpose();
  }
  diag = a.diagonal();
  sub = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) sub[i] = a(i + 1, i);
}

/// Implicitly shifted QL on a symmetric tridiagonal matrix, rotating the
/// columns of `z` along. `sub[n-1]` is scratch.
void tridiagonal_ql(Eigen::VectorXd& d, Eigen::VectorXd& e, Eigen::MatrixXd& z) {
  const Eigen::Index n = d.size();
  const double eps = std::numeric_limits<double>::epsilon();
  for (Eigen::Index l = 0; l < n; ++l) {
    int iterations = 0;
    Eigen::Index m = l;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (++iterations > 100) throw Error(ErrorCode::PreconditionViolated, "QL iteration did not converge");

      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      Eigen::Index i = m - 1;
      bool underflow = false;
      for (; i >= l; --i) {
        const double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        for (Eigen::Index k = 0; k < z.rows(); ++k) {
          const double t = z(k, i + 1);
          z(k, i + 1) = s * z(k, i) + c * t;
          z(k, i) = c * z(k, i) - s * t;
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }
}

}  // namespace

SpectralBasis dense_eig_oracle(const Laplacian& L) {
  const Eigen::MatrixXd a = L.dense();
  SpectralBasis out;
  Eigen::VectorXd sub;
  householder_tridiagonalize(a, out.eigenvalues, sub, out.eigenvectors);
  tridiagonal_ql(out.eigenvalues, sub, out.eigenvectors);
  sort_ascending(out.eigenvalues, out.eigenvectors);
  fix_signs(out.eigenvectors, 1e-8);
  return out;
}

}  // namespace jane
