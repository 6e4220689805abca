#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "jane/graph.hpp"

namespace jane {

/// Eigenpairs of a Laplacian sorted by ascending eigenvalue; column l of
/// `eigenvectors` pairs with `eigenvalues[l]`.
struct SpectralBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

enum class EigenMethod { Auto, Dense, Lanczos };

struct SpectralOptions {
  EigenMethod method = EigenMethod::Auto;
  /// Auto uses the dense solver up to this many nodes, Lanczos above.
  NodeId dense_threshold = 512;
  /// Relative residual target for Lanczos Ritz pairs.
  double tolerance = 1e-11;
  /// Seeds the Lanczos start vectors.
  std::uint64_t seed = 0x5eed;
};

/// The k smallest eigenpairs of L after discarding the constant eigenvector
/// (eigenvalue 0). Columns are unit norm, orthogonal to the all-ones vector,
/// and sign-fixed so that their first non-negligible entry is positive.
///
/// Throws KTooLarge when k > n - 1 and NotConnected when the graph has more
/// than one component (the zero eigenspace would be degenerate).
SpectralBasis smallest_nontrivial_eigs(const Laplacian& L, int k, const SpectralOptions& options = {});

/// tr(U^T L U), which equals the sum over edges of |u_i - u_j|^2.
/// Requires centered, unit-norm columns (PreconditionViolated otherwise).
double embedding_energy(const Eigen::MatrixXd& U, const Laplacian& L);

/// Full spectrum by Householder tridiagonalization followed by implicit QL.
/// Meant as a reference for small inputs; throws TooLarge above 2000 nodes.
SpectralBasis dense_eig_oracle(const Laplacian& L);

/// Flips each column so its first entry with magnitude above `eps` is positive.
void fix_signs(Eigen::MatrixXd& vectors, double eps = 1e-8);

}  // namespace jane
