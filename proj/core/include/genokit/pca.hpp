#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "genokit/genotypes.hpp"

namespace genokit::snp {

struct PcaOptions {
  int oversample = 10;
  int max_iter = 1000;
  double tol = 1e-8;  // relative change of the leading eigenvalue estimates
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

/// Top eigenpairs of Z Z^T, Z the standardized (mean-imputed) genotype
/// matrix. scores = u_k sqrt(lambda_k), which equals the projection Z v_k
/// onto the k-th SNP loading, so scores^T scores = diag(eigenvalues).
/// Each column's largest-magnitude entry is positive.
struct PcaResult {
  Eigen::MatrixXd scores;       // subjects x n_components
  Eigen::VectorXd eigenvalues;  // non-increasing
  int iterations = 0;
  bool converged = false;
};

/// Block subspace iteration with Rayleigh-Ritz extraction over the packed
/// matrix; never materializes Z.
PcaResult principal_components(const PackedGenotypeMatrix& matrix, int n_components,
                               const PcaOptions& options = {});

}  // namespace genokit::snp
