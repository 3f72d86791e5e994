#include "genokit/pca.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "genokit/error.hpp"
#include "genokit/numeric.hpp"

namespace genokit::snp {
namespace {

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

}  // namespace

PcaResult principal_components(const PackedGenotypeMatrix& matrix, int n_components,
                               const PcaOptions& options) {
  const auto n = static_cast<Eigen::Index>(matrix.n_subjects());
  const auto m = static_cast<Eigen::Index>(matrix.n_snps());
  if (n_components < 0 || n_components > std::min(n, m))
    fail(ErrorKind::Argument, "n_components " + std::to_string(n_components) +
                                  " outside [0, min(subjects, snps)]");
  PcaResult result;
  result.scores.resize(n, n_components);
  result.eigenvalues.resize(n_components);
  if (n_components == 0) {
    result.converged = true;
    return result;
  }

  const auto transform =
      ColumnTransform::build(matrix, {Scaling::Standardized, MissingPolicy::MeanImpute});
  const Eigen::Index c = n_components;
  const Eigen::Index b = std::min<Eigen::Index>(n, c + std::max(0, options.oversample));

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd q(n, b);
  for (Eigen::Index j = 0; j < b; ++j)
    for (Eigen::Index i = 0; i < n; ++i) q(i, j) = normal(rng);
  q = orthonormalize(q);

  Eigen::VectorXd previous;
  Eigen::MatrixXd ritz;
  Eigen::VectorXd lambda;
  for (int it = 1; it <= options.max_iter; ++it) {
    Eigen::MatrixXd y = packed_gram_apply(matrix, transform, q);
    Eigen::MatrixXd h = q.transpose() * y;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    // descending order
    lambda = eig.eigenvalues().reverse();
    Eigen::MatrixXd w = eig.eigenvectors().rowwise().reverse();
    ritz = q * w;
    result.iterations = it;

    if (b == n) {
      // q spans every subject direction, so the Ritz pairs are exact
      result.converged = true;
      break;
    }
    const double top = std::max(lambda[0], 1e-300);
    bool done = previous.size() == c;
    if (done) {
      for (Eigen::Index k = 0; k < c; ++k) {
        double scale = std::max(std::abs(lambda[k]), 1e-12 * top);
        if (std::abs(lambda[k] - previous[k]) > options.tol * scale) done = false;
      }
    }
    if (done) {
      Eigen::MatrixXd resid = y * w.leftCols(c) - ritz.leftCols(c) * lambda.head(c).asDiagonal();
      for (Eigen::Index k = 0; k < c && done; ++k)
        if (resid.col(k).norm() > options.tol * top) done = false;
    }
    if (done) {
      result.converged = true;
      break;
    }
    previous = lambda.head(c);
    q = orthonormalize(y);
  }

  for (Eigen::Index k = 0; k < c; ++k) {
    double l = std::max(lambda[k], 0.0);
    Eigen::VectorXd col = ritz.col(k) * std::sqrt(l);
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col[arg] < 0) col = -col;
    result.scores.col(k) = col;
    result.eigenvalues[k] = l;
  }
  return result;
}

}  // namespace genokit::snp
