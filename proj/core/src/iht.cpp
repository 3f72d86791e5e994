#include "genokit/iht.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "genokit/error.hpp"
#include "genokit/parallel.hpp"

namespace genokit::iht {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

DenseDesign::DenseDesign(MatrixXd x) : x_(std::move(x)) {
  if (!x_.allFinite()) fail(ErrorKind::Data, "design matrix has non-finite entries");
}

PackedDesign::PackedDesign(const snp::PackedGenotypeMatrix& matrix, snp::NumericOptions options)
    : matrix_(&matrix), transform_(snp::ColumnTransform::build(matrix, options)) {}

Index PackedDesign::rows() const { return static_cast<Index>(matrix_->n_subjects()); }
Index PackedDesign::cols() const { return static_cast<Index>(matrix_->n_snps()); }

VectorXd PackedDesign::apply(const VectorXd& b) const {
  return snp::packed_gemv(*matrix_, transform_, b, false);
}

VectorXd PackedDesign::apply_transpose(const VectorXd& r) const {
  return snp::packed_gemv(*matrix_, transform_, r, true);
}

RowSubset::RowSubset(const Design& base, std::vector<Index> index)
    : base_(&base), index_(std::move(index)) {
  for (Index i : index_)
    if (i < 0 || i >= base.rows()) fail(ErrorKind::Argument, "row index out of range");
}

VectorXd RowSubset::apply(const VectorXd& b) const {
  const VectorXd full = base_->apply(b);
  VectorXd out(rows());
  for (std::size_t i = 0; i < index_.size(); ++i) out[static_cast<Index>(i)] = full[index_[i]];
  return out;
}

VectorXd RowSubset::apply_transpose(const VectorXd& r) const {
  VectorXd full = VectorXd::Zero(base_->rows());
  for (std::size_t i = 0; i < index_.size(); ++i) full[index_[i]] += r[static_cast<Index>(i)];
  return base_->apply_transpose(full);
}

namespace {

std::vector<Index> top_k(const VectorXd& key, std::size_t k) {
  std::vector<Index> idx(static_cast<std::size_t>(key.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  if (k >= idx.size()) return idx;
  auto before = [&](Index a, Index b) { return key[a] > key[b] || (key[a] == key[b] && a < b); };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), before);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

VectorXd ranking_key(const VectorXd& v, const std::optional<VectorXd>& weights) {
  VectorXd key = v.cwiseAbs();
  if (weights) key.array() *= weights->array();
  return key;
}

struct CovariateFit {
  const MatrixXd& z;
  Eigen::ColPivHouseholderQR<MatrixXd> qr;

  explicit CovariateFit(const MatrixXd& z_) : z(z_) {
    if (z.cols() > 0) qr.compute(z);
  }
  VectorXd solve(const VectorXd& r) const {
    if (z.cols() == 0) return VectorXd();
    return qr.solve(r);
  }
  VectorXd apply(const VectorXd& g) const {
    if (z.cols() == 0) return VectorXd::Zero(z.rows());
    return z * g;
  }
};

}  // namespace

VectorXd project_sparse(const VectorXd& b, std::size_t k, const std::optional<VectorXd>& weights) {
  if (weights && weights->size() != b.size())
    fail(ErrorKind::Argument, "weight vector length != coefficient count");
  if (k >= static_cast<std::size_t>(b.size())) return b;
  VectorXd out = VectorXd::Zero(b.size());
  for (Index i : top_k(ranking_key(b, weights), k)) out[i] = b[i];
  return out;
}

VectorXd least_squares_gradient(const Design& x, const VectorXd& y, const VectorXd& b) {
  return -x.apply_transpose(y - x.apply(b));
}

SparseFit iht_fit(const Design& x, const VectorXd& y, const IhtConfig& config,
                  const MatrixXd& covariates) {
  const Index n = x.rows(), p = x.cols();
  if (y.size() != n) fail(ErrorKind::Argument, "response length != design rows");
  if (covariates.size() > 0 && covariates.rows() != n)
    fail(ErrorKind::Argument, "covariate rows != design rows");
  if (config.k < 1) fail(ErrorKind::Argument, "sparsity level k must be at least 1");
  if (!y.allFinite()) fail(ErrorKind::Data, "response has non-finite values");
  if (!covariates.allFinite()) fail(ErrorKind::Data, "covariates have non-finite values");
  if (config.weights) {
    if (config.weights->size() != p)
      fail(ErrorKind::Argument, "weight vector length != predictor count");
    if ((config.weights->array() <= 0).any() || !config.weights->allFinite())
      fail(ErrorKind::Argument, "predictor weights must be positive");
  }
  const MatrixXd z = covariates.size() > 0 ? covariates : MatrixXd(n, 0);
  CovariateFit cov(z);

  SparseFit fit;
  fit.k = config.k;
  fit.beta = VectorXd::Zero(p);
  fit.gamma = cov.solve(y);
  VectorXd r = y - cov.apply(fit.gamma);
  double loss = 0.5 * r.squaredNorm();
  fit.loss.push_back(loss);

  for (int it = 1; it <= config.max_iter; ++it) {
    const VectorXd grad = -x.apply_transpose(r);
    if (grad.squaredNorm() == 0.0) {
      fit.converged = true;
      break;
    }
    VectorXd dir = grad;
    if (!config.unrestricted_step) {
      std::vector<bool> keep(static_cast<std::size_t>(p), false);
      for (Index i = 0; i < p; ++i) keep[static_cast<std::size_t>(i)] = fit.beta[i] != 0.0;
      for (Index i : top_k(ranking_key(grad, config.weights), config.k))
        keep[static_cast<std::size_t>(i)] = true;
      for (Index i = 0; i < p; ++i)
        if (!keep[static_cast<std::size_t>(i)]) dir[i] = 0.0;
    }
    const double num = dir.squaredNorm();
    const double den = x.apply(dir).squaredNorm();
    if (num == 0.0 || den == 0.0) {
      fit.converged = true;
      break;
    }
    double step = num / den;

    bool accepted = false;
    VectorXd beta_next, gamma_next, r_next;
    double loss_next = loss;
    for (int h = 0; h <= config.max_halvings; ++h, step *= 0.5) {
      beta_next = project_sparse(fit.beta - step * grad, config.k, config.weights);
      const VectorXd fitted = x.apply(beta_next);
      gamma_next = cov.solve(y - fitted);
      r_next = y - fitted - cov.apply(gamma_next);
      loss_next = 0.5 * r_next.squaredNorm();
      if (loss_next <= loss) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      fit.converged = true;
      break;
    }
    const double change = (beta_next - fit.beta).cwiseAbs().maxCoeff();
    const double drop = loss - loss_next;
    fit.beta = std::move(beta_next);
    fit.gamma = std::move(gamma_next);
    r = std::move(r_next);
    fit.loss.push_back(loss_next);
    fit.iterations = it;
    const bool flat = drop <= config.tol * loss;
    loss = loss_next;
    if (flat || change < config.tol) {
      fit.converged = true;
      break;
    }
  }
  for (Index i = 0; i < p; ++i)
    if (fit.beta[i] != 0.0) fit.support.push_back(i);
  return fit;
}

CrossValidation cross_validate_k(const Design& x, const VectorXd& y,
                                 std::vector<std::size_t> k_grid, const IhtConfig& config,
                                 const MatrixXd& covariates) {
  const Index n = x.rows();
  if (k_grid.empty()) fail(ErrorKind::Argument, "k grid is empty");
  if (config.folds < 2) fail(ErrorKind::Argument, "cross-validation needs at least 2 folds");
  if (static_cast<std::size_t>(n) < config.folds)
    fail(ErrorKind::Argument, std::to_string(config.folds) + " folds leave a fold with no rows (" +
                                  std::to_string(n) + " subjects)");
  std::sort(k_grid.begin(), k_grid.end());
  k_grid.erase(std::unique(k_grid.begin(), k_grid.end()), k_grid.end());

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(config.seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t folds = config.folds;
  std::vector<std::vector<Index>> train(folds), valid(folds);
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    for (std::size_t f = 0; f < folds; ++f)
      (pos % folds == f ? valid[f] : train[f]).push_back(order[pos]);
  for (auto& v : train) std::sort(v.begin(), v.end());
  for (auto& v : valid) std::sort(v.begin(), v.end());

  auto rows_of = [](const auto& m, const std::vector<Index>& idx) {
    if (m.size() == 0) return MatrixXd(static_cast<Index>(idx.size()), 0);
    MatrixXd out(static_cast<Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = m.row(idx[i]);
    return out;
  };

  std::vector<double> err(k_grid.size() * folds, 0.0);
  parallel_for(0, err.size(), 1, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t job = lo; job < hi; ++job) {
      const std::size_t g = job / folds, f = job % folds;
      IhtConfig cfg = config;
      cfg.k = k_grid[g];
      const RowSubset xt(x, train[f]), xv(x, valid[f]);
      const MatrixXd yt = rows_of(y, train[f]), yv = rows_of(y, valid[f]);
      const auto fit = iht_fit(xt, yt.col(0), cfg, rows_of(covariates, train[f]));
      VectorXd pred = xv.apply(fit.beta);
      const MatrixXd zv = rows_of(covariates, valid[f]);
      if (zv.cols() > 0) pred += zv * fit.gamma;
      err[job] = (yv.col(0) - pred).squaredNorm() / static_cast<double>(valid[f].size());
    }
  });

  CrossValidation cv;
  cv.grid = k_grid;
  cv.mse.assign(k_grid.size(), 0.0);
  for (std::size_t g = 0; g < k_grid.size(); ++g) {
    for (std::size_t f = 0; f < folds; ++f) cv.mse[g] += err[g * folds + f];
    cv.mse[g] /= static_cast<double>(folds);
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < k_grid.size(); ++g)
    if (cv.mse[g] < cv.mse[best]) best = g;
  cv.k = k_grid[best];
  return cv;
}

}  // namespace genokit::iht
