#include "genokit/completion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "genokit/error.hpp"

namespace genokit::mc {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;

void check_shape(const MatrixXd& x, const ObservationMask& mask) {
  if (x.rows() != mask.rows() || x.cols() != mask.cols())
    fail(ErrorKind::Argument, "observation mask is " + std::to_string(mask.rows()) + "x" +
                                  std::to_string(mask.cols()) + ", data is " +
                                  std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
}

void check_rank(Index rank, const MatrixXd& x) {
  if (rank < 1 || rank > std::min(x.rows(), x.cols()))
    fail(ErrorKind::Argument, "rank " + std::to_string(rank) + " outside [1, " +
                                  std::to_string(std::min(x.rows(), x.cols())) + "]");
}

/// Observed entries from x, the rest from y.
MatrixXd fill(const MatrixXd& x, const ObservationMask& mask, const MatrixXd& y) {
  MatrixXd z = y;
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i)
      if (mask.observed(i, j)) z(i, j) = x(i, j);
  return z;
}

double observed_norm2(const MatrixXd& x, const ObservationMask& mask) {
  double s = 0.0;
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i)
      if (mask.observed(i, j)) s += x(i, j) * x(i, j);
  return s;
}

MatrixXd orthonormal_basis(const MatrixXd& y) {
  Eigen::HouseholderQR<MatrixXd> qr(y);
  return qr.householderQ() * MatrixXd::Identity(y.rows(), y.cols());
}

/// solve(G, B) for the r x r Gram matrix G, ridged only if G is singular.
MatrixXd normal_solve(const MatrixXd& gram, const MatrixXd& rhs) {
  auto usable = [](const Eigen::LLT<MatrixXd>& llt, double top) {
    if (llt.info() != Eigen::Success) return false;
    const double low = llt.matrixLLT().diagonal().cwiseAbs().minCoeff();
    return low * low > 1e-14 * top;
  };
  const double top = std::max(gram.diagonal().maxCoeff(), 1e-300);
  Eigen::LLT<MatrixXd> llt(gram);
  if (usable(llt, top)) return llt.solve(rhs);
  MatrixXd ridged = gram;
  ridged.diagonal().array() += 1e-8;
  llt.compute(ridged);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::Numeric, "least-squares normal equations singular after ridge");
  return llt.solve(rhs);
}

/// Records `loss`, enforcing the descent property up to rounding.
void record(CompletionFit& fit, double previous, double loss, double scale) {
  if (loss > previous + 1e-10 * scale + 1e-12 * previous)
    fail(ErrorKind::Numeric, "completion loss increased from " + std::to_string(previous) +
                                 " to " + std::to_string(loss));
  fit.loss.push_back(loss);
}

bool settled(double previous, double loss, double tol, double scale) {
  if (loss <= 1e-28 * scale) return true;
  return std::abs(previous - loss) <= tol * previous;
}

}  // namespace

ObservationMask::ObservationMask(Index rows, Index cols, bool observed)
    : rows_(rows), cols_(cols),
      bits_(static_cast<std::size_t>(rows * cols), observed ? 1 : 0),
      count_(observed ? static_cast<std::size_t>(rows * cols) : 0) {}

ObservationMask ObservationMask::of(const MatrixXd& x) {
  ObservationMask mask(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i)
      if (!std::isnan(x(i, j))) mask.set(i, j, true);
  return mask;
}

void ObservationMask::set(Index i, Index j, bool observed) {
  if (i < 0 || j < 0 || i >= rows_ || j >= cols_)
    fail(ErrorKind::Argument, "mask index out of range");
  auto& b = bits_[index(i, j)];
  if (b != 0) --count_;
  b = observed ? 1 : 0;
  if (b != 0) ++count_;
}

double completion_loss(const MatrixXd& x, const ObservationMask& mask, const MatrixXd& y) {
  check_shape(x, mask);
  if (y.rows() != x.rows() || y.cols() != x.cols())
    fail(ErrorKind::Argument, "completion is not conformable with the data");
  double s = 0.0;
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i)
      if (mask.observed(i, j)) {
        const double d = x(i, j) - y(i, j);
        s += d * d;
      }
  return s;
}

MatrixXd mean_fill(const MatrixXd& x, const ObservationMask& mask) {
  check_shape(x, mask);
  Eigen::VectorXd mean(x.cols());
  std::vector<bool> seen(static_cast<std::size_t>(x.cols()), false);
  double total = 0.0;
  std::size_t count = 0;
  for (Index j = 0; j < x.cols(); ++j) {
    double s = 0.0;
    std::size_t c = 0;
    for (Index i = 0; i < x.rows(); ++i)
      if (mask.observed(i, j)) {
        s += x(i, j);
        ++c;
      }
    total += s;
    count += c;
    mean[j] = c ? s / static_cast<double>(c) : 0.0;
    seen[static_cast<std::size_t>(j)] = c > 0;
  }
  const double overall = count ? total / static_cast<double>(count) : 0.0;
  MatrixXd z(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double f = seen[static_cast<std::size_t>(j)] ? mean[j] : overall;
    for (Index i = 0; i < x.rows(); ++i) z(i, j) = mask.observed(i, j) ? x(i, j) : f;
  }
  return z;
}

CompletionFit svd_impute(const MatrixXd& x, const ObservationMask& mask, Index rank,
                         const CompletionOptions& options) {
  check_shape(x, mask);
  check_rank(rank, x);
  if (mask.count() == 0) fail(ErrorKind::Argument, "svd_impute needs at least one observed entry");
  const bool full = mask.count() == static_cast<std::size_t>(x.size());
  const double scale = observed_norm2(x, mask);

  CompletionFit fit;
  MatrixXd z = mean_fill(x, mask);
  double previous = 0.0;
  for (int it = 1; it <= options.max_iter; ++it) {
    Eigen::BDCSVD<MatrixXd> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd root = svd.singularValues().head(rank).cwiseSqrt();
    fit.factors.U = svd.matrixU().leftCols(rank) * root.asDiagonal();
    fit.factors.V = root.asDiagonal() * svd.matrixV().leftCols(rank).transpose();
    const MatrixXd y = fit.factors.product();
    const double loss = completion_loss(x, mask, y);
    fit.iterations = it;
    if (it == 1) {
      fit.loss.push_back(loss);
    } else {
      record(fit, previous, loss, scale);
    }
    if (full || (it > 1 && settled(previous, loss, options.tol, scale)) || loss <= 1e-28 * scale) {
      fit.converged = true;
      break;
    }
    previous = loss;
    z = fill(x, mask, y);
  }
  return fit;
}

CompletionFit als_complete(const MatrixXd& x, const ObservationMask& mask,
                           const CompletionFactors& init, const CompletionOptions& options) {
  check_shape(x, mask);
  const Index r = init.rank();
  check_rank(r, x);
  if (init.U.rows() != x.rows() || init.V.rows() != r || init.V.cols() != x.cols())
    fail(ErrorKind::Argument, "initial factors are not conformable with the data");
  const double scale = observed_norm2(x, mask);

  CompletionFit fit;
  fit.factors = init;
  MatrixXd y = init.product();
  double previous = completion_loss(x, mask, y);
  if (previous <= 1e-28 * scale) {
    fit.converged = true;
    fit.loss.push_back(previous);
    return fit;
  }
  for (int it = 1; it <= options.max_iter; ++it) {
    const MatrixXd z = fill(x, mask, y);
    auto& U = fit.factors.U;
    auto& V = fit.factors.V;
    V = normal_solve(U.transpose() * U, U.transpose() * z);
    U = normal_solve(V * V.transpose(), V * z.transpose()).transpose();
    y = fit.factors.product();
    const double loss = completion_loss(x, mask, y);
    record(fit, previous, loss, scale);
    fit.iterations = it;
    if (settled(previous, loss, options.tol, scale)) {
      fit.converged = true;
      break;
    }
    previous = loss;
  }
  return fit;
}

CompletionFactors randomized_svd(const MatrixXd& a, Index rank, Index oversample,
                                 std::uint64_t seed) {
  check_rank(rank, a);
  if (oversample < 0 || rank + oversample > std::min(a.rows(), a.cols()))
    fail(ErrorKind::Argument, "rank + oversample exceeds min(rows, cols)");
  const Index probes = rank + oversample;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  MatrixXd omega(a.cols(), probes);
  for (Index j = 0; j < probes; ++j)
    for (Index i = 0; i < a.cols(); ++i) omega(i, j) = normal(rng);

  MatrixXd q = orthonormal_basis(a * omega);
  q = orthonormal_basis(a * (a.transpose() * q));
  const MatrixXd b = q.transpose() * a;
  Eigen::JacobiSVD<MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd root = svd.singularValues().head(rank).cwiseSqrt();
  CompletionFactors f;
  f.U = q * svd.matrixU().leftCols(rank) * root.asDiagonal();
  f.V = root.asDiagonal() * svd.matrixV().leftCols(rank).transpose();
  return f;
}

CompletionFit complete(const MatrixXd& x, const ObservationMask& mask, Index rank,
                       std::uint64_t seed, const CompletionOptions& options, Solver solver) {
  if (solver == Solver::SvdImpute) return svd_impute(x, mask, rank, options);
  check_shape(x, mask);
  check_rank(rank, x);
  if (mask.count() == 0) fail(ErrorKind::Argument, "completion needs at least one observed entry");
  const Index room = std::min(x.rows(), x.cols()) - rank;
  const auto init = randomized_svd(mean_fill(x, mask), rank, std::min<Index>(10, room), seed);
  return als_complete(x, mask, init, options);
}

RankSelection select_rank(const MatrixXd& x, const ObservationMask& mask,
                          std::vector<Index> grid, double mask_fraction, std::uint64_t seed,
                          const CompletionOptions& options, Solver solver) {
  check_shape(x, mask);
  if (grid.empty()) fail(ErrorKind::Argument, "rank grid is empty");
  if (!(mask_fraction > 0.0 && mask_fraction < 1.0))
    fail(ErrorKind::Argument, "mask fraction must lie in (0, 1)");
  if (x.cols() < 3)
    fail(ErrorKind::Window, "window of " + std::to_string(x.cols()) +
                                " SNPs cannot be split into thirds");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (Index r : grid) check_rank(r, x);

  RankSelection sel;
  sel.grid = grid;
  sel.rank = grid.front();

  const Index third = x.cols() / 3;
  std::vector<std::pair<Index, Index>> outer;
  for (Index j = 0; j < x.cols(); ++j) {
    if (j >= third && j < x.cols() - third) continue;
    for (Index i = 0; i < x.rows(); ++i)
      if (mask.observed(i, j)) outer.emplace_back(i, j);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(outer.begin(), outer.end(), rng);
  const auto want = static_cast<std::size_t>(
      std::llround(mask_fraction * static_cast<double>(outer.size())));
  const std::size_t held = std::min(std::max<std::size_t>(want, outer.empty() ? 0 : 1),
                                    mask.count() > 0 ? mask.count() - 1 : 0);
  sel.held_out = held;
  sel.errors.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  if (held == 0) return sel;

  ObservationMask train = mask;
  double held_norm = 0.0;
  for (std::size_t h = 0; h < held; ++h) {
    const auto [i, j] = outer[h];
    train.set(i, j, false);
    held_norm += x(i, j) * x(i, j);
  }
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto fit = complete(x, train, grid[g], seed, options, solver);
    const MatrixXd y = fit.factors.product();
    double err = 0.0;
    for (std::size_t h = 0; h < held; ++h) {
      const auto [i, j] = outer[h];
      const double d = x(i, j) - y(i, j);
      err += d * d;
    }
    sel.errors[g] = err;
  }
  const double best = *std::min_element(sel.errors.begin(), sel.errors.end());
  for (std::size_t g = 0; g < grid.size(); ++g)
    if (sel.errors[g] <= best + 1e-6 * held_norm) {
      sel.rank = grid[g];
      break;
    }
  return sel;
}

}  // namespace genokit::mc
