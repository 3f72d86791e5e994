#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "genokit/genotypes.hpp"
#include "genokit/numeric.hpp"

namespace genokit::iht {

/// Linear operator view of a design matrix X (rows are subjects).
class Design {
 public:
  virtual ~Design() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  /// X b
  virtual Eigen::VectorXd apply(const Eigen::VectorXd& b) const = 0;
  /// X' r
  virtual Eigen::VectorXd apply_transpose(const Eigen::VectorXd& r) const = 0;
};

class DenseDesign final : public Design {
 public:
  /// Data error if any entry is not finite.
  explicit DenseDesign(Eigen::MatrixXd x);
  Eigen::Index rows() const override { return x_.rows(); }
  Eigen::Index cols() const override { return x_.cols(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& b) const override { return x_ * b; }
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& r) const override {
    return x_.transpose() * r;
  }
  const Eigen::MatrixXd& matrix() const noexcept { return x_; }

 private:
  Eigen::MatrixXd x_;
};

/// Transformed genotypes, products computed on the packed bytes.
class PackedDesign final : public Design {
 public:
  PackedDesign(const snp::PackedGenotypeMatrix& matrix, snp::NumericOptions options = {});
  Eigen::Index rows() const override;
  Eigen::Index cols() const override;
  Eigen::VectorXd apply(const Eigen::VectorXd& b) const override;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& r) const override;

 private:
  const snp::PackedGenotypeMatrix* matrix_;
  snp::ColumnTransform transform_;
};

/// Rows `index` of another design.
class RowSubset final : public Design {
 public:
  RowSubset(const Design& base, std::vector<Eigen::Index> index);
  Eigen::Index rows() const override { return static_cast<Eigen::Index>(index_.size()); }
  Eigen::Index cols() const override { return base_->cols(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& b) const override;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& r) const override;

 private:
  const Design* base_;
  std::vector<Eigen::Index> index_;
};

/// Keeps the k entries of largest |b_i| (or w_i |b_i|), lower index first on
/// ties, and zeroes the rest.
Eigen::VectorXd project_sparse(const Eigen::VectorXd& b, std::size_t k,
                               const std::optional<Eigen::VectorXd>& weights = std::nullopt);

/// Gradient of f(b) = 0.5 ||y - X b||^2, i.e. -X'(y - X b).
Eigen::VectorXd least_squares_gradient(const Design& x, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& b);

struct IhtConfig {
  std::size_t k = 10;
  int max_iter = 200;
  double tol = 1e-6;  // relative loss change; also the sup-norm step threshold
  std::optional<Eigen::VectorXd> weights;
  /// Use the full gradient in the step length instead of the gradient
  /// restricted to the current support plus the k largest gradient entries.
  bool unrestricted_step = false;
  int max_halvings = 50;
  std::size_t folds = 5;
  std::uint64_t seed = 1;
};

struct SparseFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;  // unpenalized covariate coefficients
  std::vector<Eigen::Index> support;
  std::size_t k = 0;
  std::vector<double> loss;  // f at initialization, then after each accepted step
  int iterations = 0;
  bool converged = false;
};

/// Iterative hard thresholding for min 0.5 ||y - X b - Z g||^2 subject to
/// ||b||_0 <= k, starting at b = 0. Covariates Z (may have zero columns) are
/// refitted by least squares after every step and never thresholded.
SparseFit iht_fit(const Design& x, const Eigen::VectorXd& y, const IhtConfig& config,
                  const Eigen::MatrixXd& covariates = {});

struct CrossValidation {
  std::size_t k = 0;
  std::vector<std::size_t> grid;  // ascending
  std::vector<double> mse;        // mean validation MSE per grid entry
};

/// Seeded fold partition; the chosen k minimizes mean validation MSE, ties to
/// the smaller k.
CrossValidation cross_validate_k(const Design& x, const Eigen::VectorXd& y,
                                 std::vector<std::size_t> k_grid, const IhtConfig& config,
                                 const Eigen::MatrixXd& covariates = {});

}  // namespace genokit::iht
