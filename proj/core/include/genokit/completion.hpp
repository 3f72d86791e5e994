#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace genokit::mc {

/// Observed-entry set over a rows x cols matrix, one byte per entry.
class ObservationMask {
 public:
  ObservationMask() = default;
  ObservationMask(Eigen::Index rows, Eigen::Index cols, bool observed = false);

  /// Entries that are not NaN.
  static ObservationMask of(const Eigen::MatrixXd& x);

  Eigen::Index rows() const noexcept { return rows_; }
  Eigen::Index cols() const noexcept { return cols_; }
  bool observed(Eigen::Index i, Eigen::Index j) const { return bits_[index(i, j)] != 0; }
  void set(Eigen::Index i, Eigen::Index j, bool observed);
  std::size_t count() const noexcept { return count_; }

 private:
  std::size_t index(Eigen::Index i, Eigen::Index j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(rows_) +
           static_cast<std::size_t>(i);
  }

  Eigen::Index rows_ = 0, cols_ = 0;
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

/// Y = U V with U: rows x r (rows are subjects) and V: r x cols.
struct CompletionFactors {
  Eigen::MatrixXd U;
  Eigen::MatrixXd V;

  Eigen::Index rank() const noexcept { return U.cols(); }
  Eigen::MatrixXd product() const { return U * V; }
};

struct CompletionOptions {
  double tol = 1e-5;  // relative change in loss
  int max_iter = 100;
};

struct CompletionFit {
  CompletionFactors factors;
  std::vector<double> loss;  // loss after each iteration
  int iterations = 0;
  bool converged = false;
};

/// sum over observed (i, j) of (x_ij - y_ij)^2.
double completion_loss(const Eigen::MatrixXd& x, const ObservationMask& mask,
                       const Eigen::MatrixXd& y);

/// X with unobserved entries replaced by the per-column mean of observed
/// entries (overall mean for columns with none, 0 if nothing is observed).
Eigen::MatrixXd mean_fill(const Eigen::MatrixXd& x, const ObservationMask& mask);

/// Iterated truncated SVD of the filled matrix, starting from the mean fill.
CompletionFit svd_impute(const Eigen::MatrixXd& x, const ObservationMask& mask, Eigen::Index rank,
                         const CompletionOptions& options = {});

/// Alternating least squares against the filled matrix Z_m:
/// V <- (U'U)^-1 U'Z_m, then U <- Z_m V'(VV')^-1.
CompletionFit als_complete(const Eigen::MatrixXd& x, const ObservationMask& mask,
                           const CompletionFactors& init, const CompletionOptions& options = {});

/// Range finder with rank + oversample Gaussian probes and one power pass.
/// Singular values are split evenly: U = Q_r sqrt(S), V = sqrt(S) W_r'.
CompletionFactors randomized_svd(const Eigen::MatrixXd& a, Eigen::Index rank,
                                 Eigen::Index oversample, std::uint64_t seed);

enum class Solver { Als, SvdImpute };

struct RankSelection {
  Eigen::Index rank = 0;
  std::vector<Eigen::Index> grid;  // ascending
  std::vector<double> errors;      // held-out squared error per grid entry
  std::size_t held_out = 0;
};

/// Masks `mask_fraction` of the observed entries in the outer column thirds,
/// fits every grid rank and picks the one with least held-out squared error.
/// Errors within 1e-6 of the held-out sum of squares of the best count as ties
/// and go to the smaller rank.
RankSelection select_rank(const Eigen::MatrixXd& x, const ObservationMask& mask,
                          std::vector<Eigen::Index> grid, double mask_fraction, std::uint64_t seed,
                          const CompletionOptions& options = {}, Solver solver = Solver::Als);

/// One completion at `rank` with the chosen solver (ALS starts from a
/// randomized SVD of the mean fill).
CompletionFit complete(const Eigen::MatrixXd& x, const ObservationMask& mask, Eigen::Index rank,
                       std::uint64_t seed, const CompletionOptions& options, Solver solver);

}  // namespace genokit::mc
