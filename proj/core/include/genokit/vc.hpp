#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace genokit::vc {

struct Component {
  std::string label;
  Eigen::MatrixXd V;  // symmetric PSD, n x n
  bool penalized = true;

  /// V = U U'.
  static Component from_factor(std::string label, const Eigen::MatrixXd& u, bool penalized = true);
  static Component identity(std::string label, Eigen::Index n, bool penalized = false);
};

/// y ~ N(X beta, sum_j sigma2_j V_j).
struct VcModel {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<Component> components;

  Eigen::Index n() const noexcept { return y.size(); }
  std::size_t k() const noexcept { return components.size(); }
  std::vector<std::string> labels() const;
  /// Model error on shape mismatch, an empty component list, a rank-deficient
  /// X, or a component that fails a semidefinite factorization.
  void validate() const;
};

struct VcEstimate {
  Eigen::VectorXd beta;
  Eigen::VectorXd sigma2;
  double loglik = 0.0;
  std::vector<double> trace;    // loglik at the start and after each iteration
  std::vector<double> seconds;  // wall-clock per iteration
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> labels;
};

struct MmOptions {
  double tol = 1e-8;        // relative change of the objective
  double param_tol = 1e-8;  // max |delta sigma2| / sum sigma2
  int max_iter = 1000;
  /// Defaults to var(y) split equally across components, each scaled by the
  /// component's mean diagonal.
  std::optional<Eigen::VectorXd> init;
};

/// sum_j sigma2_j V_j
Eigen::MatrixXd covariance(const VcModel& model, const Eigen::VectorXd& sigma2);

/// -0.5 [n log 2 pi + log det W + r' W^-1 r], r = y - X beta.
double loglik(const VcModel& model, const Eigen::VectorXd& beta, const Eigen::VectorXd& sigma2);

/// d loglik / d sigma2_j = 0.5 [r' W^-1 V_j W^-1 r - tr(W^-1 V_j)] at fixed beta.
Eigen::VectorXd loglik_gradient(const VcModel& model, const Eigen::VectorXd& beta,
                                const Eigen::VectorXd& sigma2);

/// Maximum likelihood by alternating the generalized least squares beta
/// update with sigma2_j <- sigma2_j sqrt(r'W^-1 V_j W^-1 r / tr(W^-1 V_j)).
VcEstimate mm_fit(const VcModel& model, const MmOptions& options = {});

/// Eigendecomposition Phi = O D O' with the response and design rotated into
/// the eigenbasis. Immutable once built.
struct TwoComponentSpectral {
  Eigen::MatrixXd O;
  Eigen::VectorXd d;
  Eigen::VectorXd y;  // O'y
  Eigen::MatrixXd X;  // O'X

  /// Data error if Phi has an eigenvalue below -1e-8; eigenvalues in
  /// [-1e-8, 0) are clipped to 0.
  static TwoComponentSpectral build(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y,
                                    const Eigen::MatrixXd& X);
  /// Same decomposition with an extra design column (rotated here).
  TwoComponentSpectral with_covariate(const Eigen::VectorXd& g) const;
  /// Same decomposition with a different response.
  TwoComponentSpectral with_response(const Eigen::VectorXd& y) const;
  Eigen::Index n() const noexcept { return d.size(); }
};

/// MM fit of y ~ N(X beta, sigma2_a Phi + sigma2_e I) carried out in the
/// eigenbasis, where W is diagonal. Labels are "genetic" and "environment".
VcEstimate spectral_fit(const TwoComponentSpectral& cache, const MmOptions& options = {});
VcEstimate spectral_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                        const Eigen::MatrixXd& phi, const MmOptions& options = {});

/// vec(Y) ~ N(vec(X B), Sigma_a (x) Phi + Sigma_e (x) I) for two traits.
struct BivariateEstimate {
  Eigen::MatrixXd B;  // p x 2
  Eigen::Matrix2d sigma_a;
  Eigen::Matrix2d sigma_e;
  double loglik = 0.0;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
};

BivariateEstimate bivariate_spectral_fit(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& X,
                                         const Eigen::MatrixXd& phi,
                                         const MmOptions& options = {});

/// sigma2_g / (sigma2_g + sigma2_e); empty when both are 0.
std::optional<double> heritability(const VcEstimate& estimate, std::size_t genetic,
                                   std::size_t environment);

struct ScoreResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  // g lies in the span of X
};

/// Score test of one extra fixed effect against a fitted null, with the null
/// variance components held fixed. Whitening by W0^-1/2 is cached, so each
/// test costs one O(n^2) (or O(n) for iid) transform plus O(np).
class ScoreTester {
 public:
  static ScoreTester dense(const VcModel& null_model, const VcEstimate& null_fit);
  static ScoreTester spectral(const TwoComponentSpectral& cache, const VcEstimate& null_fit);
  /// W0 = sigma2 I.
  static ScoreTester iid(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, double sigma2,
                         const Eigen::VectorXd& beta);

  ScoreResult test(const Eigen::VectorXd& g) const;
  /// One test per column of g, whitened as a block.
  std::vector<ScoreResult> test_columns(const Eigen::MatrixXd& g) const;
  Eigen::Index n() const noexcept { return residual_.size(); }

 private:
  enum class Kind { Dense, Spectral, Iid };
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& g) const;
  ScoreResult evaluate(const Eigen::Ref<const Eigen::VectorXd>& whitened) const;
  void finish(const Eigen::MatrixXd& whitened_x, Eigen::VectorXd whitened_residual);

  Kind kind_ = Kind::Iid;
  Eigen::MatrixXd lower_;     // Cholesky factor of W0 (dense)
  Eigen::MatrixXd rotation_;  // O (spectral)
  Eigen::VectorXd scale_;     // diagonal whitening weights (spectral)
  double iid_scale_ = 1.0;
  Eigen::MatrixXd basis_;  // orthonormal basis of the whitened X
  Eigen::VectorXd residual_;
};

struct LrtResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int df = 0;
  bool boundary = false;  // one extra variance component: 0.5 chi2(0) + 0.5 chi2(1)
};

/// Nesting is read off the fits: the null's component labels must be a subset
/// of the alternative's and it must have no more fixed effects.
LrtResult lrt(const VcEstimate& null_fit, const VcEstimate& alt_fit);

enum class Penalty { Ridge, Lasso, Scad, Mcp };
Penalty parse_penalty(std::string_view name);
std::string_view to_string(Penalty p) noexcept;

struct PenaltyOptions {
  Penalty kind = Penalty::Lasso;
  double lambda = 0.0;
  double scad_a = 3.7;
  double mcp_gamma = 2.0;
};

/// P_lambda(sigma), with sigma the standard deviation.
double penalty_value(const PenaltyOptions& p, double sigma);

struct PenalizedEstimate {
  VcEstimate fit;
  std::vector<double> objective;  // -loglik + penalty per iteration
  std::vector<bool> selected;     // sigma_j >= 1e-8 (unpenalized always true)
};

/// Minimizes -loglik + sum over penalized components of P_lambda(sigma_j).
/// Each MM step minimizes the separable surrogate
///   0.5 (c_j s^2 + a_j / s^2) + P'(s_n) s  (+ lambda s^2 for ridge)
/// in s = sigma_j by bisection on its quartic stationarity condition; with no
/// penalty this is exactly the mm_fit update.
PenalizedEstimate penalized_fit(const VcModel& model, const PenaltyOptions& penalty,
                                const MmOptions& options = {});

}  // namespace genokit::vc
