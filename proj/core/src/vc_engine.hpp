#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "genokit/vc.hpp"

namespace genokit::vc::detail {

/// Profile quantities at a given sigma2: the GLS beta, the log-likelihood at
/// (beta, sigma2), and per component q_j = r'W^-1 V_j W^-1 r, c_j = tr(W^-1 V_j).
struct Evaluation {
  Eigen::VectorXd beta;
  double loglik = 0.0;
  Eigen::VectorXd q;
  Eigen::VectorXd c;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::size_t k() const = 0;
  virtual Evaluation evaluate(const Eigen::VectorXd& sigma2) const = 0;
};

/// New sigma2_j from the current sigma2_j, q_j and c_j.
using SigmaUpdate = std::function<double(std::size_t j, double sigma2, double q, double c)>;
/// Penalty added to -loglik in the objective.
using PenaltyTerm = std::function<double(const Eigen::VectorXd& sigma2)>;

struct EngineResult {
  VcEstimate estimate;
  std::vector<double> objective;
};

EngineResult run_mm(const Backend& backend, Eigen::VectorXd sigma2, const MmOptions& options,
                    const SigmaUpdate& update, const PenaltyTerm& penalty);

/// sigma2_j <- sigma2_j sqrt(q_j / c_j); components with c_j = 0 drop to 0.
double mm_update(double sigma2, double q, double c);
inline double plain_update(std::size_t, double sigma2, double q, double c) {
  return mm_update(sigma2, q, c);
}

/// var(y) / k for each component, divided by its mean diagonal.
Eigen::VectorXd default_init(const Eigen::VectorXd& y, const std::vector<double>& mean_diagonal);

/// SPD factor of w, retrying once with 1e-10 * mean(diag) added.
Eigen::LLT<Eigen::MatrixXd> factor_covariance(const Eigen::MatrixXd& w);

class DenseBackend final : public Backend {
 public:
  explicit DenseBackend(const VcModel& model) : model_(model) {}
  std::size_t k() const override { return model_.k(); }
  Evaluation evaluate(const Eigen::VectorXd& sigma2) const override;

 private:
  const VcModel& model_;
};

}  // namespace genokit::vc::detail
