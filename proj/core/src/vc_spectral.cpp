#include <chrono>
#include <cmath>
#include <numbers>
#include <vector>

#include "genokit/error.hpp"
#include "genokit/vc.hpp"
#include "vc_engine.hpp"

namespace genokit::vc {

using Eigen::Index;
using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

class SpectralBackend final : public detail::Backend {
 public:
  explicit SpectralBackend(const TwoComponentSpectral& s) : s_(s) {}
  std::size_t k() const override { return 2; }

  detail::Evaluation evaluate(const VectorXd& sigma2) const override {
    const VectorXd w = sigma2[0] * s_.d.array() + sigma2[1];
    if ((w.array() <= 0).any()) fail(ErrorKind::Numeric, "covariance matrix is not positive definite");
    const VectorXd inv = w.cwiseInverse();
    detail::Evaluation ev;
    VectorXd r = s_.y;
    if (s_.X.cols() > 0) {
      const MatrixXd a = s_.X.transpose() * inv.asDiagonal() * s_.X;
      const VectorXd b = s_.X.transpose() * inv.cwiseProduct(s_.y);
      ev.beta = a.llt().solve(b);
      r -= s_.X * ev.beta;
    }
    const double n = static_cast<double>(s_.n());
    ev.loglik = -0.5 * (n * kLog2Pi + w.array().log().sum() + r.cwiseProduct(r).dot(inv));
    const VectorXd u = r.cwiseProduct(inv);
    ev.q.resize(2);
    ev.c.resize(2);
    ev.q[0] = u.cwiseProduct(u).dot(s_.d);
    ev.q[1] = u.squaredNorm();
    ev.c[0] = inv.dot(s_.d);
    ev.c[1] = inv.sum();
    return ev;
  }

 private:
  const TwoComponentSpectral& s_;
};

Matrix2d sqrt_psd(const Matrix2d& m) {
  Eigen::SelfAdjointEigenSolver<Matrix2d> eig(0.5 * (m + m.transpose()));
  const Vector2d root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

/// Gamma <- L^-T [L' Gamma S Gamma L]^{1/2} L^-1 with M = L L'.
Matrix2d matrix_mm_update(const Matrix2d& gamma, const Matrix2d& s, const Matrix2d& m) {
  Eigen::LLT<Matrix2d> llt(m);
  if (llt.info() != Eigen::Success) return gamma;
  const Matrix2d L = llt.matrixL();
  const Matrix2d linv = L.inverse();
  const Matrix2d inner = sqrt_psd(L.transpose() * gamma * s * gamma * L);
  const Matrix2d out = linv.transpose() * inner * linv;
  return 0.5 * (out + out.transpose());
}

}  // namespace

namespace {

// Along zero kinship eigenvalues only the environment variance remains; if the
// design can reproduce the response there, the likelihood diverges as that
// variance shrinks (an in-sample centered GRM with an intercept does this).
void require_bounded(const VectorXd& d, const VectorXd& y, const MatrixXd& X) {
  if (d.size() == 0) return;
  const double dtol = 1e-10 * std::max(1.0, d.maxCoeff());
  std::vector<Index> null;
  for (Index i = 0; i < d.size(); ++i)
    if (d(i) <= dtol) null.push_back(i);
  if (null.empty()) return;
  const Index k = static_cast<Index>(null.size());
  VectorXd yn(k);
  MatrixXd xn(k, X.cols());
  for (Index i = 0; i < k; ++i) {
    yn(i) = y(null[i]);
    xn.row(i) = X.row(null[i]);
  }
  double resid = yn.norm();
  if (X.cols() > 0) resid = (yn - xn * xn.colPivHouseholderQr().solve(yn)).norm();
  if (resid <= 1e-8 * std::max(1e-300, y.norm()))
    fail(ErrorKind::Model,
         "kinship matrix is singular along the fixed-effect design; the likelihood is unbounded "
         "as the environment variance goes to 0 (a GRM centered with in-sample frequencies "
         "plus an intercept does this)");
}

}  // namespace

TwoComponentSpectral TwoComponentSpectral::build(const MatrixXd& phi, const VectorXd& y,
                                                 const MatrixXd& X) {
  const Index n = y.size();
  if (phi.rows() != n || phi.cols() != n)
    fail(ErrorKind::Model, "kinship matrix is not " + std::to_string(n) + " x " + std::to_string(n));
  if (X.rows() != n) fail(ErrorKind::Model, "design rows != response length");
  const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
  if ((phi - phi.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    fail(ErrorKind::Model, "kinship matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(phi);
  if (eig.info() != Eigen::Success) fail(ErrorKind::Numeric, "eigendecomposition failed");
  TwoComponentSpectral s;
  s.d = eig.eigenvalues();
  if (s.d.minCoeff() < -1e-8)
    fail(ErrorKind::Data, "kinship matrix has eigenvalue " + std::to_string(s.d.minCoeff()) +
                              " below -1e-8");
  s.d = s.d.cwiseMax(0.0);
  s.O = eig.eigenvectors();
  s.y = s.O.transpose() * y;
  s.X = s.O.transpose() * X;
  require_bounded(s.d, s.y, s.X);
  return s;
}

TwoComponentSpectral TwoComponentSpectral::with_covariate(const VectorXd& g) const {
  TwoComponentSpectral s = *this;
  s.X.conservativeResize(Eigen::NoChange, X.cols() + 1);
  s.X.col(X.cols()) = O.transpose() * g;
  require_bounded(s.d, s.y, s.X);
  return s;
}

TwoComponentSpectral TwoComponentSpectral::with_response(const VectorXd& response) const {
  TwoComponentSpectral s = *this;
  s.y = O.transpose() * response;
  require_bounded(s.d, s.y, s.X);
  return s;
}

VcEstimate spectral_fit(const TwoComponentSpectral& cache, const MmOptions& options) {
  if (cache.X.cols() > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(cache.X);
    if (qr.rank() < cache.X.cols()) fail(ErrorKind::Model, "fixed-effect design is rank deficient");
  }
  const double mean_d = cache.d.mean();
  VectorXd init(2);
  if (options.init) {
    init = *options.init;
  } else {
    const VectorXd y = cache.O * cache.y;
    init = detail::default_init(y, {mean_d, 1.0});
  }
  SpectralBackend backend(cache);
  auto result = detail::run_mm(backend, init, options, detail::plain_update, {});
  result.estimate.labels = {"genetic", "environment"};
  return std::move(result.estimate);
}

VcEstimate spectral_fit(const VectorXd& y, const MatrixXd& X, const MatrixXd& phi,
                        const MmOptions& options) {
  return spectral_fit(TwoComponentSpectral::build(phi, y, X), options);
}

BivariateEstimate bivariate_spectral_fit(const MatrixXd& Y, const MatrixXd& X, const MatrixXd& phi,
                                         const MmOptions& options) {
  if (Y.cols() != 2) fail(ErrorKind::Argument, "bivariate fit needs exactly two traits");
  const auto cache = TwoComponentSpectral::build(phi, Y.col(0), X);
  const Index n = Y.rows(), p = X.cols();
  const MatrixXd yt = cache.O.transpose() * Y;
  const MatrixXd& xt = cache.X;
  const VectorXd& d = cache.d;

  const MatrixXd centered = Y.rowwise() - Y.colwise().mean();
  const Matrix2d cov = centered.transpose() * centered / static_cast<double>(n);
  if (Eigen::LLT<Matrix2d>(cov).info() != Eigen::Success)
    fail(ErrorKind::Model, "trait covariance is singular");
  const double mean_d = d.mean() > 0.0 ? d.mean() : 1.0;
  BivariateEstimate est;
  est.sigma_a = 0.5 * cov / mean_d;
  est.sigma_e = 0.5 * cov;

  struct State {
    MatrixXd B;
    double loglik;
    Matrix2d sa, se, ma, me;
  };
  auto evaluate = [&](const Matrix2d& sigma_a, const Matrix2d& sigma_e) {
    std::vector<Matrix2d> inv(static_cast<std::size_t>(n));
    double logdet = 0.0;
    for (Index i = 0; i < n; ++i) {
      const Matrix2d omega = d[i] * sigma_a + sigma_e;
      const double det = omega.determinant();
      if (!(det > 0.0)) fail(ErrorKind::Numeric, "per-subject covariance is singular");
      logdet += std::log(det);
      inv[static_cast<std::size_t>(i)] = omega.inverse();
    }
    State st;
    st.B = MatrixXd::Zero(p, 2);
    if (p > 0) {
      MatrixXd a = MatrixXd::Zero(2 * p, 2 * p);
      VectorXd b = VectorXd::Zero(2 * p);
      for (Index i = 0; i < n; ++i) {
        const Matrix2d& w = inv[static_cast<std::size_t>(i)];
        const VectorXd x = xt.row(i).transpose();
        const MatrixXd xx = x * x.transpose();
        const Vector2d wy = w * yt.row(i).transpose();
        for (int s = 0; s < 2; ++s) {
          b.segment(s * p, p) += wy[s] * x;
          for (int t = 0; t < 2; ++t) a.block(s * p, t * p, p, p) += w(s, t) * xx;
        }
      }
      const VectorXd vecb = a.llt().solve(b);
      st.B.col(0) = vecb.head(p);
      st.B.col(1) = vecb.tail(p);
    }
    st.sa.setZero();
    st.se.setZero();
    st.ma.setZero();
    st.me.setZero();
    double quad = 0.0;
    for (Index i = 0; i < n; ++i) {
      const Matrix2d& w = inv[static_cast<std::size_t>(i)];
      Vector2d r = yt.row(i).transpose();
      if (p > 0) r -= st.B.transpose() * xt.row(i).transpose();
      const Vector2d u = w * r;
      quad += r.dot(u);
      const Matrix2d uu = u * u.transpose();
      st.sa += d[i] * uu;
      st.se += uu;
      st.ma += d[i] * w;
      st.me += w;
    }
    st.loglik = -0.5 * (2.0 * static_cast<double>(n) * kLog2Pi + logdet + quad);
    return st;
  };

  State st = evaluate(est.sigma_a, est.sigma_e);
  est.trace.push_back(st.loglik);
  for (int it = 1; it <= options.max_iter; ++it) {
    const Matrix2d na = matrix_mm_update(est.sigma_a, st.sa, st.ma);
    const Matrix2d ne = matrix_mm_update(est.sigma_e, st.se, st.me);
    State next = evaluate(na, ne);
    const double total = std::max(na.norm() + ne.norm(), 1e-300);
    const double moved = std::max((na - est.sigma_a).cwiseAbs().maxCoeff(),
                                  (ne - est.sigma_e).cwiseAbs().maxCoeff()) / total;
    const bool flat = std::abs(next.loglik - st.loglik) <= options.tol * std::abs(st.loglik);
    est.sigma_a = na;
    est.sigma_e = ne;
    st = std::move(next);
    est.trace.push_back(st.loglik);
    est.iterations = it;
    if (flat && moved <= options.param_tol) {
      est.converged = true;
      break;
    }
  }
  est.B = st.B;
  est.loglik = st.loglik;
  return est;
}

}  // namespace genokit::vc
