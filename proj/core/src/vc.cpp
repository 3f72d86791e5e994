#include "genokit/vc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <set>

#include "genokit/error.hpp"
#include "genokit/stats.hpp"
#include "vc_engine.hpp"

namespace genokit::vc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_sigma(const VcModel& model, const VectorXd& sigma2) {
  if (static_cast<std::size_t>(sigma2.size()) != model.k())
    fail(ErrorKind::Argument, "sigma2 has " + std::to_string(sigma2.size()) + " entries for " +
                                  std::to_string(model.k()) + " components");
  if ((sigma2.array() < 0).any()) fail(ErrorKind::Argument, "variance components must be >= 0");
}

}  // namespace

Component Component::from_factor(std::string label, const MatrixXd& u, bool penalized) {
  return {std::move(label), u * u.transpose(), penalized};
}

Component Component::identity(std::string label, Index n, bool penalized) {
  return {std::move(label), MatrixXd::Identity(n, n), penalized};
}

std::vector<std::string> VcModel::labels() const {
  std::vector<std::string> out;
  for (const auto& c : components) out.push_back(c.label);
  return out;
}

void VcModel::validate() const {
  const Index n = y.size();
  if (components.empty()) fail(ErrorKind::Model, "model has no variance components");
  if (X.rows() != n)
    fail(ErrorKind::Model, "design has " + std::to_string(X.rows()) + " rows, response has " +
                               std::to_string(n));
  if (!y.allFinite() || !X.allFinite()) fail(ErrorKind::Data, "response or design is not finite");
  if (X.cols() > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(X);
    if (qr.rank() < X.cols())
      fail(ErrorKind::Model, "fixed-effect design is rank deficient (rank " +
                                 std::to_string(qr.rank()) + " of " + std::to_string(X.cols()) +
                                 ")");
  }
  std::set<std::string> seen;
  for (const auto& c : components) {
    if (!seen.insert(c.label).second)
      fail(ErrorKind::Model, "duplicate component label " + c.label);
    if (c.V.rows() != n || c.V.cols() != n)
      fail(ErrorKind::Model, "component " + c.label + " is not " + std::to_string(n) + " x " +
                                 std::to_string(n));
    const double scale = std::max(1.0, c.V.diagonal().cwiseAbs().maxCoeff());
    if ((c.V - c.V.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
      fail(ErrorKind::Model, "component " + c.label + " is not symmetric");
    Eigen::LDLT<MatrixXd> ldlt(c.V);
    if (!ldlt.vectorD().allFinite() || ldlt.vectorD().minCoeff() < -1e-8 * scale)
      fail(ErrorKind::Model, "component " + c.label + " is not positive semidefinite");
  }
}

MatrixXd covariance(const VcModel& model, const VectorXd& sigma2) {
  check_sigma(model, sigma2);
  MatrixXd w = MatrixXd::Zero(model.n(), model.n());
  for (std::size_t j = 0; j < model.k(); ++j)
    if (sigma2[static_cast<Index>(j)] != 0.0)
      w += sigma2[static_cast<Index>(j)] * model.components[j].V;
  return w;
}

double loglik(const VcModel& model, const VectorXd& beta, const VectorXd& sigma2) {
  const auto llt = detail::factor_covariance(covariance(model, sigma2));
  const VectorXd r = model.y - model.X * beta;
  const VectorXd z = llt.matrixL().solve(r);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(model.n()) * kLog2Pi + logdet + z.squaredNorm());
}

VectorXd loglik_gradient(const VcModel& model, const VectorXd& beta, const VectorXd& sigma2) {
  const auto llt = detail::factor_covariance(covariance(model, sigma2));
  const VectorXd u = llt.solve(model.y - model.X * beta);
  const MatrixXd winv = llt.solve(MatrixXd::Identity(model.n(), model.n()));
  VectorXd g(static_cast<Index>(model.k()));
  for (std::size_t j = 0; j < model.k(); ++j) {
    const auto& v = model.components[j].V;
    g[static_cast<Index>(j)] = 0.5 * (u.dot(v * u) - winv.cwiseProduct(v).sum());
  }
  return g;
}

namespace detail {

Eigen::LLT<MatrixXd> factor_covariance(const MatrixXd& w) {
  Eigen::LLT<MatrixXd> llt(w);
  if (llt.info() == Eigen::Success) return llt;
  MatrixXd jittered = w;
  jittered.diagonal().array() += 1e-10 * std::abs(w.diagonal().mean());
  llt.compute(jittered);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::Numeric, "covariance matrix is not positive definite");
  return llt;
}

Evaluation DenseBackend::evaluate(const VectorXd& sigma2) const {
  const auto llt = factor_covariance(covariance(model_, sigma2));
  const auto L = llt.matrixL();
  const MatrixXd lx = L.solve(model_.X);
  const VectorXd ly = L.solve(model_.y);
  Evaluation ev;
  ev.beta = lx.cols() > 0 ? VectorXd(lx.colPivHouseholderQr().solve(ly)) : VectorXd();
  const VectorXd z = lx.cols() > 0 ? VectorXd(ly - lx * ev.beta) : ly;
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  ev.loglik = -0.5 * (static_cast<double>(model_.n()) * kLog2Pi + logdet + z.squaredNorm());
  const VectorXd u = llt.matrixU().solve(z);
  const MatrixXd winv = llt.solve(MatrixXd::Identity(model_.n(), model_.n()));
  ev.q.resize(static_cast<Index>(k()));
  ev.c.resize(static_cast<Index>(k()));
  for (std::size_t j = 0; j < k(); ++j) {
    const auto& v = model_.components[j].V;
    ev.q[static_cast<Index>(j)] = u.dot(v * u);
    ev.c[static_cast<Index>(j)] = winv.cwiseProduct(v).sum();
  }
  return ev;
}

double mm_update(double sigma2, double q, double c) {
  if (!(c > 0.0)) return 0.0;
  return sigma2 * std::sqrt(std::max(q, 0.0) / c);
}

VectorXd default_init(const VectorXd& y, const std::vector<double>& mean_diagonal) {
  const double n = static_cast<double>(y.size());
  double var = (y.array() - y.mean()).square().sum() / n;
  if (!(var > 0.0)) var = 1.0;
  VectorXd s(static_cast<Index>(mean_diagonal.size()));
  for (std::size_t j = 0; j < mean_diagonal.size(); ++j) {
    const double d = mean_diagonal[j] > 0.0 ? mean_diagonal[j] : 1.0;
    s[static_cast<Index>(j)] = var / static_cast<double>(mean_diagonal.size()) / d;
  }
  return s;
}

EngineResult run_mm(const Backend& backend, VectorXd sigma2, const MmOptions& options,
                    const SigmaUpdate& update, const PenaltyTerm& penalty) {
  using clock = std::chrono::steady_clock;
  const std::size_t k = backend.k();
  if (static_cast<std::size_t>(sigma2.size()) != k)
    fail(ErrorKind::Argument, "initial sigma2 has the wrong length");
  if ((sigma2.array() <= 0).any() || !sigma2.allFinite())
    fail(ErrorKind::Argument, "initial variance components must be positive");

  EngineResult out;
  auto& est = out.estimate;
  Evaluation ev = backend.evaluate(sigma2);
  double obj = -ev.loglik + (penalty ? penalty(sigma2) : 0.0);
  est.trace.push_back(ev.loglik);
  out.objective.push_back(obj);

  for (int it = 1; it <= options.max_iter; ++it) {
    const auto start = clock::now();
    VectorXd next(sigma2.size());
    for (std::size_t j = 0; j < k; ++j) {
      const auto jj = static_cast<Index>(j);
      next[jj] = update(j, sigma2[jj], ev.q[jj], ev.c[jj]);
    }
    Evaluation ev_next = backend.evaluate(next);
    const double obj_next = -ev_next.loglik + (penalty ? penalty(next) : 0.0);
    est.seconds.push_back(std::chrono::duration<double>(clock::now() - start).count());

    const double total = std::max(next.sum(), 1e-300);
    const double moved = (next - sigma2).cwiseAbs().maxCoeff() / total;
    const bool flat = std::abs(obj - obj_next) <= options.tol * std::abs(obj);
    sigma2 = std::move(next);
    ev = std::move(ev_next);
    obj = obj_next;
    est.trace.push_back(ev.loglik);
    out.objective.push_back(obj);
    est.iterations = it;
    if (flat && moved <= options.param_tol) {
      est.converged = true;
      break;
    }
  }
  est.beta = ev.beta;
  est.sigma2 = sigma2;
  est.loglik = ev.loglik;
  return out;
}

}  // namespace detail

VcEstimate mm_fit(const VcModel& model, const MmOptions& options) {
  model.validate();
  std::vector<double> diag;
  for (const auto& c : model.components) diag.push_back(c.V.diagonal().mean());
  VectorXd init = options.init ? *options.init : detail::default_init(model.y, diag);
  detail::DenseBackend backend(model);
  auto result = detail::run_mm(backend, std::move(init), options, detail::plain_update, {});
  result.estimate.labels = model.labels();
  return std::move(result.estimate);
}

std::optional<double> heritability(const VcEstimate& estimate, std::size_t genetic,
                                   std::size_t environment) {
  const auto k = static_cast<std::size_t>(estimate.sigma2.size());
  if (genetic >= k || environment >= k)
    fail(ErrorKind::Argument, "heritability component index out of range");
  const double g = estimate.sigma2[static_cast<Index>(genetic)];
  const double e = estimate.sigma2[static_cast<Index>(environment)];
  if (g + e == 0.0) return std::nullopt;
  return g / (g + e);
}

ScoreTester ScoreTester::dense(const VcModel& null_model, const VcEstimate& null_fit) {
  ScoreTester t;
  t.kind_ = Kind::Dense;
  const auto llt = detail::factor_covariance(covariance(null_model, null_fit.sigma2));
  t.lower_ = llt.matrixL();
  const auto L = t.lower_.triangularView<Eigen::Lower>();
  const VectorXd r = null_model.y - null_model.X * null_fit.beta;
  t.finish(L.solve(null_model.X), L.solve(r));
  return t;
}

ScoreTester ScoreTester::spectral(const TwoComponentSpectral& cache, const VcEstimate& null_fit) {
  if (null_fit.sigma2.size() != 2)
    fail(ErrorKind::Argument, "spectral score test needs a two-component null fit");
  ScoreTester t;
  t.kind_ = Kind::Spectral;
  t.rotation_ = cache.O;
  const VectorXd w = null_fit.sigma2[0] * cache.d.array() + null_fit.sigma2[1];
  if ((w.array() <= 0).any()) fail(ErrorKind::Numeric, "null covariance is singular");
  t.scale_ = w.cwiseSqrt().cwiseInverse();
  const VectorXd r = cache.y - cache.X * null_fit.beta;
  t.finish(t.scale_.asDiagonal() * cache.X, t.scale_.cwiseProduct(r));
  return t;
}

ScoreTester ScoreTester::iid(const VectorXd& y, const MatrixXd& X, double sigma2,
                             const VectorXd& beta) {
  if (!(sigma2 > 0.0)) fail(ErrorKind::Numeric, "null residual variance is zero");
  ScoreTester t;
  t.kind_ = Kind::Iid;
  t.iid_scale_ = 1.0 / std::sqrt(sigma2);
  t.finish(t.iid_scale_ * X, t.iid_scale_ * (y - X * beta));
  return t;
}

void ScoreTester::finish(const MatrixXd& whitened_x, VectorXd whitened_residual) {
  residual_ = std::move(whitened_residual);
  if (whitened_x.cols() == 0) {
    basis_.resize(whitened_x.rows(), 0);
    return;
  }
  Eigen::HouseholderQR<MatrixXd> qr(whitened_x);
  basis_ = qr.householderQ() * MatrixXd::Identity(whitened_x.rows(), whitened_x.cols());
}

MatrixXd ScoreTester::whiten(const MatrixXd& g) const {
  switch (kind_) {
    case Kind::Dense: return lower_.triangularView<Eigen::Lower>().solve(g);
    case Kind::Spectral: return scale_.asDiagonal() * (rotation_.transpose() * g);
    case Kind::Iid: break;
  }
  return iid_scale_ * g;
}

ScoreResult ScoreTester::evaluate(const Eigen::Ref<const VectorXd>& gw) const {
  const double u = gw.dot(residual_);
  const double norm2 = gw.squaredNorm();
  const double vs = norm2 - (basis_.transpose() * gw).squaredNorm();
  ScoreResult res;
  if (!(norm2 > 0.0) || vs <= 1e-10 * norm2) {
    res.degenerate = true;
    return res;
  }
  res.statistic = u * u / vs;
  res.p_value = stats::chi2_sf(res.statistic, 1.0);
  return res;
}

ScoreResult ScoreTester::test(const VectorXd& g) const {
  if (g.size() != n()) fail(ErrorKind::Argument, "candidate vector length != subjects");
  const MatrixXd gw = whiten(g);
  return evaluate(gw.col(0));
}

std::vector<ScoreResult> ScoreTester::test_columns(const MatrixXd& g) const {
  if (g.rows() != n()) fail(ErrorKind::Argument, "candidate matrix rows != subjects");
  const MatrixXd gw = whiten(g);
  std::vector<ScoreResult> out;
  out.reserve(static_cast<std::size_t>(g.cols()));
  for (Index j = 0; j < g.cols(); ++j) out.push_back(evaluate(gw.col(j)));
  return out;
}

LrtResult lrt(const VcEstimate& null_fit, const VcEstimate& alt_fit) {
  std::set<std::string> alt(alt_fit.labels.begin(), alt_fit.labels.end());
  for (const auto& l : null_fit.labels)
    if (!alt.count(l))
      fail(ErrorKind::Argument, "null component " + l + " is absent from the alternative");
  if (null_fit.beta.size() > alt_fit.beta.size())
    fail(ErrorKind::Argument, "null has more fixed effects than the alternative");
  const auto extra_components = alt_fit.labels.size() - null_fit.labels.size();
  const auto extra_fixed = alt_fit.beta.size() - null_fit.beta.size();
  if (extra_components > 1 || (extra_components == 1 && extra_fixed > 0))
    fail(ErrorKind::Argument,
         "only single-component or fixed-effect-only nested comparisons are supported");
  LrtResult res;
  res.statistic = std::max(0.0, 2.0 * (alt_fit.loglik - null_fit.loglik));
  if (extra_components == 1) {
    res.boundary = true;
    res.df = 1;
    res.p_value = stats::chi2_boundary_mixture_sf(res.statistic);
  } else {
    res.df = static_cast<int>(extra_fixed);
    res.p_value = res.df == 0 ? 1.0 : stats::chi2_sf(res.statistic, res.df);
  }
  return res;
}

}  // namespace genokit::vc
