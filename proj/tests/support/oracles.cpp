#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

double ks_uniform_p(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double u = std::clamp(sample[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - u, u - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

Eigen::MatrixXd random_dosages(int n, int m, double missing_rate, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(n, m);
  for (int k = 0; k < m; ++k) {
    const double p = 0.05 + 0.9 * u(rng);
    for (int i = 0; i < n; ++i) {
      if (u(rng) < missing_rate) {
        x(i, k) = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      x(i, k) = (u(rng) < p) + (u(rng) < p);
    }
  }
  return x;
}

std::vector<double> column_freqs(const Eigen::MatrixXd& x) {
  std::vector<double> f(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    double s = 0.0, c = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (!std::isnan(x(i, k))) {
        s += x(i, k);
        c += 1.0;
      }
    f[static_cast<std::size_t>(k)] = c > 0 ? s / (2.0 * c) : std::nan("");
  }
  return f;
}

Eigen::MatrixXd mean_imputed(const Eigen::MatrixXd& x) {
  const auto f = column_freqs(x);
  Eigen::MatrixXd out = x;
  for (Eigen::Index k = 0; k < x.cols(); ++k)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (std::isnan(out(i, k))) out(i, k) = 2.0 * f[static_cast<std::size_t>(k)];
  return out;
}

namespace {

bool usable(double p) { return p > 0.0 && p < 1.0; }

double value(const Eigen::MatrixXd& x, Eigen::Index i, Eigen::Index k, double p) {
  return std::isnan(x(i, k)) ? 2.0 * p : x(i, k);
}

}  // namespace

Eigen::MatrixXd naive_grm(const Eigen::MatrixXd& x, const std::vector<double>& freqs) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  double used = 0.0;
  for (Eigen::Index k = 0; k < x.cols(); ++k) used += usable(freqs[k]);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        const double p = freqs[static_cast<std::size_t>(k)];
        if (!usable(p)) continue;
        acc += (value(x, i, k, p) - 2 * p) * (value(x, j, k, p) - 2 * p) / (4 * p * (1 - p));
      }
      s(i, j) = acc / used;
    }
  return s;
}

Eigen::MatrixXd naive_robust_grm(const Eigen::MatrixXd& x, const std::vector<double>& freqs) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  double denom = 0.0;
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const double p = freqs[static_cast<std::size_t>(k)];
    if (usable(p)) denom += 4 * p * (1 - p);
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        const double p = freqs[static_cast<std::size_t>(k)];
        if (!usable(p)) continue;
        acc += (value(x, i, k, p) - 2 * p) * (value(x, j, k, p) - 2 * p);
      }
      s(i, j) = acc / denom;
    }
  return s;
}

Eigen::MatrixXd naive_mom(const Eigen::MatrixXd& x, const std::vector<double>& freqs) {
  const Eigen::Index n = x.rows();
  double K = 0.0, q = 0.0;
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const double p = freqs[static_cast<std::size_t>(k)];
    if (!usable(p)) continue;
    K += 1.0;
    q += p * p + (1 - p) * (1 - p);
  }
  q /= K;
  Eigen::MatrixXd s(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        const double p = freqs[static_cast<std::size_t>(k)];
        if (!usable(p)) continue;
        const double a = value(x, i, k, p), b = value(x, j, k, p);
        acc += (a * b + (2 - a) * (2 - b)) / 4.0;
      }
      s(i, j) = (acc / K - q) / (1 - q);
    }
  return s;
}

double profiled_loglik(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                       const std::vector<Eigen::MatrixXd>& V, const Eigen::VectorXd& sigma2,
                       Eigen::VectorXd* beta_out) {
  const Eigen::Index n = y.size();
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < V.size(); ++j) W += sigma2[static_cast<Eigen::Index>(j)] * V[j];
  Eigen::LLT<Eigen::MatrixXd> llt(W);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd WiX = llt.solve(X);
  const Eigen::VectorXd beta = (X.transpose() * WiX).ldlt().solve(WiX.transpose() * y);
  if (beta_out) *beta_out = beta;
  const Eigen::VectorXd r = y - X * beta;
  const double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  return -0.5 * (n * std::log(2 * M_PI) + logdet + r.dot(llt.solve(r)));
}

Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            Eigen::VectorXd start, double step, int max_eval, double ftol) {
  const Eigen::Index d = start.size();
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(d + 1), start);
  for (Eigen::Index i = 0; i < d; ++i) pts[static_cast<std::size_t>(i + 1)][i] += step;
  std::vector<double> val(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) val[i] = f(pts[i]);
  int evals = static_cast<int>(pts.size());
  while (evals < max_eval) {
    std::vector<std::size_t> idx(pts.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return val[a] < val[b]; });
    const std::size_t best = idx.front(), worst = idx.back(), second = idx[idx.size() - 2];
    if (std::abs(val[worst] - val[best]) <= ftol * (1.0 + std::abs(val[best]))) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) centroid += pts[idx[i]];
    centroid /= static_cast<double>(d);
    const Eigen::VectorXd refl = centroid + (centroid - pts[worst]);
    const double fr = f(refl);
    ++evals;
    if (fr < val[best]) {
      const Eigen::VectorXd exp = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(exp);
      ++evals;
      if (fe < fr) {
        pts[worst] = exp;
        val[worst] = fe;
      } else {
        pts[worst] = refl;
        val[worst] = fr;
      }
    } else if (fr < val[second]) {
      pts[worst] = refl;
      val[worst] = fr;
    } else {
      const Eigen::VectorXd con = centroid + 0.5 * (pts[worst] - centroid);
      const double fc = f(con);
      ++evals;
      if (fc < val[worst]) {
        pts[worst] = con;
        val[worst] = fc;
      } else {
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          val[i] = f(pts[i]);
          ++evals;
        }
      }
    }
  }
  return pts[static_cast<std::size_t>(std::min_element(val.begin(), val.end()) - val.begin())];
}

Eigen::VectorXd ml_by_simplex(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                              const std::vector<Eigen::MatrixXd>& V, Eigen::VectorXd start) {
  auto f = [&](const Eigen::VectorXd& t) {
    return -profiled_loglik(y, X, V, t.array().exp().matrix());
  };
  Eigen::VectorXd t = start.array().log().matrix();
  for (int restart = 0; restart < 4; ++restart)
    t = nelder_mead(f, t, restart == 0 ? 0.5 : 0.05, 4000, 1e-14);
  return t.array().exp().matrix();
}

double regression_score(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& g) {
  const Eigen::Index n = y.size();
  const Eigen::MatrixXd H = X * (X.transpose() * X).inverse() * X.transpose();
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) - H;
  const Eigen::VectorXd r = M * y;
  const double s2 = r.squaredNorm() / static_cast<double>(n);
  const double u = g.dot(r);
  return u * u / (s2 * g.dot(M * g));
}

double parse_fraction(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return std::stod(text);
  return std::stod(text.substr(0, slash)) / std::stod(text.substr(slash + 1));
}

Eigen::MatrixXd random_orthonormal(int n, int p, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd a(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) a(i, j) = z(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
}

}  // namespace oracle
