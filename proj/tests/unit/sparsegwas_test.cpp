#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "genokit/error.hpp"
#include "genokit/iht.hpp"
#include "genokit/numeric.hpp"
#include "genokit/simulate.hpp"
#include "oracles.hpp"

using namespace genokit;
using namespace genokit::iht;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd gaussian(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  MatrixXd a(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) a(i, j) = z(rng);
  return a;
}

struct Planted {
  MatrixXd x;
  VectorXd y;
  std::set<Eigen::Index> support;
};

Planted planted(int n, int p, int k, double effect, std::mt19937_64& rng) {
  Planted s{gaussian(n, p, rng), VectorXd(), {}};
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) idx[static_cast<std::size_t>(j)] = j;
  std::shuffle(idx.begin(), idx.end(), rng);
  VectorXd beta = VectorXd::Zero(p);
  for (int j = 0; j < k; ++j) {
    beta[idx[static_cast<std::size_t>(j)]] = (j % 2 ? -effect : effect);
    s.support.insert(idx[static_cast<std::size_t>(j)]);
  }
  s.y = s.x * beta + gaussian(n, 1, rng);
  return s;
}

}  // namespace

TEST(Project, KeepsLargestMagnitudes) {
  VectorXd b(4);
  b << 3, -1, 2, 0.5;
  VectorXd want(4);
  want << 3, 0, 2, 0;
  EXPECT_EQ(project_sparse(b, 2), want);
  EXPECT_EQ(project_sparse(b, 4), b);
  EXPECT_EQ(project_sparse(b, 9), b);
  VectorXd tie(2);
  tie << 1, 1;
  VectorXd first(2);
  first << 1, 0;
  EXPECT_EQ(project_sparse(tie, 1), first);
}

TEST(Project, WeightsScaleTheRanking) {
  VectorXd b(3), w(3);
  b << 3, 2, 1;
  w << 0.1, 1, 1;
  const VectorXd p = project_sparse(b, 1, w);
  EXPECT_EQ(p[1], 2.0);
  EXPECT_EQ(p[0], 0.0);
}

TEST(Fit, OrthonormalDesignOneStepExact) {
  std::mt19937_64 rng(1);
  const MatrixXd x = oracle::random_orthonormal(40, 8, rng);
  const VectorXd y = gaussian(40, 1, rng);
  IhtConfig cfg;
  cfg.k = 8;
  const auto fit = iht_fit(DenseDesign(x), y, cfg);
  const VectorXd ls = x.transpose() * y;
  EXPECT_LT((fit.beta - ls).cwiseAbs().maxCoeff(), 1e-12);
  ASSERT_GE(fit.loss.size(), 2u);
  EXPECT_NEAR(fit.loss[1], 0.5 * (y - x * ls).squaredNorm(), 1e-12);
}

TEST(Fit, ZeroResponseStaysAtZero) {
  std::mt19937_64 rng(2);
  IhtConfig cfg;
  cfg.k = 3;
  const auto fit = iht_fit(DenseDesign(gaussian(30, 10, rng)), VectorXd::Zero(30), cfg);
  EXPECT_EQ(fit.beta, VectorXd::Zero(10));
  EXPECT_EQ(fit.iterations, 0);
  EXPECT_TRUE(fit.converged);
}

TEST(Fit, LossDecreasesAtEveryAcceptedStep) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const auto s = planted(120, 300, 6, 0.5, rng);
    IhtConfig cfg;
    cfg.k = 6;
    const auto fit = iht_fit(DenseDesign(s.x), s.y, cfg);
    for (std::size_t i = 1; i < fit.loss.size(); ++i) EXPECT_LE(fit.loss[i], fit.loss[i - 1]);
    EXPECT_LE(fit.support.size(), 6u);
  }
}

TEST(Fit, RecoversPlantedSupport) {
  std::mt19937_64 rng(4);
  int hits = 0;
  for (int rep = 0; rep < 5; ++rep) {
    const auto s = planted(500, 800, 10, 0.5, rng);
    IhtConfig cfg;
    cfg.k = 10;
    const auto fit = iht_fit(DenseDesign(s.x), s.y, cfg);
    hits += std::set<Eigen::Index>(fit.support.begin(), fit.support.end()) == s.support;
  }
  EXPECT_GE(hits, 4);
}

TEST(Fit, InterceptIsUnpenalized) {
  std::mt19937_64 rng(5);
  auto s = planted(200, 50, 3, 1.0, rng);
  s.y.array() += 7.0;
  IhtConfig cfg;
  cfg.k = 3;
  const auto fit = iht_fit(DenseDesign(s.x), s.y, cfg, MatrixXd::Ones(200, 1));
  ASSERT_EQ(fit.gamma.size(), 1);
  EXPECT_NEAR(fit.gamma[0], 7.0, 0.3);
  EXPECT_EQ(std::set<Eigen::Index>(fit.support.begin(), fit.support.end()), s.support);
}

TEST(Fit, UnrestrictedStepStillDescends) {
  std::mt19937_64 rng(6);
  const auto s = planted(100, 200, 4, 0.7, rng);
  IhtConfig cfg;
  cfg.k = 4;
  cfg.unrestricted_step = true;
  const auto fit = iht_fit(DenseDesign(s.x), s.y, cfg);
  for (std::size_t i = 1; i < fit.loss.size(); ++i) EXPECT_LE(fit.loss[i], fit.loss[i - 1]);
}

TEST(Design, PackedMatchesDecompressed) {
  std::mt19937_64 rng(7);
  const MatrixXd dosages = oracle::random_dosages(40, 25, 0.05, rng);
  const auto g = sim::pack(dosages);
  const PackedDesign packed(g);
  const DenseDesign dense(snp::decompress(g, snp::NumericOptions{}));
  const VectorXd b = gaussian(25, 1, rng), r = gaussian(40, 1, rng);
  EXPECT_LT((packed.apply(b) - dense.apply(b)).norm(), 1e-12 * dense.apply(b).norm());
  EXPECT_LT((packed.apply_transpose(r) - dense.apply_transpose(r)).norm(),
            1e-12 * dense.apply_transpose(r).norm());
  const RowSubset sub(dense, {3, 1, 7});
  const VectorXd full = dense.apply(b);
  const VectorXd part = sub.apply(b);
  EXPECT_EQ(part[0], full[3]);
  EXPECT_EQ(part[2], full[7]);
}

TEST(Design, NonFiniteIsDataError) {
  MatrixXd x = MatrixXd::Ones(3, 3);
  x(1, 1) = std::nan("");
  try {
    DenseDesign d(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Data);
  }
}

TEST(CrossValidation, SingletonGrid) {
  std::mt19937_64 rng(8);
  const auto s = planted(60, 40, 3, 0.5, rng);
  const auto cv = cross_validate_k(DenseDesign(s.x), s.y, {4}, IhtConfig{});
  EXPECT_EQ(cv.k, 4u);
  EXPECT_EQ(cv.mse.size(), 1u);
}

TEST(CrossValidation, PureNoiseFavoursSmallK) {
  std::mt19937_64 rng(9);
  std::vector<std::size_t> grid{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> mean_mse(grid.size(), 0.0);
  double mean_k = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const MatrixXd x = gaussian(100, 200, rng);
    const VectorXd y = gaussian(100, 1, rng);
    IhtConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(rep);
    const auto cv = cross_validate_k(DenseDesign(x), y, grid, cfg);
    mean_k += static_cast<double>(cv.k) / 20.0;
    for (std::size_t i = 0; i < grid.size(); ++i) mean_mse[i] += cv.mse[i] / 20.0;
  }
  EXPECT_LT(mean_k, 3.0);
  EXPECT_LT(mean_mse.front(), mean_mse.back());
}

TEST(CrossValidation, DeterministicForSeed) {
  std::mt19937_64 rng(10);
  const auto s = planted(80, 60, 3, 0.8, rng);
  IhtConfig cfg;
  cfg.seed = 17;
  const auto a = cross_validate_k(DenseDesign(s.x), s.y, {1, 3, 5}, cfg);
  const auto b = cross_validate_k(DenseDesign(s.x), s.y, {5, 3, 1}, cfg);
  EXPECT_EQ(a.mse, b.mse);
  EXPECT_EQ(a.k, b.k);
}
