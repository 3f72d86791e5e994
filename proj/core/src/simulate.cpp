#include "genokit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "genokit/error.hpp"

namespace genokit::sim {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::MatrixXd hwe_dosages(std::size_t n, std::span<const double> freqs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd x(static_cast<Index>(n), static_cast<Index>(freqs.size()));
  for (Index k = 0; k < x.cols(); ++k) {
    const double p = freqs[static_cast<std::size_t>(k)];
    for (Index i = 0; i < x.rows(); ++i) x(i, k) = (u(rng) < p) + (u(rng) < p);
  }
  return x;
}

Eigen::MatrixXd pedigree_dosages(const ped::Pedigree& pedigree, std::span<const double> freqs,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const std::size_t n = pedigree.size();
  // allele (0/1 = carries allele 1) per subject, gene copy, SNP
  std::vector<std::uint8_t> genes(2 * n);
  MatrixXd x(static_cast<Index>(n), static_cast<Index>(freqs.size()));
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    for (std::size_t i : pedigree.topological_order()) {
      if (pedigree.is_founder(i)) {
        genes[2 * i] = u(rng) < freqs[k];
        genes[2 * i + 1] = u(rng) < freqs[k];
      } else {
        const std::size_t f = *pedigree.father(i), m = *pedigree.mother(i);
        genes[2 * i] = genes[2 * f + coin(rng)];
        genes[2 * i + 1] = genes[2 * m + coin(rng)];
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      x(static_cast<Index>(i), static_cast<Index>(k)) = genes[2 * i] + genes[2 * i + 1];
  }
  return x;
}

Eigen::MatrixXd haplotype_panel(std::size_t n, std::size_t m, std::size_t n_haplotypes,
                                std::uint64_t seed) {
  if (n_haplotypes == 0) fail(ErrorKind::Argument, "need at least one haplotype");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution allele(0.5);
  std::uniform_int_distribution<std::size_t> pick(0, n_haplotypes - 1);
  MatrixXd h(static_cast<Index>(n_haplotypes), static_cast<Index>(m));
  for (Index k = 0; k < h.cols(); ++k)
    for (Index c = 0; c < h.rows(); ++c) h(c, k) = allele(rng);
  MatrixXd x(static_cast<Index>(n), static_cast<Index>(m));
  for (Index i = 0; i < x.rows(); ++i)
    x.row(i) = h.row(static_cast<Index>(pick(rng))) + h.row(static_cast<Index>(pick(rng)));
  return x;
}

StructuredSample two_populations(std::size_t n, std::size_t m, double delta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  StructuredSample s;
  s.dosages.resize(static_cast<Index>(n), static_cast<Index>(m));
  s.population.resize(static_cast<Index>(n));
  for (Index i = 0; i < s.population.size(); ++i)
    s.population[i] = i < static_cast<Index>(n / 2) ? 0.0 : 1.0;
  for (Index k = 0; k < s.dosages.cols(); ++k) {
    const double p = 0.1 + 0.8 * u(rng);
    const double pk[2] = {std::clamp(p - delta / 2, 0.01, 0.99), std::clamp(p + delta / 2, 0.01, 0.99)};
    for (Index i = 0; i < s.dosages.rows(); ++i) {
      const double q = pk[static_cast<int>(s.population[i])];
      s.dosages(i, k) = (u(rng) < q) + (u(rng) < q);
    }
  }
  return s;
}

Eigen::VectorXd trait(const MatrixXd& X, const VectorXd& beta,
                      const std::vector<MatrixXd>& components, const VectorXd& sigma2,
                      std::uint64_t seed) {
  const Index n = X.rows();
  if (static_cast<Index>(components.size()) != sigma2.size())
    fail(ErrorKind::Argument, "one variance per component required");
  MatrixXd w = MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < components.size(); ++j)
    w += sigma2[static_cast<Index>(j)] * components[j];
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(w);
  const MatrixXd root =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  VectorXd z(n);
  for (Index i = 0; i < n; ++i) z[i] = normal(rng);
  VectorXd y = root * z;
  if (X.cols() > 0) y += X * beta;
  return y;
}

Eigen::MatrixXd mask_at_random(const MatrixXd& x, double rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd out = x;
  for (Index j = 0; j < out.cols(); ++j)
    for (Index i = 0; i < out.rows(); ++i)
      if (u(rng) < rate) out(i, j) = std::numeric_limits<double>::quiet_NaN();
  return out;
}

snp::PackedGenotypeMatrix pack(const MatrixXd& dosages) {
  return snp::PackedGenotypeMatrix::from_dosages(dosages);
}

}  // namespace genokit::sim
