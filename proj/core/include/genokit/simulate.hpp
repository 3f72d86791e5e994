#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "genokit/genotypes.hpp"
#include "genokit/pedigree.hpp"

namespace genokit::sim {

/// n x m dosages drawn independently under Hardy-Weinberg at allele-1
/// frequencies `freqs`.
Eigen::MatrixXd hwe_dosages(std::size_t n, std::span<const double> freqs, std::uint64_t seed);

/// Founders draw alleles at `freqs`; non-founders inherit one allele from
/// each parent by Mendelian segregation, independently per SNP. Rows follow
/// pedigree order.
Eigen::MatrixXd pedigree_dosages(const ped::Pedigree& pedigree, std::span<const double> freqs,
                                 std::uint64_t seed);

/// Each subject carries two haplotypes drawn from `n_haplotypes` founder
/// haplotypes (0/1 entries at frequency 0.5), so the dosage matrix has rank
/// at most n_haplotypes.
Eigen::MatrixXd haplotype_panel(std::size_t n, std::size_t m, std::size_t n_haplotypes,
                                std::uint64_t seed);

/// Two populations of n/2 subjects whose allele frequencies at each SNP are
/// p +/- delta/2 around an ancestral p ~ U(0.1, 0.9).
struct StructuredSample {
  Eigen::MatrixXd dosages;
  Eigen::VectorXd population;  // 0 or 1
};
StructuredSample two_populations(std::size_t n, std::size_t m, double delta, std::uint64_t seed);

/// y ~ N(X beta, sum_j sigma2_j V_j).
Eigen::VectorXd trait(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                      const std::vector<Eigen::MatrixXd>& components,
                      const Eigen::VectorXd& sigma2, std::uint64_t seed);

/// Missing entries (NaN) placed uniformly at random at rate `rate`.
Eigen::MatrixXd mask_at_random(const Eigen::MatrixXd& x, double rate, std::uint64_t seed);

snp::PackedGenotypeMatrix pack(const Eigen::MatrixXd& dosages);

}  // namespace genokit::sim
