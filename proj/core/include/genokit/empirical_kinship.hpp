#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "genokit/genotypes.hpp"
#include "genokit/kinship.hpp"

namespace genokit::kin {

/// Correlation matrix of standardized SNP dosage columns.
struct LdMatrix {
  Eigen::MatrixXd r;

  /// Pearson correlations of the columns of a subjects x SNPs matrix.
  static LdMatrix from_dosages(const Eigen::MatrixXd& dosages);
};

struct EstimatorOptions {
  /// Allele-1 frequencies to use instead of in-sample estimates.
  std::optional<std::vector<double>> frequencies;
};

/// s_ij = 1/K sum_k (x_ik - 2p_k)(x_jk - 2p_k) / (4 p_k (1 - p_k)) over the K
/// polymorphic SNPs, missing genotypes mean-imputed. With this denominator the
/// estimate targets phi itself: off-diagonals phi_ij, diagonals (1 + f)/2.
KinshipMatrix grm(const snp::PackedGenotypeMatrix& matrix, const EstimatorOptions& options = {});

/// sum_k (x_ik - 2p_k)(x_jk - 2p_k) / sum_k 4 p_k (1 - p_k)
KinshipMatrix robust_grm(const snp::PackedGenotypeMatrix& matrix,
                         const EstimatorOptions& options = {});

/// Moment estimator matching observed allele sharing to its expectation
/// under unrelatedness:
///   [ 1/K sum_k (x_ik x_jk + (2 - x_ik)(2 - x_jk)) / 4 - Q ] / (1 - Q),
///   Q = 1/K sum_k (p_k^2 + (1 - p_k)^2).
KinshipMatrix mom_kinship(const snp::PackedGenotypeMatrix& matrix,
                          const EstimatorOptions& options = {});

/// GRM on real-valued dosages (e.g. simulated continuous dosages) with known
/// allele frequencies; same formula as grm().
Eigen::MatrixXd grm_from_dosages(const Eigen::MatrixXd& dosages, std::span<const double> freqs);

/// Approximation to E ||S - E S||_F^2 for the GRM:
///   ||R||_F^2 (||Phi||_F^2 + tr(Phi)^2) / K^2.
double grm_variance_approx(const Eigen::MatrixXd& phi, const LdMatrix& ld, std::size_t n_snps);

struct KinshipDiscrepancy {
  std::size_t i = 0, j = 0;
  std::string id1, id2;
  double theoretical = 0.0;
  double empirical = 0.0;
  /// sqrt(K - 3) [atanh(c_emp) - atanh(c_theo)], c = m_ij / sqrt(m_ii m_jj)
  double z = 0.0;
  bool infinite = false;  // some |c| >= 1
};

struct KinshipComparison {
  /// Sorted: infinite pairs first, then by |z| descending; ties by (i, j).
  std::vector<KinshipDiscrepancy> pairs;
  std::vector<std::string> warnings;  // pairs skipped for a non-positive diagonal
};

/// Fisher-transform comparison of every off-diagonal pair. Both matrices are
/// normalized to correlation form first, so their scale conventions cancel.
/// Empirical rows are aligned to the theoretical ids.
KinshipComparison compare_kinship(const KinshipMatrix& theoretical, const KinshipMatrix& empirical,
                                  std::size_t n_snps);

void write_discrepancy_tsv(const KinshipComparison& comparison, const std::string& path);

}  // namespace genokit::kin
