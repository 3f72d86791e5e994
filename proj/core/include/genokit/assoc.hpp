#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "genokit/genotypes.hpp"
#include "genokit/pca.hpp"
#include "genokit/vc.hpp"

namespace genokit::assoc {

struct ScanOptions {
  /// SNPs with score p below this are re-tested by LRT; 0 disables refinement.
  double refine_threshold = 5e-5;
  vc::MmOptions mm{};
};

struct ScanRow {
  std::size_t index = 0;  // SNP column in the input matrix
  std::string id, chromosome;
  long long position = 0;
  double freq = 0.0;  // allele-1 frequency among called genotypes
  double maf = 0.0;
  double statistic = 0.0;
  double p_value = 1.0;
  bool skipped = false;
  std::string skip_reason;
  bool refined = false;
  double lrt_statistic = 0.0;
  double lrt_p_value = 1.0;
  double effect = 0.0;  // per allele-1 copy, from the alternative fit
};

struct ScanResult {
  std::vector<ScanRow> rows;  // chromosome order, then position
  vc::VcEstimate null_fit;
  bool two_component = false;
  double lambda_gc = 0.0;  // median score statistic / median of chi2(1)
  std::size_t n_tested() const;
};

/// Score test per SNP against one null fit, streaming packed columns in
/// blocks; SNPs passing `refine_threshold` get an LRT with the centered dosage
/// as an extra fixed effect. With `kinship`, the null is
/// sigma2_a K + sigma2_e I fitted in its eigenbasis; otherwise iid. Inputs
/// must already be aligned to the matrix's subjects and be finite.
ScanResult gwas_scan(const snp::PackedGenotypeMatrix& genotypes, const Eigen::VectorXd& y,
                     const Eigen::MatrixXd& covariates,
                     const std::optional<Eigen::MatrixXd>& kinship,
                     const ScanOptions& options = {});

/// Ordinary least squares null as a one-component fit labelled "residual"
/// (ML variance RSS / n).
vc::VcEstimate iid_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& X);

struct Augmented {
  Eigen::MatrixXd covariates;
  std::vector<std::string> warnings;
  std::vector<int> kept_pcs;  // 1-based PC numbers appended
};

/// Appends the top principal-component scores, skipping any PC that is
/// (numerically) a linear combination of the columns already present.
Augmented add_pc_covariates(const snp::PackedGenotypeMatrix& genotypes,
                            const Eigen::MatrixXd& covariates, int n_pcs,
                            const snp::PcaOptions& options = {});

/// -log10 p, with p = 0 mapped to 350.
double neg_log10(double p);

/// chromosome, position, snp, -log10 p for every tested SNP.
void manhattan_table(const ScanResult& result, const std::string& path);
void write_scan_tsv(const ScanResult& result, const std::string& path);

}  // namespace genokit::assoc
