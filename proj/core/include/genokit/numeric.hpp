#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "genokit/genotypes.hpp"
#include "genokit/summary.hpp"

namespace genokit::snp {

enum class Scaling {
  Raw,           // x
  Centered,      // x - 2p
  Standardized,  // (x - 2p) / sqrt(2p(1-p))
};

enum class MissingPolicy {
  MeanImpute,  // missing entries take the value 2p before centering
  Fail,        // any missing genotype is a data error
};

struct NumericOptions {
  Scaling scaling = Scaling::Standardized;
  MissingPolicy missing = MissingPolicy::MeanImpute;
};

/// Maps each SNP's four 2-bit codes to real values. Built once per matrix and
/// shared by decompression and by every packed kernel, so all routes agree on
/// the numbers a code stands for.
class ColumnTransform {
 public:
  ColumnTransform() = default;

  /// Uses in-sample allele frequencies.
  static ColumnTransform from_summary(const PackedGenotypeMatrix& matrix,
                                      const Summary& summary,
                                      const NumericOptions& options);
  static ColumnTransform build(const PackedGenotypeMatrix& matrix,
                               const NumericOptions& options);

  /// Uses caller-supplied allele-1 frequencies (e.g. from a reference panel).
  static ColumnTransform from_frequencies(const PackedGenotypeMatrix& matrix,
                                          std::span<const double> freqs,
                                          const NumericOptions& options);

  std::size_t n_snps() const noexcept { return flagged_.size(); }

  /// Values indexed by raw code (0b00, 0b01, 0b10, 0b11).
  const std::array<double, 4>& values(std::size_t snp) const noexcept { return table_[snp]; }

  /// Column zero-filled because it is monomorphic (standardized mode) or has
  /// no called genotypes.
  bool flagged(std::size_t snp) const noexcept { return flagged_[snp] != 0; }
  std::size_t n_flagged() const noexcept;

  const std::vector<double>& frequencies() const noexcept { return freqs_; }

 private:
  std::vector<std::array<double, 4>> table_;
  std::vector<std::uint8_t> flagged_;
  std::vector<double> freqs_;
};

Eigen::MatrixXd decompress(const PackedGenotypeMatrix& matrix, const ColumnTransform& transform);
Eigen::MatrixXd decompress(const PackedGenotypeMatrix& matrix, const NumericOptions& options);

/// Decodes SNPs [first, first + block.cols()) into `block` (n x count).
void decode_block(const PackedGenotypeMatrix& matrix, const ColumnTransform& transform,
                  std::size_t first, Eigen::Ref<Eigen::MatrixXd> block);

/// y = A v (transpose = false, v has n_snps entries) or y = A^T v
/// (transpose = true, v has n_subjects entries), where A is the transformed
/// genotype matrix. Works on the packed bytes directly.
Eigen::VectorXd packed_gemv(const PackedGenotypeMatrix& matrix, const ColumnTransform& transform,
                            const Eigen::Ref<const Eigen::VectorXd>& v, bool transpose);

/// sum_k w_k a_k a_k^T over SNP columns a_k of the transformed matrix,
/// decoding a fixed-size block of columns at a time. Deterministic for any
/// thread count.
Eigen::MatrixXd packed_crossprod(const PackedGenotypeMatrix& matrix,
                                 const ColumnTransform& transform,
                                 std::span<const double> weights);

/// A A^T Q for the transformed matrix A, one decoded block at a time.
Eigen::MatrixXd packed_gram_apply(const PackedGenotypeMatrix& matrix,
                                  const ColumnTransform& transform,
                                  const Eigen::Ref<const Eigen::MatrixXd>& q);

}  // namespace genokit::snp
