#pragma once

#include <cstddef>
#include <vector>

#include "genokit/genotypes.hpp"

namespace genokit::snp {

/// Genotype counts and allele-1 frequency for one SNP.
struct SnpSummary {
  std::size_t n0 = 0;  // dosage 0 (homozygous allele 2)
  std::size_t n1 = 0;  // heterozygous
  std::size_t n2 = 0;  // dosage 2 (homozygous allele 1)
  std::size_t n_missing = 0;
  /// (n1 + 2 n2) / (2 (n0 + n1 + n2)); NaN when every genotype is missing.
  double freq = 0.0;
  bool freq_defined = false;
  double missing_rate = 0.0;
  double maf = 0.0;  // min(freq, 1 - freq); 0 when freq is undefined

  std::size_t n_called() const noexcept { return n0 + n1 + n2; }
};

struct Summary {
  std::vector<SnpSummary> snps;
  std::vector<double> subject_missing_rate;
};

SnpSummary summarize_snp(const PackedGenotypeMatrix& matrix, std::size_t snp);
Summary summarize(const PackedGenotypeMatrix& matrix);

struct FilterThresholds {
  double min_snp_success = 0.0;
  double min_subject_success = 0.0;
  double min_maf = 0.0;
};

struct FilterResult {
  std::vector<std::size_t> kept_snps;      // indices into the input
  std::vector<std::size_t> kept_subjects;  // indices into the input
  PackedGenotypeMatrix matrix;
  int passes = 0;
};

/// Alternates the subject filter and the SNP filter, recomputing rates on the
/// surviving data each pass, until neither removes anything.
FilterResult filter(const PackedGenotypeMatrix& matrix, const FilterThresholds& thresholds);

}  // namespace genokit::snp
