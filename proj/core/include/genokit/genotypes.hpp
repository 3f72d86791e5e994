#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace genokit::snp {

/// Two-bit genotype codes as laid out in a SNP-major PLINK .bed file.
///
/// Dosage convention used throughout genokit: a dosage counts copies of
/// allele 1, the first allele column of the .bim record (the "reference"
/// allele). So 0b00 (homozygous allele 1) is dosage 2 and 0b11 is dosage 0.
enum class Code : std::uint8_t {
  HomAllele1 = 0b00,
  Missing = 0b01,
  Het = 0b10,
  HomAllele2 = 0b11,
};

inline constexpr int kMissingDosage = -1;

/// Dosage for each raw code value 0..3; -1 marks missing.
inline constexpr std::array<int, 4> kDosageOfCode = {2, kMissingDosage, 1, 0};

constexpr Code code_of_dosage(int dosage) {
  switch (dosage) {
    case 2: return Code::HomAllele1;
    case 1: return Code::Het;
    case 0: return Code::HomAllele2;
    default: return Code::Missing;
  }
}

struct SnpInfo {
  std::string chromosome = "1";
  std::string id;
  double genetic_distance = 0.0;
  long long position = 0;
  std::string allele1 = "A";
  std::string allele2 = "B";

  bool operator==(const SnpInfo&) const = default;
};

struct SubjectInfo {
  std::string family_id;
  std::string individual_id;
  std::string father_id = "0";
  std::string mother_id = "0";
  int sex = 0;
  std::string phenotype = "-9";

  bool operator==(const SubjectInfo&) const = default;
};

/// n subjects x m SNPs of biallelic genotypes, 2 bits each, SNP-major.
/// Each SNP occupies ceil(n/4) bytes; subject i sits in byte i/4 at bit
/// offset 2*(i%4). Pad bits past the last subject are always 0b00.
/// Immutable once built; concurrent reads are safe.
class PackedGenotypeMatrix {
 public:
  PackedGenotypeMatrix() = default;

  /// Takes ownership of a packed buffer. Throws a consistency error when the
  /// buffer or metadata sizes disagree with the subject/SNP counts. Pad bits
  /// in the buffer are cleared.
  PackedGenotypeMatrix(std::vector<std::uint8_t> data,
                       std::vector<SnpInfo> snps,
                       std::vector<SubjectInfo> subjects);

  /// Packs a dense subjects x SNPs dosage matrix (entries 0/1/2, NaN for
  /// missing). Missing metadata is filled with generated ids.
  static PackedGenotypeMatrix from_dosages(const Eigen::MatrixXd& dosages,
                                           std::vector<SnpInfo> snps = {},
                                           std::vector<SubjectInfo> subjects = {});

  std::size_t n_subjects() const noexcept { return subjects_.size(); }
  std::size_t n_snps() const noexcept { return snps_.size(); }
  std::size_t bytes_per_snp() const noexcept { return (n_subjects() + 3) / 4; }

  std::span<const std::uint8_t> column(std::size_t snp) const noexcept {
    return {data_.data() + snp * bytes_per_snp(), bytes_per_snp()};
  }

  Code code(std::size_t subject, std::size_t snp) const noexcept {
    std::uint8_t byte = data_[snp * bytes_per_snp() + subject / 4];
    return static_cast<Code>((byte >> (2 * (subject % 4))) & 0b11);
  }

  /// 0, 1, 2, or kMissingDosage.
  int dosage(std::size_t subject, std::size_t snp) const noexcept {
    return kDosageOfCode[static_cast<std::size_t>(code(subject, snp))];
  }

  const std::vector<std::uint8_t>& data() const noexcept { return data_; }
  const std::vector<SnpInfo>& snps() const noexcept { return snps_; }
  const std::vector<SubjectInfo>& subjects() const noexcept { return subjects_; }

  std::vector<std::string> subject_ids() const;

  /// Repacks the given subjects and SNPs (in the given order).
  PackedGenotypeMatrix subset(std::span<const std::size_t> subject_index,
                              std::span<const std::size_t> snp_index) const;

  bool operator==(const PackedGenotypeMatrix&) const = default;

 private:
  std::vector<std::uint8_t> data_;
  std::vector<SnpInfo> snps_;
  std::vector<SubjectInfo> subjects_;
};

/// Per-byte decode table: for byte value b, entry [b][j] is the code of the
/// j-th subject packed in b.
const std::array<std::array<std::uint8_t, 4>, 256>& byte_codes();

}  // namespace genokit::snp
