#include "genokit/genotypes.hpp"

#include <cmath>

#include "genokit/error.hpp"

namespace genokit::snp {

const std::array<std::array<std::uint8_t, 4>, 256>& byte_codes() {
  static const auto table = [] {
    std::array<std::array<std::uint8_t, 4>, 256> t{};
    for (int b = 0; b < 256; ++b)
      for (int j = 0; j < 4; ++j)
        t[b][j] = static_cast<std::uint8_t>((b >> (2 * j)) & 0b11);
    return t;
  }();
  return table;
}

PackedGenotypeMatrix::PackedGenotypeMatrix(std::vector<std::uint8_t> data,
                                           std::vector<SnpInfo> snps,
                                           std::vector<SubjectInfo> subjects)
    : data_(std::move(data)), snps_(std::move(snps)), subjects_(std::move(subjects)) {
  const std::size_t expected = n_snps() * bytes_per_snp();
  if (data_.size() != expected)
    fail(ErrorKind::Consistency,
         "genotype payload has " + std::to_string(data_.size()) + " bytes; " +
             std::to_string(n_snps()) + " SNPs x " + std::to_string(n_subjects()) +
             " subjects require " + std::to_string(expected));
  const std::size_t tail = n_subjects() % 4;
  if (tail != 0) {
    const auto keep = static_cast<std::uint8_t>((1u << (2 * tail)) - 1);
    for (std::size_t k = 0; k < n_snps(); ++k)
      data_[(k + 1) * bytes_per_snp() - 1] &= keep;
  }
}

PackedGenotypeMatrix PackedGenotypeMatrix::from_dosages(const Eigen::MatrixXd& dosages,
                                                        std::vector<SnpInfo> snps,
                                                        std::vector<SubjectInfo> subjects) {
  const auto n = static_cast<std::size_t>(dosages.rows());
  const auto m = static_cast<std::size_t>(dosages.cols());
  if (snps.empty()) {
    snps.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      snps[k].id = "snp" + std::to_string(k + 1);
      snps[k].position = static_cast<long long>(k + 1);
    }
  }
  if (subjects.empty()) {
    subjects.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      subjects[i].family_id = "s" + std::to_string(i + 1);
      subjects[i].individual_id = subjects[i].family_id;
    }
  }
  if (snps.size() != m || subjects.size() != n)
    fail(ErrorKind::Consistency, "metadata size does not match dosage matrix");
  const std::size_t bps = (n + 3) / 4;
  std::vector<std::uint8_t> data(m * bps, 0);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double x = dosages(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      int d = kMissingDosage;
      if (!std::isnan(x)) {
        d = static_cast<int>(std::lround(x));
        if (d < 0 || d > 2 || std::abs(x - d) > 1e-9)
          fail(ErrorKind::Argument, "dosage " + std::to_string(x) + " at (" +
                                        std::to_string(i) + "," + std::to_string(k) +
                                        ") is not 0, 1, 2 or missing");
      }
      auto code = static_cast<std::uint8_t>(code_of_dosage(d));
      data[k * bps + i / 4] |= static_cast<std::uint8_t>(code << (2 * (i % 4)));
    }
  }
  return PackedGenotypeMatrix(std::move(data), std::move(snps), std::move(subjects));
}

std::vector<std::string> PackedGenotypeMatrix::subject_ids() const {
  std::vector<std::string> ids;
  ids.reserve(subjects_.size());
  for (const auto& s : subjects_) ids.push_back(s.individual_id);
  return ids;
}

PackedGenotypeMatrix PackedGenotypeMatrix::subset(
    std::span<const std::size_t> subject_index,
    std::span<const std::size_t> snp_index) const {
  for (auto i : subject_index)
    if (i >= n_subjects()) fail(ErrorKind::Argument, "subject index out of range");
  for (auto k : snp_index)
    if (k >= n_snps()) fail(ErrorKind::Argument, "SNP index out of range");

  const std::size_t bps = (subject_index.size() + 3) / 4;
  std::vector<std::uint8_t> data(snp_index.size() * bps, 0);
  std::vector<SnpInfo> snps;
  std::vector<SubjectInfo> subjects;
  snps.reserve(snp_index.size());
  subjects.reserve(subject_index.size());
  for (auto i : subject_index) subjects.push_back(subjects_[i]);
  for (std::size_t kk = 0; kk < snp_index.size(); ++kk) {
    const std::size_t k = snp_index[kk];
    snps.push_back(snps_[k]);
    for (std::size_t ii = 0; ii < subject_index.size(); ++ii) {
      auto c = static_cast<std::uint8_t>(code(subject_index[ii], k));
      data[kk * bps + ii / 4] |= static_cast<std::uint8_t>(c << (2 * (ii % 4)));
    }
  }
  return PackedGenotypeMatrix(std::move(data), std::move(snps), std::move(subjects));
}

}  // namespace genokit::snp
