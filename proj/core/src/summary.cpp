#include "genokit/summary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "genokit/error.hpp"
#include "genokit/parallel.hpp"

namespace genokit::snp {
namespace {

// For byte value b: how many of its four slots hold each code.
const std::array<std::array<std::uint8_t, 4>, 256>& byte_code_counts() {
  static const auto table = [] {
    std::array<std::array<std::uint8_t, 4>, 256> t{};
    const auto& codes = byte_codes();
    for (int b = 0; b < 256; ++b)
      for (int j = 0; j < 4; ++j) ++t[b][codes[b][j]];
    return t;
  }();
  return table;
}

}  // namespace

SnpSummary summarize_snp(const PackedGenotypeMatrix& matrix, std::size_t snp) {
  const auto& counts = byte_code_counts();
  std::array<std::size_t, 4> c{};
  for (std::uint8_t b : matrix.column(snp))
    for (int j = 0; j < 4; ++j) c[j] += counts[b][j];
  // pad slots are 0b00 by invariant
  c[static_cast<int>(Code::HomAllele1)] -= matrix.bytes_per_snp() * 4 - matrix.n_subjects();

  SnpSummary s;
  s.n2 = c[static_cast<int>(Code::HomAllele1)];
  s.n1 = c[static_cast<int>(Code::Het)];
  s.n0 = c[static_cast<int>(Code::HomAllele2)];
  s.n_missing = c[static_cast<int>(Code::Missing)];
  const std::size_t n = matrix.n_subjects();
  s.missing_rate = n == 0 ? 0.0 : static_cast<double>(s.n_missing) / static_cast<double>(n);
  if (s.n_called() > 0) {
    s.freq_defined = true;
    s.freq = static_cast<double>(s.n1 + 2 * s.n2) / (2.0 * static_cast<double>(s.n_called()));
    s.maf = std::min(s.freq, 1.0 - s.freq);
  } else {
    s.freq = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

Summary summarize(const PackedGenotypeMatrix& matrix) {
  Summary out;
  const std::size_t m = matrix.n_snps();
  const std::size_t n = matrix.n_subjects();
  out.snps.resize(m);
  parallel_for(0, m, 256, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) out.snps[k] = summarize_snp(matrix, k);
  });

  std::vector<std::size_t> missing(n, 0);
  const std::size_t bps = matrix.bytes_per_snp();
  const auto& codes = byte_codes();
  parallel_for(0, bps, 64, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = 0; k < m; ++k) {
      auto col = matrix.column(k);
      for (std::size_t b = lo; b < hi; ++b) {
        const auto& slot = codes[col[b]];
        for (std::size_t j = 0; j < 4; ++j)
          if (slot[j] == static_cast<std::uint8_t>(Code::Missing)) ++missing[4 * b + j];
      }
    }
  });
  out.subject_missing_rate.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.subject_missing_rate[i] =
        m == 0 ? 0.0 : static_cast<double>(missing[i]) / static_cast<double>(m);
  return out;
}

FilterResult filter(const PackedGenotypeMatrix& matrix, const FilterThresholds& t) {
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
      fail(ErrorKind::Argument, std::string(name) + " must lie in [0,1]");
  };
  check(t.min_snp_success, "min_snp_success");
  check(t.min_subject_success, "min_subject_success");
  check(t.min_maf, "min_maf");

  FilterResult r;
  r.kept_subjects.resize(matrix.n_subjects());
  r.kept_snps.resize(matrix.n_snps());
  for (std::size_t i = 0; i < r.kept_subjects.size(); ++i) r.kept_subjects[i] = i;
  for (std::size_t k = 0; k < r.kept_snps.size(); ++k) r.kept_snps[k] = k;
  r.matrix = matrix;

  for (;;) {
    ++r.passes;
    bool changed = false;

    Summary s = summarize(r.matrix);
    std::vector<std::size_t> keep_local, keep_global;
    for (std::size_t i = 0; i < r.kept_subjects.size(); ++i) {
      if (1.0 - s.subject_missing_rate[i] >= t.min_subject_success) {
        keep_local.push_back(i);
        keep_global.push_back(r.kept_subjects[i]);
      }
    }
    if (keep_local.size() != r.kept_subjects.size()) {
      changed = true;
      std::vector<std::size_t> all_snps(r.kept_snps.size());
      for (std::size_t k = 0; k < all_snps.size(); ++k) all_snps[k] = k;
      r.matrix = r.matrix.subset(keep_local, all_snps);
      r.kept_subjects = std::move(keep_global);
      s = summarize(r.matrix);
    }

    keep_local.clear();
    keep_global.clear();
    for (std::size_t k = 0; k < r.kept_snps.size(); ++k) {
      const auto& snp = s.snps[k];
      if (1.0 - snp.missing_rate >= t.min_snp_success && snp.maf >= t.min_maf) {
        keep_local.push_back(k);
        keep_global.push_back(r.kept_snps[k]);
      }
    }
    if (keep_local.size() != r.kept_snps.size()) {
      changed = true;
      std::vector<std::size_t> all_subjects(r.kept_subjects.size());
      for (std::size_t i = 0; i < all_subjects.size(); ++i) all_subjects[i] = i;
      r.matrix = r.matrix.subset(all_subjects, keep_local);
      r.kept_snps = std::move(keep_global);
    }
    if (!changed) break;
  }
  return r;
}

}  // namespace genokit::snp
