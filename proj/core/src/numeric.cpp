#include "genokit/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "genokit/error.hpp"
#include "genokit/parallel.hpp"

namespace genokit::snp {
namespace {

constexpr std::size_t kBlockSnps = 256;

std::array<double, 4> code_values(double freq, bool defined, const NumericOptions& opt,
                                  bool& flagged) {
  flagged = false;
  std::array<double, 4> v{};
  if (!defined) {
    flagged = true;
    return v;
  }
  double center = opt.scaling == Scaling::Raw ? 0.0 : 2.0 * freq;
  double scale = 1.0;
  if (opt.scaling == Scaling::Standardized) {
    double var = 2.0 * freq * (1.0 - freq);
    if (!(var > 0.0)) {
      flagged = true;
      return v;
    }
    scale = 1.0 / std::sqrt(var);
  }
  for (int c = 0; c < 4; ++c) {
    int d = kDosageOfCode[c];
    double x = d == kMissingDosage ? 2.0 * freq : static_cast<double>(d);
    v[c] = (x - center) * scale;
  }
  return v;
}

}  // namespace

ColumnTransform ColumnTransform::from_summary(const PackedGenotypeMatrix& matrix,
                                              const Summary& summary,
                                              const NumericOptions& options) {
  std::vector<double> freqs(matrix.n_snps());
  for (std::size_t k = 0; k < freqs.size(); ++k)
    freqs[k] = summary.snps[k].freq_defined ? summary.snps[k].freq : std::nan("");
  if (options.missing == MissingPolicy::Fail) {
    for (std::size_t k = 0; k < freqs.size(); ++k)
      if (summary.snps[k].n_missing > 0)
        fail(ErrorKind::Data, "SNP " + matrix.snps()[k].id + " has " +
                                  std::to_string(summary.snps[k].n_missing) +
                                  " missing genotype(s)");
  }
  ColumnTransform t;
  t.table_.resize(freqs.size());
  t.flagged_.resize(freqs.size());
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    bool flagged = false;
    t.table_[k] = code_values(freqs[k], !std::isnan(freqs[k]), options, flagged);
    t.flagged_[k] = flagged;
  }
  t.freqs_ = std::move(freqs);
  return t;
}

ColumnTransform ColumnTransform::build(const PackedGenotypeMatrix& matrix,
                                       const NumericOptions& options) {
  return from_summary(matrix, summarize(matrix), options);
}

ColumnTransform ColumnTransform::from_frequencies(const PackedGenotypeMatrix& matrix,
                                                  std::span<const double> freqs,
                                                  const NumericOptions& options) {
  if (freqs.size() != matrix.n_snps())
    fail(ErrorKind::Argument, "frequency vector length does not match SNP count");
  Summary s;
  s.snps.resize(matrix.n_snps());
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    if (!std::isnan(freqs[k]) && (freqs[k] < 0.0 || freqs[k] > 1.0))
      fail(ErrorKind::Argument, "allele frequency outside [0,1] for SNP " + matrix.snps()[k].id);
    s.snps[k].freq = freqs[k];
    s.snps[k].freq_defined = !std::isnan(freqs[k]);
    if (options.missing == MissingPolicy::Fail) s.snps[k].n_missing = summarize_snp(matrix, k).n_missing;
  }
  return from_summary(matrix, s, options);
}

std::size_t ColumnTransform::n_flagged() const noexcept {
  return static_cast<std::size_t>(std::count(flagged_.begin(), flagged_.end(), 1));
}

void decode_block(const PackedGenotypeMatrix& matrix, const ColumnTransform& transform,
                  std::size_t first, Eigen::Ref<Eigen::MatrixXd> block) {
  const std::size_t n = matrix.n_subjects();
  const std::size_t full = n / 4;
  const auto& codes = byte_codes();
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    const std::size_t k = first + static_cast<std::size_t>(c);
    const auto& val = transform.values(k);
    auto col = matrix.column(k);
    double* out = block.col(c).data();
    for (std::size_t b = 0; b < full; ++b) {
      const auto& slot = codes[col[b]];
      out[4 * b] = val[slot[0]];
      out[4 * b + 1] = val[slot[1]];
      out[4 * b + 2] = val[slot[2]];
      out[4 * b + 3] = val[slot[3]];
    }
    for (std::size_t i = 4 * full; i < n; ++i)
      out[i] = val[codes[col[i / 4]][i % 4]];
  }
}

Eigen::MatrixXd decompress(const PackedGenotypeMatrix& matrix, const ColumnTransform& transform) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(matrix.n_subjects()),
                      static_cast<Eigen::Index>(matrix.n_snps()));
  parallel_for(0, matrix.n_snps(), kBlockSnps, [&](std::size_t lo, std::size_t hi) {
    decode_block(matrix, transform, lo,
                 out.middleCols(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo)));
  });
  return out;
}

Eigen::MatrixXd decompress(const PackedGenotypeMatrix& matrix, const NumericOptions& options) {
  return decompress(matrix, ColumnTransform::build(matrix, options));
}

Eigen::VectorXd packed_gemv(const PackedGenotypeMatrix& matrix, const ColumnTransform& transform,
                            const Eigen::Ref<const Eigen::VectorXd>& v, bool transpose) {
  const std::size_t n = matrix.n_subjects();
  const std::size_t m = matrix.n_snps();
  if (transform.n_snps() != m)
    fail(ErrorKind::Argument, "column transform does not match matrix");
  const auto& codes = byte_codes();
  const std::size_t bps = matrix.bytes_per_snp();
  const std::size_t full = n / 4;

  if (transpose) {
    if (static_cast<std::size_t>(v.size()) != n)
      fail(ErrorKind::Argument, "packed_gemv: vector length " + std::to_string(v.size()) +
                                    " != subject count " + std::to_string(n));
    Eigen::VectorXd out(static_cast<Eigen::Index>(m));
    parallel_for(0, m, kBlockSnps, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t k = lo; k < hi; ++k) {
        auto col = matrix.column(k);
        std::array<double, 4> sum{};
        for (std::size_t b = 0; b < full; ++b) {
          const auto& slot = codes[col[b]];
          const double* vb = v.data() + 4 * b;
          sum[slot[0]] += vb[0];
          sum[slot[1]] += vb[1];
          sum[slot[2]] += vb[2];
          sum[slot[3]] += vb[3];
        }
        for (std::size_t i = 4 * full; i < n; ++i) sum[codes[col[i / 4]][i % 4]] += v[static_cast<Eigen::Index>(i)];
        const auto& val = transform.values(k);
        out[static_cast<Eigen::Index>(k)] =
            val[0] * sum[0] + val[1] * sum[1] + val[2] * sum[2] + val[3] * sum[3];
      }
    });
    return out;
  }

  if (static_cast<std::size_t>(v.size()) != m)
    fail(ErrorKind::Argument, "packed_gemv: vector length " + std::to_string(v.size()) +
                                  " != SNP count " + std::to_string(m));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  // Chunks of subject bytes; each chunk sweeps every SNP in order, so the
  // summation order per subject is fixed regardless of threading.
  parallel_for(0, bps, 128, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> acc(4 * (hi - lo), 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const double vk = v[static_cast<Eigen::Index>(k)];
      if (vk == 0.0) continue;
      const auto& val = transform.values(k);
      const std::array<double, 4> t = {val[0] * vk, val[1] * vk, val[2] * vk, val[3] * vk};
      const std::uint8_t* col = matrix.column(k).data();
      for (std::size_t b = lo; b < hi; ++b) {
        const auto& slot = codes[col[b]];
        double* a = acc.data() + 4 * (b - lo);
        a[0] += t[slot[0]];
        a[1] += t[slot[1]];
        a[2] += t[slot[2]];
        a[3] += t[slot[3]];
      }
    }
    const std::size_t end = std::min(n, 4 * hi);
    for (std::size_t i = 4 * lo; i < end; ++i) out[static_cast<Eigen::Index>(i)] = acc[i - 4 * lo];
  });
  return out;
}

Eigen::MatrixXd packed_crossprod(const PackedGenotypeMatrix& matrix,
                                 const ColumnTransform& transform,
                                 std::span<const double> weights) {
  const auto n = static_cast<Eigen::Index>(matrix.n_subjects());
  const std::size_t m = matrix.n_snps();
  if (weights.size() != m) fail(ErrorKind::Argument, "weight vector length != SNP count");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd block(n, static_cast<Eigen::Index>(kBlockSnps));
  Eigen::MatrixXd weighted(n, static_cast<Eigen::Index>(kBlockSnps));
  for (std::size_t first = 0; first < m; first += kBlockSnps) {
    const auto count = static_cast<Eigen::Index>(std::min(kBlockSnps, m - first));
    auto b = block.leftCols(count);
    decode_block(matrix, transform, first, b);
    auto w = weighted.leftCols(count);
    for (Eigen::Index c = 0; c < count; ++c)
      w.col(c) = b.col(c) * weights[first + static_cast<std::size_t>(c)];
    out.noalias() += w * b.transpose();
  }
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
  return out;
}

Eigen::MatrixXd packed_gram_apply(const PackedGenotypeMatrix& matrix,
                                  const ColumnTransform& transform,
                                  const Eigen::Ref<const Eigen::MatrixXd>& q) {
  const auto n = static_cast<Eigen::Index>(matrix.n_subjects());
  const std::size_t m = matrix.n_snps();
  if (q.rows() != n) fail(ErrorKind::Argument, "packed_gram_apply: row count mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, q.cols());
  Eigen::MatrixXd block(n, static_cast<Eigen::Index>(kBlockSnps));
  for (std::size_t first = 0; first < m; first += kBlockSnps) {
    const auto count = static_cast<Eigen::Index>(std::min(kBlockSnps, m - first));
    auto b = block.leftCols(count);
    decode_block(matrix, transform, first, b);
    Eigen::MatrixXd t = b.transpose() * q;
    out.noalias() += b * t;
  }
  return out;
}

}  // namespace genokit::snp
