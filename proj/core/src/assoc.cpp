#include "genokit/assoc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "genokit/error.hpp"
#include "genokit/numeric.hpp"
#include "genokit/parallel.hpp"
#include "genokit/stats.hpp"
#include "genokit/summary.hpp"
#include "genokit/table.hpp"

namespace genokit::assoc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr std::size_t kScanBlock = 256;

/// Numeric chromosome names first, in numeric order, then the rest by name.
bool chromosome_less(const std::string& a, const std::string& b) {
  auto number = [](const std::string& s) -> long {
    if (s.empty() || !std::all_of(s.begin(), s.end(), ::isdigit)) return -1;
    return std::stol(s);
  };
  const long na = number(a), nb = number(b);
  if (na >= 0 && nb >= 0) return na < nb;
  if ((na >= 0) != (nb >= 0)) return na >= 0;
  return a < b;
}

}  // namespace

std::size_t ScanResult::n_tested() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const ScanRow& r) { return !r.skipped; }));
}

vc::VcEstimate iid_fit(const VectorXd& y, const MatrixXd& X) {
  const double n = static_cast<double>(y.size());
  vc::VcEstimate est;
  est.labels = {"residual"};
  VectorXd r = y;
  if (X.cols() > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(X);
    if (qr.rank() < X.cols()) fail(ErrorKind::Model, "fixed-effect design is rank deficient");
    est.beta = qr.solve(y);
    r -= X * est.beta;
  }
  const double s2 = r.squaredNorm() / n;
  if (!(s2 > 0.0)) fail(ErrorKind::Numeric, "residual variance is zero");
  est.sigma2 = VectorXd::Constant(1, s2);
  est.loglik = -0.5 * n * (std::log(2.0 * std::numbers::pi * s2) + 1.0);
  est.trace = {est.loglik};
  est.converged = true;
  return est;
}

ScanResult gwas_scan(const snp::PackedGenotypeMatrix& genotypes, const VectorXd& y,
                     const MatrixXd& covariates, const std::optional<MatrixXd>& kinship,
                     const ScanOptions& options) {
  const Index n = static_cast<Index>(genotypes.n_subjects());
  if (y.size() != n) fail(ErrorKind::Argument, "phenotype length != genotyped subjects");
  if (covariates.rows() != n) fail(ErrorKind::Argument, "covariate rows != genotyped subjects");
  if (!y.allFinite() || !covariates.allFinite())
    fail(ErrorKind::Data, "phenotype or covariates contain missing values");
  if (!(options.refine_threshold >= 0.0 && options.refine_threshold <= 1.0))
    fail(ErrorKind::Argument, "refine threshold must lie in [0, 1]");

  ScanResult result;
  std::optional<vc::TwoComponentSpectral> cache;
  std::optional<vc::ScoreTester> tester;
  if (kinship) {
    result.two_component = true;
    cache = vc::TwoComponentSpectral::build(*kinship, y, covariates);
    result.null_fit = vc::spectral_fit(*cache, options.mm);
    tester = vc::ScoreTester::spectral(*cache, result.null_fit);
  } else {
    result.null_fit = iid_fit(y, covariates);
    tester = vc::ScoreTester::iid(y, covariates, result.null_fit.sigma2[0], result.null_fit.beta);
  }

  const auto summary = snp::summarize(genotypes);
  const auto standardized = snp::ColumnTransform::from_summary(
      genotypes, summary, {snp::Scaling::Standardized, snp::MissingPolicy::MeanImpute});
  const auto centered = snp::ColumnTransform::from_summary(
      genotypes, summary, {snp::Scaling::Centered, snp::MissingPolicy::MeanImpute});

  const std::size_t m = genotypes.n_snps();
  std::vector<ScanRow> rows(m);
  parallel_for(0, m, kScanBlock, [&](std::size_t lo, std::size_t hi) {
    MatrixXd block(n, static_cast<Index>(hi - lo));
    snp::decode_block(genotypes, standardized, lo, block);
    const auto scores = tester->test_columns(block);
    for (std::size_t k = lo; k < hi; ++k) {
      ScanRow& row = rows[k];
      const auto& info = genotypes.snps()[k];
      const auto& s = summary.snps[k];
      row.index = k;
      row.id = info.id;
      row.chromosome = info.chromosome;
      row.position = info.position;
      row.freq = s.freq;
      row.maf = s.maf;
      if (standardized.flagged(k)) {
        row.skipped = true;
        row.skip_reason = s.freq_defined ? "monomorphic" : "no called genotypes";
        continue;
      }
      const auto& sc = scores[k - lo];
      if (sc.degenerate) {
        row.skipped = true;
        row.skip_reason = "collinear with covariates";
        continue;
      }
      row.statistic = sc.statistic;
      row.p_value = sc.p_value;
    }
  });

  std::vector<std::size_t> refine;
  for (std::size_t k = 0; k < m; ++k)
    if (!rows[k].skipped && rows[k].p_value < options.refine_threshold) refine.push_back(k);
  parallel_for(0, refine.size(), 1, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      ScanRow& row = rows[refine[t]];
      MatrixXd g(n, 1);
      snp::decode_block(genotypes, centered, row.index, g);
      vc::VcEstimate alt;
      if (cache) {
        vc::MmOptions mm = options.mm;
        mm.init = result.null_fit.sigma2;
        alt = vc::spectral_fit(cache->with_covariate(g.col(0)), mm);
      } else {
        MatrixXd x(n, covariates.cols() + 1);
        x << covariates, g;
        alt = iid_fit(y, x);
      }
      const auto test = vc::lrt(result.null_fit, alt);
      row.refined = true;
      row.lrt_statistic = test.statistic;
      row.lrt_p_value = test.p_value;
      row.effect = alt.beta[alt.beta.size() - 1];
    }
  });

  std::vector<double> tested;
  for (const auto& r : rows)
    if (!r.skipped) tested.push_back(r.statistic);
  if (!tested.empty()) {
    const auto mid = tested.begin() + static_cast<std::ptrdiff_t>(tested.size() / 2);
    std::nth_element(tested.begin(), mid, tested.end());
    double median = *mid;
    if (tested.size() % 2 == 0) median = 0.5 * (median + *std::max_element(tested.begin(), mid));
    result.lambda_gc = median / stats::kChi2MedianDf1;
  }

  std::stable_sort(rows.begin(), rows.end(), [](const ScanRow& a, const ScanRow& b) {
    if (a.chromosome != b.chromosome) return chromosome_less(a.chromosome, b.chromosome);
    return a.position < b.position;
  });
  result.rows = std::move(rows);
  return result;
}

Augmented add_pc_covariates(const snp::PackedGenotypeMatrix& genotypes,
                            const MatrixXd& covariates, int n_pcs,
                            const snp::PcaOptions& options) {
  if (n_pcs < 0) fail(ErrorKind::Argument, "number of PCs must be >= 0");
  Augmented out;
  out.covariates = covariates;
  if (n_pcs == 0) return out;
  if (covariates.rows() != static_cast<Index>(genotypes.n_subjects()))
    fail(ErrorKind::Argument, "covariate rows != genotyped subjects");
  const auto pcs = snp::principal_components(genotypes, n_pcs, options);
  for (int j = 0; j < n_pcs; ++j) {
    const VectorXd pc = pcs.scores.col(j);
    VectorXd resid = pc;
    if (out.covariates.cols() > 0) {
      Eigen::ColPivHouseholderQR<MatrixXd> qr(out.covariates);
      resid = pc - out.covariates * qr.solve(pc);
    }
    if (!(pc.norm() > 0.0) || resid.norm() <= 1e-8 * pc.norm()) {
      out.warnings.push_back("PC" + std::to_string(j + 1) +
                             " is collinear with existing covariates; dropped");
      continue;
    }
    out.covariates.conservativeResize(Eigen::NoChange, out.covariates.cols() + 1);
    out.covariates.col(out.covariates.cols() - 1) = pc;
    out.kept_pcs.push_back(j + 1);
  }
  return out;
}

double neg_log10(double p) {
  if (!(p > 0.0)) return 350.0;
  return -std::log10(p);
}

void manhattan_table(const ScanResult& result, const std::string& path) {
  if (result.n_tested() == 0) fail(ErrorKind::Argument, "scan has no tested SNPs");
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << "chromosome\tposition\tsnp\tneg_log10_p\n";
  for (const auto& r : result.rows)
    if (!r.skipped)
      out << r.chromosome << '\t' << r.position << '\t' << r.id << '\t'
          << format_double(neg_log10(r.p_value)) << '\n';
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

void write_scan_tsv(const ScanResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << "snp\tchromosome\tposition\tfreq\tmaf\tscore_stat\tscore_p\tlrt_stat\tlrt_p\teffect\t"
         "status\n";
  const std::string na = "NA";
  for (const auto& r : result.rows) {
    out << r.id << '\t' << r.chromosome << '\t' << r.position << '\t' << format_double(r.freq)
        << '\t' << format_double(r.maf) << '\t';
    if (r.skipped) {
      out << na << '\t' << na << '\t' << na << '\t' << na << '\t' << na << "\tskipped:"
          << r.skip_reason << '\n';
      continue;
    }
    out << format_double(r.statistic) << '\t' << format_double(r.p_value) << '\t';
    if (r.refined)
      out << format_double(r.lrt_statistic) << '\t' << format_double(r.lrt_p_value) << '\t'
          << format_double(r.effect) << "\trefined\n";
    else
      out << na << '\t' << na << '\t' << na << "\ttested\n";
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

}  // namespace genokit::assoc
