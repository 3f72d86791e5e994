#include "genokit/empirical_kinship.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "genokit/error.hpp"
#include "genokit/numeric.hpp"
#include "genokit/summary.hpp"
#include "genokit/table.hpp"

namespace genokit::kin {
namespace {

using snp::ColumnTransform;
using snp::MissingPolicy;
using snp::NumericOptions;
using snp::PackedGenotypeMatrix;
using snp::Scaling;

ColumnTransform make_transform(const PackedGenotypeMatrix& matrix, const EstimatorOptions& options,
                               Scaling scaling) {
  NumericOptions opt{scaling, MissingPolicy::MeanImpute};
  if (options.frequencies) return ColumnTransform::from_frequencies(matrix, *options.frequencies, opt);
  return ColumnTransform::build(matrix, opt);
}

bool polymorphic(double p) { return !std::isnan(p) && p > 0.0 && p < 1.0; }

std::size_t count_polymorphic(const ColumnTransform& t) {
  std::size_t k = 0;
  for (double p : t.frequencies()) k += polymorphic(p);
  if (k == 0) fail(ErrorKind::Data, "no polymorphic SNPs available for kinship estimation");
  return k;
}

}  // namespace

LdMatrix LdMatrix::from_dosages(const Eigen::MatrixXd& dosages) {
  Eigen::MatrixXd centered = dosages.rowwise() - dosages.colwise().mean();
  Eigen::VectorXd norms = centered.colwise().norm();
  for (Eigen::Index k = 0; k < centered.cols(); ++k)
    if (norms[k] > 0) centered.col(k) /= norms[k];
  LdMatrix ld{centered.transpose() * centered};
  ld.r.diagonal().setOnes();
  return ld;
}

KinshipMatrix grm(const PackedGenotypeMatrix& matrix, const EstimatorOptions& options) {
  const auto t = make_transform(matrix, options, Scaling::Centered);
  const double K = static_cast<double>(count_polymorphic(t));
  std::vector<double> w(matrix.n_snps(), 0.0);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double p = t.frequencies()[k];
    if (polymorphic(p)) w[k] = 1.0 / (4.0 * p * (1.0 - p) * K);
  }
  return {snp::packed_crossprod(matrix, t, w), Estimator::Grm, matrix.subject_ids()};
}

KinshipMatrix robust_grm(const PackedGenotypeMatrix& matrix, const EstimatorOptions& options) {
  const auto t = make_transform(matrix, options, Scaling::Centered);
  count_polymorphic(t);
  double denom = 0.0;
  std::vector<double> w(matrix.n_snps(), 0.0);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double p = t.frequencies()[k];
    if (!polymorphic(p)) continue;
    denom += 4.0 * p * (1.0 - p);
    w[k] = 1.0;
  }
  for (double& x : w) x /= denom;
  return {snp::packed_crossprod(matrix, t, w), Estimator::Robust, matrix.subject_ids()};
}

KinshipMatrix mom_kinship(const PackedGenotypeMatrix& matrix, const EstimatorOptions& options) {
  const auto t = make_transform(matrix, options, Scaling::Raw);
  const double K = static_cast<double>(count_polymorphic(t));
  std::vector<double> w(matrix.n_snps(), 0.0);
  double q = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double p = t.frequencies()[k];
    if (!polymorphic(p)) continue;
    w[k] = 1.0;
    q += p * p + (1.0 - p) * (1.0 - p);
  }
  q /= K;
  // sum_k (x_i x_j + (2 - x_i)(2 - x_j)) / 4 = sum_k ((x_i - 1)(x_j - 1) + 1) / 2
  const Eigen::MatrixXd cross = snp::packed_crossprod(matrix, t, w);
  Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  const Eigen::VectorXd rows = snp::packed_gemv(matrix, t, wv, false);
  const auto n = cross.rows();
  Eigen::MatrixXd phi(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double shared = cross(i, j) - rows[i] - rows[j] + K;
      const double match = (shared + K) / (2.0 * K);
      phi(i, j) = (match - q) / (1.0 - q);
    }
  return {std::move(phi), Estimator::Mom, matrix.subject_ids()};
}

Eigen::MatrixXd grm_from_dosages(const Eigen::MatrixXd& dosages, std::span<const double> freqs) {
  if (static_cast<Eigen::Index>(freqs.size()) != dosages.cols())
    fail(ErrorKind::Argument, "frequency vector length != SNP count");
  Eigen::MatrixXd z = dosages;
  std::size_t used = 0;
  for (Eigen::Index k = 0; k < z.cols(); ++k) {
    const double p = freqs[static_cast<std::size_t>(k)];
    if (!polymorphic(p)) {
      z.col(k).setZero();
      continue;
    }
    ++used;
    z.col(k) = (z.col(k).array() - 2.0 * p) / std::sqrt(4.0 * p * (1.0 - p));
  }
  if (used == 0) fail(ErrorKind::Data, "no polymorphic SNPs available for kinship estimation");
  return z * z.transpose() / static_cast<double>(used);
}

double grm_variance_approx(const Eigen::MatrixXd& phi, const LdMatrix& ld, std::size_t n_snps) {
  if (phi.rows() != phi.cols()) fail(ErrorKind::Argument, "kinship matrix must be square");
  if (ld.r.rows() != ld.r.cols() || static_cast<std::size_t>(ld.r.rows()) != n_snps)
    fail(ErrorKind::Argument, "LD matrix must be K x K with K = " + std::to_string(n_snps));
  const double K = static_cast<double>(n_snps);
  const double tr = phi.trace();
  return ld.r.squaredNorm() * (phi.squaredNorm() + tr * tr) / (K * K);
}

KinshipComparison compare_kinship(const KinshipMatrix& theoretical, const KinshipMatrix& empirical,
                                  std::size_t n_snps) {
  if (n_snps <= 3) fail(ErrorKind::Argument, "compare_kinship needs K > 3 SNPs");
  if (theoretical.values.rows() != theoretical.values.cols() ||
      static_cast<std::size_t>(theoretical.size()) != theoretical.ids.size())
    fail(ErrorKind::Argument, "theoretical kinship matrix is malformed");
  const KinshipMatrix emp = empirical.ids == theoretical.ids
                                ? empirical
                                : align_kinship(empirical, theoretical.ids);
  const double root = std::sqrt(static_cast<double>(n_snps) - 3.0);
  const double inf = std::numeric_limits<double>::infinity();
  auto fisher = [&](double c) {
    if (c >= 1.0) return inf;
    if (c <= -1.0) return -inf;
    return std::atanh(c);
  };

  KinshipComparison out;
  const auto n = theoretical.size();
  const auto& T = theoretical.values;
  const auto& E = emp.values;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& id1 = theoretical.ids[static_cast<std::size_t>(i)];
      const auto& id2 = theoretical.ids[static_cast<std::size_t>(j)];
      if (!(T(i, i) > 0 && T(j, j) > 0 && E(i, i) > 0 && E(j, j) > 0)) {
        out.warnings.push_back("pair " + id1 + "," + id2 +
                               " skipped: non-positive diagonal, correlation undefined");
        continue;
      }
      const double ct = T(i, j) / std::sqrt(T(i, i) * T(j, j));
      const double ce = E(i, j) / std::sqrt(E(i, i) * E(j, j));
      KinshipDiscrepancy d;
      d.i = static_cast<std::size_t>(i);
      d.j = static_cast<std::size_t>(j);
      d.id1 = id1;
      d.id2 = id2;
      d.theoretical = T(i, j);
      d.empirical = E(i, j);
      d.infinite = std::abs(ct) >= 1.0 || std::abs(ce) >= 1.0;
      d.z = root * (fisher(ce) - fisher(ct));
      out.pairs.push_back(std::move(d));
    }
  std::stable_sort(out.pairs.begin(), out.pairs.end(),
                   [](const KinshipDiscrepancy& a, const KinshipDiscrepancy& b) {
                     if (a.infinite != b.infinite) return a.infinite;
                     if (a.infinite) return false;
                     return std::abs(a.z) > std::abs(b.z);
                   });
  return out;
}

void write_discrepancy_tsv(const KinshipComparison& comparison, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << "id1\tid2\ttheoretical\tempirical\tz\n";
  for (const auto& d : comparison.pairs)
    out << d.id1 << '\t' << d.id2 << '\t' << format_double(d.theoretical) << '\t'
        << format_double(d.empirical) << '\t' << format_double(d.z) << '\n';
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

}  // namespace genokit::kin
