#include "genokit/impute.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "genokit/error.hpp"
#include "genokit/parallel.hpp"
#include "genokit/table.hpp"

namespace genokit::mc {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using snp::PackedGenotypeMatrix;

std::string describe(std::size_t t, const WindowSpan& w) {
  return "window " + std::to_string(t) + " (SNPs " + std::to_string(w.first) + "-" +
         std::to_string(w.last) + ")";
}

void load_rows(const PackedGenotypeMatrix& g, std::size_t first, std::size_t last, Index row0,
               MatrixXd& x) {
  for (std::size_t k = first; k < last; ++k)
    for (std::size_t i = 0; i < g.n_subjects(); ++i) {
      const int d = g.dosage(i, k);
      x(row0 + static_cast<Index>(i), static_cast<Index>(k - first)) =
          d == snp::kMissingDosage ? std::numeric_limits<double>::quiet_NaN() : d;
    }
}

}  // namespace

void WindowPlan::validate() const {
  if (width == 0) fail(ErrorKind::Argument, "window width must be positive");
  if (!(mask_fraction > 0.0 && mask_fraction < 1.0))
    fail(ErrorKind::Argument, "mask fraction must lie in (0, 1)");
  if (ranks.empty()) fail(ErrorKind::Argument, "rank grid is empty");
  for (Index r : ranks)
    if (r < 1 || static_cast<std::size_t>(r) > width)
      fail(ErrorKind::Argument, "rank " + std::to_string(r) + " outside [1, window width]");
}

std::vector<WindowSpan> plan_windows(std::size_t n_snps, std::size_t width) {
  std::vector<WindowSpan> spans;
  if (n_snps == 0) return spans;
  const std::size_t step = std::max<std::size_t>(width / 3, 1);
  const std::size_t offset = (width - std::min(step, width)) / 2;
  for (std::size_t t = 0;; ++t) {
    WindowSpan w;
    w.first = t * step;
    w.last = std::min(w.first + width, n_snps);
    const bool last = w.first + width >= n_snps;
    w.commit_first = t == 0 ? 0 : w.first + offset;
    w.commit_last = last ? n_snps : w.first + offset + step;
    if (w.last - w.first < 3)
      fail(ErrorKind::Window, describe(t, w) + " spans fewer than 3 SNPs; thirds are undefined");
    spans.push_back(w);
    if (last) break;
  }
  return spans;
}

int hard_call(double dosage) noexcept {
  return static_cast<int>(std::floor(std::clamp(dosage, 0.0, 2.0) + 0.5));
}

ImputeResult impute(const PackedGenotypeMatrix& study,
                    const std::optional<PackedGenotypeMatrix>& reference, const WindowPlan& plan) {
  plan.validate();
  if (reference) {
    if (reference->n_snps() != study.n_snps())
      fail(ErrorKind::Consistency, "reference panel has " + std::to_string(reference->n_snps()) +
                                       " SNPs, study has " + std::to_string(study.n_snps()));
    for (std::size_t k = 0; k < study.n_snps(); ++k)
      if (reference->snps()[k].id != study.snps()[k].id)
        fail(ErrorKind::Consistency, "reference SNP " + reference->snps()[k].id +
                                         " does not match study SNP " + study.snps()[k].id);
  }
  const auto spans = plan_windows(study.n_snps(), plan.width);
  const Index n_ref = reference ? static_cast<Index>(reference->n_subjects()) : 0;
  const Index n_study = static_cast<Index>(study.n_subjects());

  ImputeResult result;
  result.dosages.resize(n_study, static_cast<Index>(study.n_snps()));
  load_rows(study, 0, study.n_snps(), 0, result.dosages);
  result.windows.resize(spans.size());

  parallel_for(0, spans.size(), 1, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      const auto& span = spans[t];
      WindowReport& report = result.windows[t];
      report.span = span;
      report.holdout_error = std::numeric_limits<double>::quiet_NaN();
      const Index cols = static_cast<Index>(span.last - span.first);
      MatrixXd x(n_ref + n_study, cols);
      if (reference) load_rows(*reference, span.first, span.last, 0, x);
      load_rows(study, span.first, span.last, n_ref, x);
      const auto mask = ObservationMask::of(x);

      std::size_t pending = 0;
      for (std::size_t k = span.commit_first; k < span.commit_last; ++k)
        for (Index i = 0; i < n_study; ++i)
          pending += !mask.observed(n_ref + i, static_cast<Index>(k - span.first));
      if (pending == 0) {
        report.note = "no missing entries";
        continue;
      }
      if (mask.count() == 0) {
        report.skipped = true;
        report.note = "no observed entries";
        continue;
      }

      std::vector<Index> grid;
      const Index cap = std::min(x.rows(), cols);
      for (Index r : plan.ranks)
        if (r <= cap) grid.push_back(r);
      if (grid.empty()) {
        grid.push_back(cap);
        report.note = "rank grid capped at " + std::to_string(cap);
      }
      const std::uint64_t seed = stream_seed(plan.seed, t);
      const auto sel =
          select_rank(x, mask, grid, plan.mask_fraction, seed, plan.completion, plan.solver);
      const auto chosen = std::find(sel.grid.begin(), sel.grid.end(), sel.rank) - sel.grid.begin();
      report.rank = sel.rank;
      report.holdout_error = sel.errors[static_cast<std::size_t>(chosen)];
      const auto fit = complete(x, mask, sel.rank, seed, plan.completion, plan.solver);
      report.iterations = fit.iterations;
      const MatrixXd y = fit.factors.product();
      for (std::size_t k = span.commit_first; k < span.commit_last; ++k) {
        const Index c = static_cast<Index>(k - span.first);
        for (Index i = 0; i < n_study; ++i)
          if (!mask.observed(n_ref + i, c)) {
            result.dosages(i, static_cast<Index>(k)) = std::clamp(y(n_ref + i, c), 0.0, 2.0);
            ++report.imputed;
          }
      }
    }
  });

  MatrixXd calls = result.dosages;
  for (Index j = 0; j < calls.cols(); ++j)
    for (Index i = 0; i < calls.rows(); ++i)
      if (!std::isnan(calls(i, j))) calls(i, j) = hard_call(calls(i, j));
  result.hard_calls = PackedGenotypeMatrix::from_dosages(calls, study.snps(), study.subjects());
  return result;
}

void write_dosage_tsv(const ImputeResult& result, const PackedGenotypeMatrix& study,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << "id";
  for (const auto& s : study.snps()) out << '\t' << s.id;
  out << '\n';
  const auto ids = study.subject_ids();
  for (Index i = 0; i < result.dosages.rows(); ++i) {
    out << ids[static_cast<std::size_t>(i)];
    for (Index j = 0; j < result.dosages.cols(); ++j)
      out << '\t' << format_double(result.dosages(i, j));
    out << '\n';
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

void write_window_report(const std::vector<WindowReport>& windows, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << "window\tfirst\tlast\tcommit_first\tcommit_last\trank\titerations\tholdout_error\t"
         "imputed\tstatus\n";
  for (std::size_t t = 0; t < windows.size(); ++t) {
    const auto& w = windows[t];
    out << t << '\t' << w.span.first << '\t' << w.span.last << '\t' << w.span.commit_first << '\t'
        << w.span.commit_last << '\t' << w.rank << '\t' << w.iterations << '\t'
        << format_double(w.holdout_error) << '\t' << w.imputed << '\t'
        << (w.skipped ? "skipped" : "ok") << (w.note.empty() ? "" : ": " + w.note) << '\n';
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

}  // namespace genokit::mc
