#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "genokit/completion.hpp"
#include "genokit/genotypes.hpp"

namespace genokit::mc {

struct WindowPlan {
  std::size_t width = 300;  // SNPs per window; the step is width / 3
  double mask_fraction = 0.1;
  std::vector<Eigen::Index> ranks{1, 2, 3, 5, 8, 13};
  CompletionOptions completion{};
  Solver solver = Solver::Als;
  std::uint64_t seed = 1;

  std::size_t step() const noexcept { return width / 3; }
  void validate() const;
};

/// Half-open SNP ranges of one window and of the part of it that is written
/// back. Commit ranges tile [0, n_snps) exactly once.
struct WindowSpan {
  std::size_t first = 0, last = 0;
  std::size_t commit_first = 0, commit_last = 0;
};

/// Windows start every step SNPs; each commits its middle third, the first
/// window also its left third and the last window everything to its right.
std::vector<WindowSpan> plan_windows(std::size_t n_snps, std::size_t width);

struct WindowReport {
  WindowSpan span;
  Eigen::Index rank = 0;  // 0 when nothing was fitted
  int iterations = 0;
  double holdout_error = 0.0;  // NaN if no entries could be held out
  std::size_t imputed = 0;     // study entries filled in the commit range
  bool skipped = false;
  std::string note;
};

struct ImputeResult {
  Eigen::MatrixXd dosages;  // study subjects x SNPs, clamped to [0, 2]
  snp::PackedGenotypeMatrix hard_calls;
  std::vector<WindowReport> windows;
};

/// Nearest of {0, 1, 2}; halves round up.
int hard_call(double dosage) noexcept;

/// Windowed completion of the study's missing genotypes. Reference subjects,
/// when given, must carry the same SNPs; their rows are stacked above the
/// study rows and only study entries are written back. Observed entries are
/// never changed.
ImputeResult impute(const snp::PackedGenotypeMatrix& study,
                    const std::optional<snp::PackedGenotypeMatrix>& reference,
                    const WindowPlan& plan);

void write_dosage_tsv(const ImputeResult& result, const snp::PackedGenotypeMatrix& study,
                      const std::string& path);
void write_window_report(const std::vector<WindowReport>& windows, const std::string& path);

}  // namespace genokit::mc
