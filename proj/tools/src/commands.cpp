#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "genokit/assoc.hpp"
#include "genokit/empirical_kinship.hpp"
#include "genokit/error.hpp"
#include "genokit/iht.hpp"
#include "genokit/impute.hpp"
#include "genokit/pca.hpp"
#include "genokit/pedigree.hpp"
#include "genokit/plink.hpp"
#include "genokit/simulate.hpp"
#include "genokit/summary.hpp"
#include "genokit/table.hpp"

namespace genokit::cli {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

snp::PackedGenotypeMatrix load_bed(Context& ctx, const std::string& path) {
  auto p = ctx.phase("read-plink");
  auto g = snp::read_plink(plink_prefix(path));
  ctx.info("read " + std::to_string(g.n_subjects()) + " subjects x " +
           std::to_string(g.n_snps()) + " SNPs from " + plink_prefix(path));
  return g;
}

snp::PackedGenotypeMatrix subset_subjects(const snp::PackedGenotypeMatrix& g,
                                          const std::vector<std::size_t>& rows) {
  if (rows.size() == g.n_subjects()) return g;
  std::vector<std::size_t> all(g.n_snps());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return g.subset(rows, all);
}

// ---------------------------------------------------------------- summarize

class Summarize final : public Command {
 public:
  explicit Summarize(CLI::App& parent) {
    app = parent.add_subcommand("summarize", "Per-SNP genotype counts and frequencies");
    app->add_option("--bed", bed_, "PLINK prefix")->required();
    app->add_option("--out", out_, "SNP summary TSV ('-' = stdout)")->capture_default_str();
    app->add_option("--subjects-out", subjects_out_, "Per-subject missingness TSV");
  }

  void execute(Context& ctx) override {
    const auto g = load_bed(ctx, bed_);
    const auto s = snp::summarize(g);
    Output o(out_, ctx.out);
    auto& os = o.stream();
    os << "snp\tchromosome\tposition\tallele1\tallele2\tn2\tn1\tn0\tn_missing\tfreq\tmaf\t"
          "missing_rate\n";
    for (std::size_t k = 0; k < g.n_snps(); ++k) {
      const auto& info = g.snps()[k];
      const auto& r = s.snps[k];
      os << info.id << '\t' << info.chromosome << '\t' << info.position << '\t' << info.allele1
         << '\t' << info.allele2 << '\t' << r.n2 << '\t' << r.n1 << '\t' << r.n0 << '\t'
         << r.n_missing << '\t' << format_double(r.freq) << '\t' << format_double(r.maf) << '\t'
         << format_double(r.missing_rate) << '\n';
    }
    o.close();
    if (!subjects_out_.empty()) {
      Output so(subjects_out_, ctx.out);
      so.stream() << "id\tmissing_rate\n";
      const auto ids = g.subject_ids();
      for (std::size_t i = 0; i < ids.size(); ++i)
        so.stream() << ids[i] << '\t' << format_double(s.subject_missing_rate[i]) << '\n';
      so.close();
    }
  }

 private:
  std::string bed_, out_ = "-", subjects_out_;
};

// ------------------------------------------------------------------- filter

class Filter final : public Command {
 public:
  explicit Filter(CLI::App& parent) {
    app = parent.add_subcommand("filter", "Drop SNPs and subjects by call rate and MAF");
    app->add_option("--bed", bed_, "PLINK prefix")->required();
    app->add_option("--out", out_, "Output PLINK prefix")->required();
    app->add_option("--maf", t_.min_maf, "Minimum minor allele frequency")->capture_default_str();
    app->add_option("--snp-success", t_.min_snp_success, "Minimum SNP call rate")
        ->capture_default_str();
    app->add_option("--subject-success", t_.min_subject_success, "Minimum subject call rate")
        ->capture_default_str();
  }

  void execute(Context& ctx) override {
    const auto g = load_bed(ctx, bed_);
    auto p = ctx.phase("filter");
    const auto r = snp::filter(g, t_);
    snp::write_plink(r.matrix, out_);
    ctx.info("kept " + std::to_string(r.kept_snps.size()) + " of " + std::to_string(g.n_snps()) +
             " SNPs and " + std::to_string(r.kept_subjects.size()) + " of " +
             std::to_string(g.n_subjects()) + " subjects after " + std::to_string(r.passes) +
             " passes");
  }

 private:
  std::string bed_, out_;
  snp::FilterThresholds t_;
};

// ---------------------------------------------------------------------- pca

class Pca final : public Command {
 public:
  explicit Pca(CLI::App& parent) {
    app = parent.add_subcommand("pca", "Principal components of standardized genotypes");
    app->add_option("--bed", bed_, "PLINK prefix")->required();
    app->add_option("--pcs", n_, "Number of components")->capture_default_str();
    app->add_option("--oversample", opt_.oversample, "Extra subspace vectors")
        ->capture_default_str();
    app->add_option("--max-iter", opt_.max_iter, "Iteration cap")->capture_default_str();
    app->add_option("--tol", opt_.tol, "Eigenvalue convergence tolerance")->capture_default_str();
    app->add_option("--out", out_, "Output prefix (.pcs.tsv, .eigenvalues.tsv)")->required();
  }

  void execute(Context& ctx) override {
    const auto g = load_bed(ctx, bed_);
    opt_.seed = ctx.seed;
    auto p = ctx.phase("pca");
    const auto r = snp::principal_components(g, n_, opt_);
    if (!r.converged) ctx.info("warning: PCA did not converge in " + std::to_string(r.iterations) +
                               " iterations");
    Output o(out_ + ".pcs.tsv", ctx.out);
    o.stream() << "id";
    for (int j = 0; j < n_; ++j) o.stream() << "\tPC" << j + 1;
    o.stream() << '\n';
    const auto ids = g.subject_ids();
    for (Index i = 0; i < r.scores.rows(); ++i) {
      o.stream() << ids[static_cast<std::size_t>(i)];
      for (Index j = 0; j < r.scores.cols(); ++j) o.stream() << '\t' << format_double(r.scores(i, j));
      o.stream() << '\n';
    }
    o.close();
    Output e(out_ + ".eigenvalues.tsv", ctx.out);
    e.stream() << "pc\teigenvalue\n";
    for (Index j = 0; j < r.eigenvalues.size(); ++j)
      e.stream() << "PC" << j + 1 << '\t' << format_double(r.eigenvalues[j]) << '\n';
    e.close();
  }

 private:
  std::string bed_, out_;
  int n_ = 10;
  snp::PcaOptions opt_;
};

// ------------------------------------------------------------------ kinship

class Kinship final : public Command {
 public:
  explicit Kinship(CLI::App& parent) {
    app = parent.add_subcommand("kinship", "Theoretical or empirical kinship matrix");
    app->add_option("--bed", bed_, "PLINK prefix (empirical estimators)");
    app->add_option("--pedigree", pedigree_, "Pedigree .fam or CSV (theoretical, gene-drop)");
    app->add_option("--estimator", estimator_, "grm, robust, mom, theoretical or gene-drop")
        ->check(CLI::IsMember({"grm", "robust", "mom", "theoretical", "gene-drop"}))
        ->capture_default_str();
    app->add_option("--freq", freq_, "TSV of SNP id and allele-1 frequency to use");
    app->add_option("--replicates", replicates_, "Gene-drop replicates")->capture_default_str();
    app->add_option("--out", out_, "Kinship TSV")->required();
  }

  void execute(Context& ctx) override {
    KinshipMatrix k;
    if (estimator_ == "theoretical" || estimator_ == "gene-drop") {
      if (pedigree_.empty()) fail(ErrorKind::Argument, "--pedigree is required for " + estimator_);
      const auto ped = ped::read_pedigree(pedigree_);
      auto p = ctx.phase(estimator_);
      if (estimator_ == "theoretical") {
        k = ped::theoretical_kinship(ped);
      } else {
        auto r = ped::gene_drop(ped, replicates_, ctx.seed);
        if (!r.flagged.empty())
          ctx.info("warning: " + std::to_string(r.flagged.size()) +
                   " pairs differ from the recurrence by more than 4 standard errors");
        k = std::move(r.kinship);
      }
    } else {
      if (bed_.empty()) fail(ErrorKind::Argument, "--bed is required for " + estimator_);
      const auto g = load_bed(ctx, bed_);
      kin::EstimatorOptions opt;
      if (!freq_.empty()) {
        const auto table = read_numeric_table(freq_);
        std::vector<std::string> ids;
        for (const auto& s : g.snps()) ids.push_back(s.id);
        const MatrixXd f = align_rows(table, ids, "frequency file " + freq_);
        opt.frequencies = std::vector<double>(f.col(0).data(), f.col(0).data() + f.rows());
      }
      auto p = ctx.phase(estimator_);
      if (estimator_ == "grm") k = kin::grm(g, opt);
      if (estimator_ == "robust") k = kin::robust_grm(g, opt);
      if (estimator_ == "mom") k = kin::mom_kinship(g, opt);
    }
    write_kinship_tsv(k, out_);
  }

 private:
  std::string bed_, pedigree_, estimator_ = "grm", freq_, out_;
  std::size_t replicates_ = 100000;
};

// ---------------------------------------------------------- compare-kinship

class CompareKinship final : public Command {
 public:
  explicit CompareKinship(CLI::App& parent) {
    app = parent.add_subcommand("compare-kinship",
                                "Rank pairs by Fisher-transformed kinship discrepancy");
    app->add_option("--theoretical", theoretical_, "Pedigree kinship TSV")->required();
    app->add_option("--empirical", empirical_, "SNP-based kinship TSV")->required();
    app->add_option("--snps", snps_, "Number of SNPs behind the empirical estimate")->required();
    app->add_option("--out", out_, "Discrepancy TSV")->required();
  }

  void execute(Context& ctx) override {
    const auto t = read_kinship_tsv(theoretical_);
    const auto e = read_kinship_tsv(empirical_);
    const auto r = kin::compare_kinship(t, e, snps_);
    for (const auto& w : r.warnings) ctx.info("warning: " + w);
    kin::write_discrepancy_tsv(r, out_);
  }

 private:
  std::string theoretical_, empirical_, out_;
  std::size_t snps_ = 0;
};

// ------------------------------------------------------------------- impute

class Impute final : public Command {
 public:
  explicit Impute(CLI::App& parent) {
    app = parent.add_subcommand("impute", "Windowed low-rank completion of missing genotypes");
    app->add_option("--bed", bed_, "Study PLINK prefix")->required();
    app->add_option("--reference", reference_, "Reference panel PLINK prefix (same SNPs)");
    app->add_option("--width", plan_.width, "Window width in SNPs")->capture_default_str();
    app->add_option("--mask-fraction", plan_.mask_fraction, "Hold-out fraction for rank choice")
        ->capture_default_str();
    app->add_option("--ranks", ranks_, "Candidate ranks")->delimiter(',')->capture_default_str();
    app->add_option("--solver", solver_, "als or svd")
        ->check(CLI::IsMember({"als", "svd"}))
        ->capture_default_str();
    app->add_option("--tol", plan_.completion.tol, "Relative loss tolerance")
        ->capture_default_str();
    app->add_option("--max-iter", plan_.completion.max_iter, "Iteration cap per fit")
        ->capture_default_str();
    app->add_option("--format", format_, "tsv, plink or both")
        ->check(CLI::IsMember({"tsv", "plink", "both"}))
        ->capture_default_str();
    app->add_option("--out", out_, "Output prefix")->required();
  }

  void execute(Context& ctx) override {
    const auto g = load_bed(ctx, bed_);
    std::optional<snp::PackedGenotypeMatrix> ref;
    if (!reference_.empty()) ref = load_bed(ctx, reference_);
    plan_.ranks.assign(ranks_.begin(), ranks_.end());
    plan_.solver = solver_ == "svd" ? mc::Solver::SvdImpute : mc::Solver::Als;
    plan_.seed = ctx.seed;
    auto p = ctx.phase("impute");
    const auto r = mc::impute(g, ref, plan_);
    std::size_t filled = 0, skipped = 0;
    for (const auto& w : r.windows) {
      filled += w.imputed;
      skipped += w.skipped;
    }
    ctx.info("imputed " + std::to_string(filled) + " genotypes over " +
             std::to_string(r.windows.size()) + " windows (" + std::to_string(skipped) +
             " skipped)");
    if (format_ != "plink") mc::write_dosage_tsv(r, g, out_ + ".dosage.tsv");
    if (format_ != "tsv") snp::write_plink(r.hard_calls, out_);
    mc::write_window_report(r.windows, out_ + ".windows.tsv");
  }

 private:
  std::string bed_, reference_, solver_ = "als", format_ = "both", out_;
  std::vector<long> ranks_{1, 2, 3, 5, 8, 13};
  mc::WindowPlan plan_;
};

// ---------------------------------------------------------------------- iht

class Iht final : public Command {
 public:
  explicit Iht(CLI::App& parent) {
    app = parent.add_subcommand("iht", "Sparse regression by iterative hard thresholding");
    app->add_option("--bed", bed_, "PLINK prefix")->required();
    app->add_option("--pheno", pheno_, "Phenotype TSV (id column first)")->required();
    app->add_option("--pheno-name", pheno_name_, "Phenotype column (default: first)");
    app->add_option("--covar", covar_, "Covariate TSV; kept unpenalized");
    app->add_option("--k", cfg_.k, "Sparsity level")->capture_default_str();
    app->add_option("--k-grid", k_grid_, "Cross-validate over these k")->delimiter(',');
    app->add_option("--folds", cfg_.folds, "Cross-validation folds")->capture_default_str();
    app->add_option("--max-iter", cfg_.max_iter, "Iteration cap")->capture_default_str();
    app->add_option("--tol", cfg_.tol, "Relative loss tolerance")->capture_default_str();
    app->add_option("--weights", weights_, "TSV of SNP id and positive weight");
    app->add_flag("--unrestricted-step", cfg_.unrestricted_step,
                  "Step length from the full gradient");
    app->add_flag("--centered", centered_, "Center genotypes without scaling");
    app->add_option("--out", out_, "Output prefix")->required();
  }

  void execute(Context& ctx) override {
    const auto g0 = load_bed(ctx, bed_);
    const auto traits = load_traits(ctx, g0.subject_ids(), pheno_, pheno_name_, covar_);
    const auto g = subset_subjects(g0, traits.rows);
    if (!weights_.empty()) {
      const auto table = read_numeric_table(weights_);
      std::vector<std::string> ids;
      for (const auto& s : g.snps()) ids.push_back(s.id);
      cfg_.weights = align_rows(table, ids, "weight file " + weights_).col(0);
    }
    cfg_.seed = ctx.seed;
    const iht::PackedDesign design(
        g, {centered_ ? snp::Scaling::Centered : snp::Scaling::Standardized,
            snp::MissingPolicy::MeanImpute});
    if (!k_grid_.empty()) {
      auto p = ctx.phase("cross-validation");
      const auto cv = iht::cross_validate_k(design, traits.y, k_grid_, cfg_, traits.X);
      Output o(out_ + ".cv.tsv", ctx.out);
      o.stream() << "k\tmean_mse\n";
      for (std::size_t i = 0; i < cv.grid.size(); ++i)
        o.stream() << cv.grid[i] << '\t' << format_double(cv.mse[i]) << '\n';
      o.close();
      cfg_.k = cv.k;
      ctx.info("cross-validation chose k = " + std::to_string(cv.k));
    }
    auto p = ctx.phase("iht");
    const auto fit = iht::iht_fit(design, traits.y, cfg_, traits.X);
    Output s(out_ + ".support.tsv", ctx.out);
    s.stream() << "snp\tbeta\tchromosome\tposition\n";
    for (Index j : fit.support) {
      const auto& info = g.snps()[static_cast<std::size_t>(j)];
      s.stream() << info.id << '\t' << format_double(fit.beta[j]) << '\t' << info.chromosome
                 << '\t' << info.position << '\n';
    }
    s.close();
    Output l(out_ + ".loss.csv", ctx.out);
    l.stream() << "iteration,loss\n";
    for (std::size_t i = 0; i < fit.loss.size(); ++i)
      l.stream() << i << ',' << format_double(fit.loss[i]) << '\n';
    l.close();
    ctx.info("support of " + std::to_string(fit.support.size()) + " SNPs after " +
             std::to_string(fit.iterations) + " iterations" +
             (fit.converged ? "" : " (not converged)"));
  }

 private:
  std::string bed_, pheno_, pheno_name_, covar_, weights_, out_;
  std::vector<std::size_t> k_grid_;
  bool centered_ = false;
  iht::IhtConfig cfg_;
};

// -------------------------------------------------------------------- vcfit

void add_kinship_options(CLI::App* app, std::vector<std::string>& files, std::string& scale) {
  app->add_option("--kinship", files, "Kinship TSV for a genetic component (repeatable)");
  app->add_option("--kinship-scale", scale,
                  "kinship (phi, diagonal ~1/2; doubled) or relationship (diagonal ~1)")
      ->check(CLI::IsMember({"kinship", "relationship"}));
}

void require_scale(const std::vector<std::string>& files, const std::string& scale) {
  if (!files.empty() && scale.empty())
    fail(ErrorKind::Argument,
         "--kinship-scale must be given with --kinship (kinship or relationship)");
}

class VcFit final : public Command {
 public:
  explicit VcFit(CLI::App& parent) {
    app = parent.add_subcommand("vcfit", "Variance component model by the MM algorithm");
    app->add_option("--pheno", pheno_, "Phenotype TSV (id column first)")->required();
    app->add_option("--pheno-name", pheno_name_, "Phenotype column (default: first)");
    app->add_option("--covar", covar_, "Covariate TSV (an intercept is always added)");
    add_kinship_options(app, kinship_, scale_);
    app->add_option("--method", method_, "auto, dense or spectral")
        ->check(CLI::IsMember({"auto", "dense", "spectral"}))
        ->capture_default_str();
    app->add_option("--penalty", penalty_, "none, ridge, lasso, scad or mcp")
        ->check(CLI::IsMember({"none", "ridge", "lasso", "scad", "mcp"}))
        ->capture_default_str();
    app->add_option("--lambda", pen_.lambda, "Penalty strength")->capture_default_str();
    app->add_option("--scad-a", pen_.scad_a, "SCAD shape")->capture_default_str();
    app->add_option("--mcp-gamma", pen_.mcp_gamma, "MCP shape")->capture_default_str();
    app->add_option("--tol", mm_.tol, "Relative objective tolerance")->capture_default_str();
    app->add_option("--max-iter", mm_.max_iter, "Iteration cap")->capture_default_str();
    app->add_option("--out", out_, "Fit report")->required();
  }

  void execute(Context& ctx) override {
    require_scale(kinship_, scale_);
    std::vector<std::string> ids;
    if (!kinship_.empty()) {
      ids = read_kinship_tsv(kinship_.front()).ids;
    } else {
      ids = read_numeric_table(pheno_).ids;
    }
    const auto traits = load_traits(ctx, ids, pheno_, pheno_name_, covar_);
    std::vector<MatrixXd> mats;
    for (const auto& f : kinship_) mats.push_back(load_component(f, traits.ids, scale_));

    FitReport report;
    report.subjects = traits.ids.size();
    report.fixed_names = traits.fixed_names;
    const bool spectral = mats.size() == 1 && penalty_ == "none" && method_ != "dense";
    if (method_ == "spectral" && !spectral)
      fail(ErrorKind::Argument, "spectral method needs exactly one kinship and no penalty");
    auto p = ctx.phase("fit");
    if (spectral) {
      report.method = "spectral";
      report.estimate = vc::spectral_fit(traits.y, traits.X, mats.front(), mm_);
    } else {
      vc::VcModel model{traits.y, traits.X, {}};
      for (std::size_t j = 0; j < mats.size(); ++j)
        model.components.push_back(
            {mats.size() == 1 ? "genetic" : "genetic" + std::to_string(j + 1), mats[j], true});
      model.components.push_back(vc::Component::identity("environment", traits.y.size()));
      if (penalty_ == "none") {
        report.method = "dense";
        report.estimate = vc::mm_fit(model, mm_);
      } else {
        pen_.kind = vc::parse_penalty(penalty_);
        report.method = "penalized-" + penalty_;
        auto r = vc::penalized_fit(model, pen_, mm_);
        report.estimate = std::move(r.fit);
        report.selected = std::move(r.selected);
      }
    }
    if (!report.estimate.converged)
      ctx.info("warning: fit did not converge in " + std::to_string(report.estimate.iterations) +
               " iterations");
    write_fit_report(report, out_);
  }

 private:
  std::string pheno_, pheno_name_, covar_, scale_, method_ = "auto", penalty_ = "none", out_;
  std::vector<std::string> kinship_;
  vc::PenaltyOptions pen_;
  vc::MmOptions mm_;
};

// --------------------------------------------------------------------- gwas

class Gwas final : public Command {
 public:
  explicit Gwas(CLI::App& parent) {
    app = parent.add_subcommand("gwas", "SNP-by-SNP score scan with LRT refinement");
    app->add_option("--bed", bed_, "PLINK prefix")->required();
    app->add_option("--pheno", pheno_, "Phenotype TSV (id column first)")->required();
    app->add_option("--pheno-name", pheno_name_, "Phenotype column (default: first)");
    app->add_option("--covar", covar_, "Covariate TSV (an intercept is always added)");
    app->add_option("--pcs", pcs_, "Principal components added as covariates")
        ->capture_default_str();
    app->add_option("--kinship", kinship_, "Kinship TSV for a two-component null");
    app->add_option("--kinship-scale", scale_,
                    "kinship (phi, diagonal ~1/2; doubled) or relationship (diagonal ~1)")
        ->check(CLI::IsMember({"kinship", "relationship"}));
    app->add_option("--refine", opt_.refine_threshold, "LRT for score p below this")
        ->capture_default_str();
    app->add_option("--tol", opt_.mm.tol, "Null fit tolerance")->capture_default_str();
    app->add_option("--max-iter", opt_.mm.max_iter, "Null fit iteration cap")
        ->capture_default_str();
    app->add_option("--out", out_, "Output prefix (.scan.tsv, .manhattan.tsv, .null.txt)")
        ->required();
  }

  void execute(Context& ctx) override {
    if (!kinship_.empty()) require_scale({kinship_}, scale_);
    const auto g0 = load_bed(ctx, bed_);
    const auto traits = load_traits(ctx, g0.subject_ids(), pheno_, pheno_name_, covar_);
    const auto g = subset_subjects(g0, traits.rows);
    MatrixXd X = traits.X;
    auto names = traits.fixed_names;
    if (pcs_ > 0) {
      auto p = ctx.phase("pca");
      snp::PcaOptions popt;
      popt.seed = ctx.seed;
      auto aug = assoc::add_pc_covariates(g, X, pcs_, popt);
      for (const auto& w : aug.warnings) ctx.info("warning: " + w);
      for (int k : aug.kept_pcs) names.push_back("PC" + std::to_string(k));
      X = std::move(aug.covariates);
    }
    std::optional<MatrixXd> k;
    if (!kinship_.empty()) k = load_component(kinship_, traits.ids, scale_);
    auto p = ctx.phase("scan");
    const auto r = assoc::gwas_scan(g, traits.y, X, k, opt_);
    assoc::write_scan_tsv(r, out_ + ".scan.tsv");
    if (r.n_tested() > 0) assoc::manhattan_table(r, out_ + ".manhattan.tsv");
    FitReport report;
    report.method = r.two_component ? "spectral" : "ols";
    report.subjects = traits.ids.size();
    report.estimate = r.null_fit;
    report.fixed_names = names;
    write_fit_report(report, out_ + ".null.txt");
    std::size_t refined = 0;
    for (const auto& row : r.rows) refined += row.refined;
    ctx.info("tested " + std::to_string(r.n_tested()) + " of " + std::to_string(r.rows.size()) +
             " SNPs, refined " + std::to_string(refined) + ", lambda_gc " +
             format_double(r.lambda_gc));
  }

 private:
  std::string bed_, pheno_, pheno_name_, covar_, kinship_, scale_, out_;
  int pcs_ = 0;
  assoc::ScanOptions opt_;
};

// ----------------------------------------------------------------- simulate

class Simulate final : public Command {
 public:
  explicit Simulate(CLI::App& parent) {
    app = parent.add_subcommand("simulate", "Generate a family-based test fixture");
    app->group("");
    app->add_option("--families", families_, "Nuclear families (2 parents, 2 children)")
        ->capture_default_str();
    app->add_option("--snps", snps_, "SNP count")->capture_default_str();
    app->add_option("--h2", h2_, "Heritability of the simulated trait")->capture_default_str();
    app->add_option("--missing", missing_, "Missing genotype rate")->capture_default_str();
    app->add_option("--monomorphic", monomorphic_, "Monomorphic SNPs appended")
        ->capture_default_str();
    app->add_option("--out", out_, "Output prefix")->required();
  }

  void execute(Context& ctx) override {
    std::vector<ped::PedigreeRecord> records;
    std::vector<snp::SubjectInfo> subjects;
    for (std::size_t f = 0; f < families_; ++f) {
      const std::string fam = "F" + std::to_string(f + 1);
      const std::string dad = fam + "_1", mum = fam + "_2";
      records.push_back({dad, "0", "0"});
      records.push_back({mum, "0", "0"});
      records.push_back({fam + "_3", dad, mum});
      records.push_back({fam + "_4", dad, mum});
      subjects.push_back({fam, dad, "0", "0", 1, "-9"});
      subjects.push_back({fam, mum, "0", "0", 2, "-9"});
      subjects.push_back({fam, fam + "_3", dad, mum, 1, "-9"});
      subjects.push_back({fam, fam + "_4", dad, mum, 2, "-9"});
    }
    const auto ped = ped::Pedigree::from_records(records);
    std::mt19937_64 rng(ctx.seed);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<double> freqs(snps_);
    for (double& p : freqs) p = u(rng);
    MatrixXd x = sim::pedigree_dosages(ped, freqs, rng());
    const Index n = x.rows();
    x.conservativeResize(Eigen::NoChange, x.cols() + static_cast<Index>(monomorphic_));
    x.rightCols(static_cast<Index>(monomorphic_)).setConstant(2.0);
    const MatrixXd observed = sim::mask_at_random(x, missing_, rng());

    std::vector<snp::SnpInfo> snps;
    for (Index k = 0; k < x.cols(); ++k)
      snps.push_back({"1", "rs" + std::to_string(k + 1), 0.0, 1000 * (k + 1), "A", "G"});
    snp::write_plink(snp::PackedGenotypeMatrix::from_dosages(observed, snps, subjects), out_);

    const auto phi = ped::theoretical_kinship(ped).values;
    std::normal_distribution<double> normal;
    MatrixXd covariates(n, 2);
    for (Index i = 0; i < n; ++i) {
      covariates(i, 0) = 50.0 + 10.0 * normal(rng);
      covariates(i, 1) = subjects[static_cast<std::size_t>(i)].sex;
    }
    VectorXd beta(2);
    beta << 0.02, 0.3;
    VectorXd sigma(2);
    sigma << h2_, 1.0 - h2_;
    const VectorXd y = sim::trait(covariates, beta, {2.0 * phi, MatrixXd::Identity(n, n)}, sigma,
                                  rng());
    Output pf(out_ + ".pheno.tsv", ctx.out);
    pf.stream() << "id\ttrait\n";
    for (Index i = 0; i < n; ++i)
      pf.stream() << subjects[static_cast<std::size_t>(i)].individual_id << '\t'
                  << format_double(y[i]) << '\n';
    pf.close();
    Output cf(out_ + ".covar.tsv", ctx.out);
    cf.stream() << "id\tage\tsex\n";
    for (Index i = 0; i < n; ++i)
      cf.stream() << subjects[static_cast<std::size_t>(i)].individual_id << '\t'
                  << format_double(covariates(i, 0)) << '\t' << format_double(covariates(i, 1))
                  << '\n';
    cf.close();
    ctx.info("wrote " + std::to_string(n) + " subjects x " + std::to_string(x.cols()) +
             " SNPs to " + out_);
  }

 private:
  std::size_t families_ = 50, snps_ = 500, monomorphic_ = 5;
  double h2_ = 0.5, missing_ = 0.01;
  std::string out_;
};

}  // namespace

std::vector<std::unique_ptr<Command>> add_commands(CLI::App& app) {
  std::vector<std::unique_ptr<Command>> c;
  c.push_back(std::make_unique<Summarize>(app));
  c.push_back(std::make_unique<Filter>(app));
  c.push_back(std::make_unique<Pca>(app));
  c.push_back(std::make_unique<Kinship>(app));
  c.push_back(std::make_unique<CompareKinship>(app));
  c.push_back(std::make_unique<Impute>(app));
  c.push_back(std::make_unique<Iht>(app));
  c.push_back(std::make_unique<VcFit>(app));
  c.push_back(std::make_unique<Gwas>(app));
  c.push_back(std::make_unique<Simulate>(app));
  return c;
}

}  // namespace genokit::cli
