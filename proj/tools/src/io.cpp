#include "io.hpp"

#include <cmath>
#include <iostream>

#include "genokit/error.hpp"
#include "genokit/table.hpp"

namespace genokit::cli {

using Eigen::Index;

Context::Context(std::ostream& out_, std::ostream& err_, bool quiet, const std::string& log_path)
    : out(out_), err(err_), quiet_(quiet) {
  if (!log_path.empty()) {
    log_ = std::make_unique<std::ofstream>(log_path);
    if (!*log_) fail(ErrorKind::Io, "cannot write log file " + log_path);
  }
}

void Context::info(const std::string& message) {
  if (!quiet_) err << message << '\n';
  log(message);
}

void Context::log(const std::string& message) {
  if (log_) *log_ << message << '\n' << std::flush;
}

Context::Phase::Phase(Context& ctx, std::string name)
    : ctx_(ctx), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}

Context::Phase::~Phase() {
  const double s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  ctx_.log("phase " + name_ + " " + std::to_string(s) + "s");
}

std::string plink_prefix(std::string path) {
  for (const char* ext : {".bed", ".bim", ".fam"}) {
    const std::string e = ext;
    if (path.size() > e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0)
      return path.substr(0, path.size() - e.size());
  }
  return path;
}

Traits load_traits(Context& ctx, const std::vector<std::string>& ids, const std::string& pheno,
                   const std::string& name, const std::string& covar) {
  const auto ptable = read_numeric_table(pheno);
  if (ptable.columns.empty()) fail(ErrorKind::Data, pheno + " has no phenotype columns");
  int col = 0;
  if (!name.empty()) {
    col = ptable.column_index(name);
    if (col < 0) fail(ErrorKind::Argument, "phenotype column '" + name + "' not found in " + pheno);
  }
  const Eigen::MatrixXd pvals = align_rows(ptable, ids, "phenotype file " + pheno);
  Eigen::MatrixXd cvals(static_cast<Index>(ids.size()), 0);
  std::vector<std::string> cnames;
  if (!covar.empty()) {
    const auto ctable = read_numeric_table(covar);
    cvals = align_rows(ctable, ids, "covariate file " + covar);
    cnames = ctable.columns;
  }

  Traits t;
  t.fixed_names.push_back("intercept");
  t.fixed_names.insert(t.fixed_names.end(), cnames.begin(), cnames.end());
  std::vector<std::string> dropped;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto r = static_cast<Index>(i);
    bool ok = !std::isnan(pvals(r, col));
    for (Index c = 0; c < cvals.cols(); ++c) ok = ok && !std::isnan(cvals(r, c));
    if (ok) {
      t.rows.push_back(i);
      t.ids.push_back(ids[i]);
    } else {
      dropped.push_back(ids[i]);
    }
  }
  if (!dropped.empty()) {
    std::string list;
    for (const auto& d : dropped) list += (list.empty() ? "" : ",") + d;
    ctx.info("dropped " + std::to_string(dropped.size()) + " subjects with missing values: " + list);
  }
  if (t.rows.empty()) fail(ErrorKind::Data, "no subjects with complete phenotype and covariates");
  const auto n = static_cast<Index>(t.rows.size());
  t.y.resize(n);
  t.X.resize(n, 1 + cvals.cols());
  for (Index i = 0; i < n; ++i) {
    const auto r = static_cast<Index>(t.rows[static_cast<std::size_t>(i)]);
    t.y[i] = pvals(r, col);
    t.X(i, 0) = 1.0;
    for (Index c = 0; c < cvals.cols(); ++c) t.X(i, 1 + c) = cvals(r, c);
  }
  return t;
}

Eigen::MatrixXd load_component(const std::string& path, const std::vector<std::string>& ids,
                               const std::string& scale) {
  const auto k = align_kinship(read_kinship_tsv(path), ids);
  if (scale == "kinship") return 2.0 * k.values;
  if (scale == "relationship") return k.values;
  fail(ErrorKind::Argument, "kinship scale must be 'kinship' or 'relationship'");
}

void write_fit_report(const FitReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  const auto& e = r.estimate;
  out << "model\ty ~ N(X beta, sum_j sigma2_j V_j)\n";
  out << "method\t" << r.method << '\n';
  out << "subjects\t" << r.subjects << '\n';
  out << "converged\t" << (e.converged ? "true" : "false") << '\n';
  out << "iterations\t" << e.iterations << '\n';
  out << "loglik\t" << format_double(e.loglik) << '\n';
  for (Index j = 0; j < e.sigma2.size(); ++j) {
    out << "sigma2." << e.labels[static_cast<std::size_t>(j)] << '\t' << format_double(e.sigma2[j]);
    if (r.selected) out << '\t' << ((*r.selected)[static_cast<std::size_t>(j)] ? "selected" : "excluded");
    out << '\n';
  }
  if (e.sigma2.size() == 2) {
    const auto h2 = vc::heritability(e, 0, 1);
    out << "heritability\t" << (h2 ? format_double(*h2) : "NA") << '\n';
  }
  for (Index j = 0; j < e.beta.size(); ++j)
    out << "beta." << r.fixed_names[static_cast<std::size_t>(j)] << '\t' << format_double(e.beta[j])
        << '\n';
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

Output::Output(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {
  if (path != "-") {
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) fail(ErrorKind::Io, "cannot write " + path);
  }
}

void Output::close() {
  if (file_) {
    file_->close();
    if (!*file_) fail(ErrorKind::Io, "write failed: " + path_);
  } else {
    fallback_.flush();
  }
}

}  // namespace genokit::cli
