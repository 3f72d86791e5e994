#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "genokit/genotypes.hpp"
#include "genokit/kinship.hpp"
#include "genokit/vc.hpp"

namespace genokit::cli {

/// Per-run output channels: results on `out`, progress on `err` (unless
/// quiet), and everything including timings in the optional log file.
class Context {
 public:
  Context(std::ostream& out, std::ostream& err, bool quiet, const std::string& log_path);

  std::ostream& out;
  std::ostream& err;
  std::uint64_t seed = 1;

  void info(const std::string& message);
  void log(const std::string& message);

  class Phase {
   public:
    Phase(Context& ctx, std::string name);
    ~Phase();
    Phase(const Phase&) = delete;
    Phase& operator=(const Phase&) = delete;

   private:
    Context& ctx_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
  };
  Phase phase(std::string name) { return Phase(*this, std::move(name)); }

 private:
  bool quiet_;
  std::unique_ptr<std::ofstream> log_;
};

/// "data/toy", "data/toy.bed" and "data/toy.fam" all name the same triple.
std::string plink_prefix(std::string path);

struct Traits {
  std::vector<std::string> ids;  // subjects kept, in reference order
  std::vector<std::size_t> rows;  // their positions in the reference id list
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> fixed_names;
};

/// Phenotype column (first one when `name` is empty) and covariates aligned to
/// `ids`, with an intercept in front. Subjects with any missing value are
/// dropped and reported.
Traits load_traits(Context& ctx, const std::vector<std::string>& ids, const std::string& pheno,
                   const std::string& name, const std::string& covar);

/// Covariance component from a kinship TSV aligned to `ids`. Kinship-scale
/// matrices (phi, diagonal near 1/2) are doubled so the component is on the
/// relationship scale; relationship-scale matrices are used as is.
Eigen::MatrixXd load_component(const std::string& path, const std::vector<std::string>& ids,
                               const std::string& scale);

struct FitReport {
  std::string method;
  std::size_t subjects = 0;
  vc::VcEstimate estimate;
  std::vector<std::string> fixed_names;
  std::optional<std::vector<bool>> selected;
};

void write_fit_report(const FitReport& report, const std::string& path);

/// Writes to `fallback` when the path is "-", otherwise to the file.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback);
  std::ostream& stream() { return file_ ? *file_ : fallback_; }
  void close();

 private:
  std::string path_;
  std::ostream& fallback_;
  std::unique_ptr<std::ofstream> file_;
};

}  // namespace genokit::cli
