#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

namespace genokit {

enum class Estimator { Theoretical, Grm, Robust, Mom, GeneDrop, External };

std::string_view to_string(Estimator e) noexcept;
/// Unrecognized names map to Estimator::External.
Estimator parse_estimator(std::string_view name) noexcept;

/// Symmetric n x n matrix of pairwise kinship estimates with the subject ids
/// labelling its rows and columns.
struct KinshipMatrix {
  Eigen::MatrixXd values;
  Estimator estimator = Estimator::External;
  std::vector<std::string> ids;

  Eigen::Index size() const noexcept { return values.rows(); }
};

/// TSV layout: header row `<estimator>\t<id1>\t<id2>...`, then one row per
/// subject `<id>\t<v1>\t<v2>...`.
void write_kinship_tsv(const KinshipMatrix& kinship, const std::string& path);
KinshipMatrix read_kinship_tsv(const std::string& path);

/// Rows/columns permuted to `ids`; join error on any mismatch.
KinshipMatrix align_kinship(const KinshipMatrix& kinship, const std::vector<std::string>& ids);

}  // namespace genokit
