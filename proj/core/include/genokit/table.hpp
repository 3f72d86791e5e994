#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace genokit {

/// Shortest decimal text that round-trips to the same double. Deterministic
/// across runs, so it is used for every numeric field we write.
std::string format_double(double value);

/// Splits a line on runs of tabs/spaces (or on commas when `comma` is set).
std::vector<std::string_view> split_fields(std::string_view line,
                                           bool comma = false);

double parse_double(std::string_view field, const std::string& where);
long long parse_int(std::string_view field, const std::string& where);

/// A header-led table whose first column is a subject identifier and whose
/// remaining columns are numeric. Used for phenotypes and covariates.
struct NumericTable {
  std::vector<std::string> columns;  // excluding the id column
  std::vector<std::string> ids;
  Eigen::MatrixXd values;  // ids.size() x columns.size(); NaN for "NA"

  int column_index(std::string_view name) const;
};

NumericTable read_numeric_table(const std::string& path);

/// Reorders table rows to `ids`. Throws a join error naming every id present
/// on one side only.
Eigen::MatrixXd align_rows(const NumericTable& table,
                           const std::vector<std::string>& ids,
                           const std::string& what);

}  // namespace genokit
