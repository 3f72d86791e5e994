#include "genokit/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "genokit/error.hpp"

namespace genokit {

std::string format_double(double value) {
  if (std::isnan(value)) return "NA";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> split_fields(std::string_view line, bool comma) {
  std::vector<std::string_view> out;
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (comma) {
    std::size_t start = 0;
    for (;;) {
      std::size_t pos = line.find(',', start);
      std::string_view f = line.substr(start, pos == std::string_view::npos
                                                  ? std::string_view::npos
                                                  : pos - start);
      while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
      while (!f.empty() && (f.back() == ' ' || f.back() == '\t')) f.remove_suffix(1);
      out.push_back(f);
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return out;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view field, const std::string& where) {
  if (field == "NA" || field == "nan" || field == "NaN" || field == ".")
    return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    fail(ErrorKind::Parse, where + ": not a number: '" + std::string(field) + "'");
  return v;
}

long long parse_int(std::string_view field, const std::string& where) {
  long long v = 0;
  auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    fail(ErrorKind::Parse, where + ": not an integer: '" + std::string(field) + "'");
  return v;
}

int NumericTable::column_index(std::string_view name) const {
  for (std::size_t j = 0; j < columns.size(); ++j)
    if (columns[j] == name) return static_cast<int>(j);
  return -1;
}

NumericTable read_numeric_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  NumericTable table;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::vector<double>> rows;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (!have_header) {
      have_header = true;
      for (std::size_t j = 1; j < fields.size(); ++j)
        table.columns.emplace_back(fields[j]);
      continue;
    }
    if (fields.size() != table.columns.size() + 1)
      fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": expected " +
                                 std::to_string(table.columns.size() + 1) +
                                 " fields, found " + std::to_string(fields.size()));
    table.ids.emplace_back(fields[0]);
    std::vector<double> row;
    for (std::size_t j = 1; j < fields.size(); ++j)
      row.push_back(parse_double(fields[j], path + ":" + std::to_string(lineno)));
    rows.push_back(std::move(row));
  }
  if (!have_header) fail(ErrorKind::Parse, path + ": empty table");
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return table;
}

Eigen::MatrixXd align_rows(const NumericTable& table,
                           const std::vector<std::string>& ids,
                           const std::string& what) {
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < table.ids.size(); ++i)
    index.emplace(table.ids[i], static_cast<Eigen::Index>(i));
  std::unordered_set<std::string> wanted(ids.begin(), ids.end());

  std::vector<std::string> unmatched;
  for (const auto& id : ids)
    if (!index.count(id)) unmatched.push_back(id);
  for (const auto& id : table.ids)
    if (!wanted.count(id)) unmatched.push_back(id);
  if (!unmatched.empty()) {
    std::ostringstream msg;
    msg << what << ": " << unmatched.size() << " unmatched id(s):";
    for (std::size_t i = 0; i < std::min<std::size_t>(unmatched.size(), 10); ++i)
      msg << ' ' << unmatched[i];
    if (unmatched.size() > 10) msg << " ...";
    fail(ErrorKind::Join, msg.str());
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), table.values.cols());
  for (std::size_t i = 0; i < ids.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = table.values.row(index.at(ids[i]));
  return out;
}

}  // namespace genokit
