#include "genokit/kinship.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "genokit/error.hpp"
#include "genokit/table.hpp"

namespace genokit {

std::string_view to_string(Estimator e) noexcept {
  switch (e) {
    case Estimator::Theoretical: return "theoretical";
    case Estimator::Grm: return "grm";
    case Estimator::Robust: return "robust";
    case Estimator::Mom: return "mom";
    case Estimator::GeneDrop: return "gene-drop";
    case Estimator::External: return "external";
  }
  return "external";
}

Estimator parse_estimator(std::string_view name) noexcept {
  for (auto e : {Estimator::Theoretical, Estimator::Grm, Estimator::Robust, Estimator::Mom,
                 Estimator::GeneDrop})
    if (to_string(e) == name) return e;
  return Estimator::External;
}

void write_kinship_tsv(const KinshipMatrix& kinship, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << to_string(kinship.estimator);
  for (const auto& id : kinship.ids) out << '\t' << id;
  out << '\n';
  for (Eigen::Index i = 0; i < kinship.size(); ++i) {
    out << kinship.ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < kinship.size(); ++j)
      out << '\t' << format_double(kinship.values(i, j));
    out << '\n';
  }
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

KinshipMatrix read_kinship_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  KinshipMatrix k;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Parse, path + ": empty kinship file");
  auto header = split_fields(line);
  if (header.empty()) fail(ErrorKind::Parse, path + ":1: empty header");
  k.estimator = parse_estimator(header[0]);
  for (std::size_t j = 1; j < header.size(); ++j) k.ids.emplace_back(header[j]);
  const auto n = static_cast<Eigen::Index>(k.ids.size());
  k.values.resize(n, n);
  Eigen::Index row = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    auto f = split_fields(line);
    if (f.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (row >= n) fail(ErrorKind::Parse, where + ": more rows than header ids");
    if (static_cast<Eigen::Index>(f.size()) != n + 1)
      fail(ErrorKind::Parse, where + ": expected " + std::to_string(n + 1) + " fields");
    if (f[0] != k.ids[static_cast<std::size_t>(row)])
      fail(ErrorKind::Parse, where + ": row id '" + std::string(f[0]) +
                                 "' does not match header order");
    for (Eigen::Index j = 0; j < n; ++j)
      k.values(row, j) = parse_double(f[static_cast<std::size_t>(j) + 1], where);
    ++row;
  }
  if (row != n) fail(ErrorKind::Parse, path + ": expected " + std::to_string(n) + " rows");
  return k;
}

KinshipMatrix align_kinship(const KinshipMatrix& kinship, const std::vector<std::string>& ids) {
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < kinship.ids.size(); ++i)
    index.emplace(kinship.ids[i], static_cast<Eigen::Index>(i));
  std::unordered_set<std::string> wanted(ids.begin(), ids.end());
  std::vector<std::string> unmatched;
  for (const auto& id : ids)
    if (!index.count(id)) unmatched.push_back(id);
  for (const auto& id : kinship.ids)
    if (!wanted.count(id)) unmatched.push_back(id);
  if (!unmatched.empty()) {
    std::ostringstream msg;
    msg << "kinship matrix: " << unmatched.size() << " unmatched id(s):";
    for (std::size_t i = 0; i < std::min<std::size_t>(unmatched.size(), 10); ++i)
      msg << ' ' << unmatched[i];
    if (unmatched.size() > 10) msg << " ...";
    fail(ErrorKind::Join, msg.str());
  }
  KinshipMatrix out;
  out.estimator = kinship.estimator;
  out.ids = ids;
  const auto n = static_cast<Eigen::Index>(ids.size());
  out.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out.values(i, j) = kinship.values(index.at(ids[static_cast<std::size_t>(i)]),
                                        index.at(ids[static_cast<std::size_t>(j)]));
  return out;
}

}  // namespace genokit
