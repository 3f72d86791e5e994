#include "genokit/pedigree.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <unordered_map>

#include "genokit/error.hpp"
#include "genokit/parallel.hpp"
#include "genokit/table.hpp"

namespace genokit::ped {
namespace {

bool unknown(const std::string& s) { return s.empty() || s == "0"; }

constexpr std::size_t kReplicateBlock = 1024;

}  // namespace

Pedigree Pedigree::from_records(const std::vector<PedigreeRecord>& records) {
  Pedigree p;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& r : records) {
    if (unknown(r.id)) fail(ErrorKind::Structure, "pedigree member with empty id");
    if (!index.emplace(r.id, p.ids_.size()).second)
      fail(ErrorKind::Structure, "duplicate pedigree id " + r.id);
    p.ids_.push_back(r.id);
  }
  const std::size_t n = records.size();
  p.father_.resize(n);
  p.mother_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = records[i];
    if (unknown(r.father) != unknown(r.mother))
      fail(ErrorKind::Structure, "individual " + r.id + " has exactly one known parent");
    if (unknown(r.father)) continue;
    auto f = index.find(r.father);
    auto m = index.find(r.mother);
    if (f == index.end())
      fail(ErrorKind::Structure, "father " + r.father + " of " + r.id + " is not in the pedigree");
    if (m == index.end())
      fail(ErrorKind::Structure, "mother " + r.mother + " of " + r.id + " is not in the pedigree");
    p.father_[i] = f->second;
    p.mother_[i] = m->second;
  }

  // Kahn's algorithm over parent -> child edges
  std::vector<std::vector<std::size_t>> children(n);
  std::vector<int> pending(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!p.father_[i]) continue;
    children[*p.father_[i]].push_back(i);
    children[*p.mother_[i]].push_back(i);
    pending[i] = 2;
  }
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i)
    if (pending[i] == 0) queue.push_back(i);
  for (std::size_t head = 0; head < queue.size(); ++head)
    for (std::size_t c : children[queue[head]])
      if (--pending[c] == 0) queue.push_back(c);
  if (queue.size() != n) {
    std::string who;
    for (std::size_t i = 0; i < n; ++i)
      if (pending[i] > 0) {
        who = p.ids_[i];
        break;
      }
    fail(ErrorKind::Structure, "pedigree is cyclic (individual " + who + " is its own ancestor)");
  }
  p.order_ = std::move(queue);
  return p;
}

Pedigree Pedigree::from_subjects(const std::vector<snp::SubjectInfo>& subjects) {
  std::vector<PedigreeRecord> records;
  records.reserve(subjects.size());
  for (const auto& s : subjects) records.push_back({s.individual_id, s.father_id, s.mother_id});
  return from_records(records);
}

Pedigree read_pedigree(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::vector<PedigreeRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const bool comma = line.find(',') != std::string::npos;
    auto f = split_fields(line, comma);
    if (f.empty() || (f.size() == 1 && f[0].empty())) continue;
    if (f.size() != 6)
      fail(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": expected 6 fields, found " +
                                 std::to_string(f.size()));
    records.push_back({std::string(f[1]), std::string(f[2]), std::string(f[3])});
  }
  return Pedigree::from_records(records);
}

KinshipMatrix theoretical_kinship(const Pedigree& pedigree) {
  const std::size_t n = pedigree.size();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
  const auto& order = pedigree.topological_order();
  auto at = [&](std::size_t a, std::size_t b) -> double& {
    return phi(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  };
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t i = order[t];
    if (pedigree.is_founder(i)) {
      at(i, i) = 0.5;
      continue;
    }
    const std::size_t f = *pedigree.father(i);
    const std::size_t m = *pedigree.mother(i);
    at(i, i) = 0.5 + 0.5 * at(f, m);
    for (std::size_t s = 0; s < t; ++s) {
      const std::size_t j = order[s];
      const double v = 0.5 * (at(j, f) + at(j, m));
      at(i, j) = v;
      at(j, i) = v;
    }
  }
  return {std::move(phi), Estimator::Theoretical, pedigree.ids()};
}

int jacquard_state(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) noexcept {
  const bool ab = a == b;
  const bool cd = c == d;
  if (ab && cd) return a == c ? 1 : 2;
  if (ab) return (a == c || a == d) ? 3 : 4;
  if (cd) return (c == a || c == b) ? 5 : 6;
  const int matches = (a == c) + (a == d) + (b == c) + (b == d);
  return matches == 2 ? 7 : (matches == 1 ? 8 : 9);
}

std::size_t GeneDropResult::index(std::size_t i, std::size_t j) const noexcept {
  if (i > j) std::swap(i, j);
  const std::size_t n = ids.size();
  return i * n - i * (i - 1) / 2 + (j - i);
}

GeneDropResult gene_drop(const Pedigree& pedigree, std::size_t replicates, std::uint64_t seed) {
  if (replicates == 0) fail(ErrorKind::Argument, "gene_drop needs at least one replicate");
  const std::size_t n = pedigree.size();
  const std::size_t n_pairs = n * (n + 1) / 2;
  const auto& order = pedigree.topological_order();

  GeneDropResult result;
  result.ids = pedigree.ids();
  result.replicates = replicates;

  const std::size_t blocks = (replicates + kReplicateBlock - 1) / kReplicateBlock;
  std::vector<std::vector<std::uint32_t>> block_counts(blocks);
  parallel_for(0, blocks, 1, [&](std::size_t lo, std::size_t hi) {
    std::vector<std::uint32_t> genes(2 * n);
    for (std::size_t blk = lo; blk < hi; ++blk) {
      std::vector<std::uint32_t> counts(n_pairs * 9, 0);
      std::mt19937_64 rng(stream_seed(seed, blk));
      const std::size_t reps = std::min(kReplicateBlock, replicates - blk * kReplicateBlock);
      for (std::size_t r = 0; r < reps; ++r) {
        std::uint64_t bits = 0;
        int left = 0;
        for (std::size_t i : order) {
          if (pedigree.is_founder(i)) {
            genes[2 * i] = static_cast<std::uint32_t>(2 * i);
            genes[2 * i + 1] = static_cast<std::uint32_t>(2 * i + 1);
            continue;
          }
          if (left < 2) {
            bits = rng();
            left = 64;
          }
          const std::size_t f = *pedigree.father(i);
          const std::size_t m = *pedigree.mother(i);
          genes[2 * i] = genes[2 * f + (bits & 1)];
          genes[2 * i + 1] = genes[2 * m + ((bits >> 1) & 1)];
          bits >>= 2;
          left -= 2;
        }
        std::size_t p = 0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i; j < n; ++j, ++p) {
            int s = jacquard_state(genes[2 * i], genes[2 * i + 1], genes[2 * j], genes[2 * j + 1]);
            ++counts[p * 9 + static_cast<std::size_t>(s - 1)];
          }
      }
      block_counts[blk] = std::move(counts);
    }
  });

  std::vector<std::uint64_t> total(n_pairs * 9, 0);
  for (const auto& c : block_counts)
    for (std::size_t q = 0; q < total.size(); ++q) total[q] += c[q];

  result.pairs.resize(n_pairs);
  const double inv = 1.0 / static_cast<double>(replicates);
  for (std::size_t p = 0; p < n_pairs; ++p)
    for (int s = 0; s < 9; ++s)
      result.pairs[p].delta[static_cast<std::size_t>(s)] =
          static_cast<double>(total[p * 9 + static_cast<std::size_t>(s)]) * inv;

  const KinshipMatrix phi = theoretical_kinship(pedigree);
  Eigen::MatrixXd est(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = result.at(i, j).kinship();
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      est(ii, jj) = v;
      est(jj, ii) = v;
      const bool inbred = phi.values(ii, ii) != 0.5 || phi.values(jj, jj) != 0.5;
      if (inbred) continue;
      const double truth = phi.values(ii, jj);
      const double bound = 4.0 * std::sqrt(truth * (1.0 - truth) * inv);
      if (std::abs(v - truth) > bound) result.flagged.emplace_back(i, j);
    }
  result.kinship = {std::move(est), Estimator::GeneDrop, pedigree.ids()};
  return result;
}

}  // namespace genokit::ped
