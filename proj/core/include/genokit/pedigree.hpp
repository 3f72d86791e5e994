#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "genokit/genotypes.hpp"
#include "genokit/kinship.hpp"

namespace genokit::ped {

struct PedigreeRecord {
  std::string id;
  std::string father;  // "0" or empty: unknown
  std::string mother;
};

/// Individuals with parent links. Both parents are known or both unknown,
/// every parent is itself a member, and no one is their own ancestor.
class Pedigree {
 public:
  static Pedigree from_records(const std::vector<PedigreeRecord>& records);
  static Pedigree from_subjects(const std::vector<snp::SubjectInfo>& subjects);

  std::size_t size() const noexcept { return ids_.size(); }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::optional<std::size_t> father(std::size_t i) const { return father_[i]; }
  std::optional<std::size_t> mother(std::size_t i) const { return mother_[i]; }
  bool is_founder(std::size_t i) const { return !father_[i].has_value(); }

  /// Every individual appears after both of its parents.
  const std::vector<std::size_t>& topological_order() const noexcept { return order_; }

 private:
  std::vector<std::string> ids_;
  std::vector<std::optional<std::size_t>> father_;
  std::vector<std::optional<std::size_t>> mother_;
  std::vector<std::size_t> order_;
};

/// Reads a .fam file or a 6-column pedigree CSV (family, individual, father,
/// mother, sex, phenotype). Comma-separated input is detected per line.
Pedigree read_pedigree(const std::string& path);

/// Kinship coefficients by the standard recurrence, processed in topological
/// order: phi_ii = 1/2 (1 + phi_{f,m}), phi_ij = (phi_{i,f(j)} + phi_{i,m(j)}) / 2.
KinshipMatrix theoretical_kinship(const Pedigree& pedigree);

/// Frequencies of Jacquard's nine condensed identity states, numbered in
/// the usual way (state 1 = all four genes IBD, state 9 = none).
struct IdentityCoefficients {
  std::array<double, 9> delta{};

  double kinship() const noexcept {
    return delta[0] + 0.5 * (delta[2] + delta[4] + delta[6]) + 0.25 * delta[7];
  }
};

/// Jacquard state (1..9) of genes (a, b) in one individual against (c, d)
/// in another; equal labels mean identical by descent.
int jacquard_state(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) noexcept;

struct GeneDropResult {
  std::vector<std::string> ids;
  std::size_t replicates = 0;
  /// upper triangle including the diagonal, row-major: see index()
  std::vector<IdentityCoefficients> pairs;
  KinshipMatrix kinship;  // phi recovered from the coefficients
  /// Non-inbred pairs whose Monte Carlo kinship sits more than
  /// 4 sqrt(phi(1-phi)/replicates) from the recurrence value.
  std::vector<std::pair<std::size_t, std::size_t>> flagged;

  std::size_t index(std::size_t i, std::size_t j) const noexcept;
  const IdentityCoefficients& at(std::size_t i, std::size_t j) const { return pairs[index(i, j)]; }
};

/// Monte Carlo gene dropping. Founders carry two unique allele labels; each
/// non-founder takes one uniformly chosen allele from each parent. The self
/// pair (i, i) compares the individual's two genes against themselves, so a
/// non-inbred self pair always lands in state 7.
///
/// Replicates are generated in fixed blocks, each with its own generator
/// seeded from (seed, block), so results depend only on (seed, replicates).
GeneDropResult gene_drop(const Pedigree& pedigree, std::size_t replicates, std::uint64_t seed);

}  // namespace genokit::ped
