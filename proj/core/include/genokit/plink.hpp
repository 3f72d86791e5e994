#pragma once

#include <string>
#include <vector>

#include "genokit/genotypes.hpp"

namespace genokit::snp {

inline constexpr unsigned char kBedMagic[3] = {0x6C, 0x1B, 0x01};

std::vector<SnpInfo> read_bim(const std::string& path);
std::vector<SubjectInfo> read_fam(const std::string& path);

/// Reads a SNP-major PLINK binary triple without decoding genotypes.
PackedGenotypeMatrix read_plink(const std::string& bed_path,
                                const std::string& bim_path,
                                const std::string& fam_path);

/// Convenience overload: `prefix`.bed / .bim / .fam
PackedGenotypeMatrix read_plink(const std::string& prefix);

/// Writes `prefix`.bed / .bim / .fam. Pad bits are written as 0b00.
void write_plink(const PackedGenotypeMatrix& matrix, const std::string& prefix);

}  // namespace genokit::snp
