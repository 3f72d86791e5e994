#include "genokit/plink.hpp"

#include <fstream>
#include <iterator>

#include "genokit/error.hpp"
#include "genokit/table.hpp"

namespace genokit::snp {
namespace {

template <typename Fn>
void for_each_record(const std::string& path, std::size_t n_fields, Fn&& fn) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (fields.size() != n_fields)
      fail(ErrorKind::Parse, where + ": expected " + std::to_string(n_fields) +
                                 " fields, found " + std::to_string(fields.size()));
    fn(fields, where);
  }
}

}  // namespace

std::vector<SnpInfo> read_bim(const std::string& path) {
  std::vector<SnpInfo> snps;
  for_each_record(path, 6, [&](const auto& f, const std::string& where) {
    SnpInfo s;
    s.chromosome = std::string(f[0]);
    s.id = std::string(f[1]);
    s.genetic_distance = parse_double(f[2], where);
    s.position = parse_int(f[3], where);
    s.allele1 = std::string(f[4]);
    s.allele2 = std::string(f[5]);
    snps.push_back(std::move(s));
  });
  return snps;
}

std::vector<SubjectInfo> read_fam(const std::string& path) {
  std::vector<SubjectInfo> subjects;
  for_each_record(path, 6, [&](const auto& f, const std::string& where) {
    SubjectInfo s;
    s.family_id = std::string(f[0]);
    s.individual_id = std::string(f[1]);
    s.father_id = std::string(f[2]);
    s.mother_id = std::string(f[3]);
    s.sex = static_cast<int>(parse_int(f[4], where));
    s.phenotype = std::string(f[5]);
    subjects.push_back(std::move(s));
  });
  return subjects;
}

PackedGenotypeMatrix read_plink(const std::string& bed_path,
                                const std::string& bim_path,
                                const std::string& fam_path) {
  auto snps = read_bim(bim_path);
  auto subjects = read_fam(fam_path);

  std::ifstream in(bed_path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + bed_path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 3 || bytes[0] != kBedMagic[0] || bytes[1] != kBedMagic[1])
    fail(ErrorKind::Format, bed_path + ": missing PLINK .bed magic bytes");
  if (bytes[2] != kBedMagic[2])
    fail(ErrorKind::Format, bed_path + ": only SNP-major .bed files are supported");

  const std::size_t bps = (subjects.size() + 3) / 4;
  const std::size_t payload = bytes.size() - 3;
  if (payload != snps.size() * bps)
    fail(ErrorKind::Consistency,
         bed_path + ": payload of " + std::to_string(payload) + " bytes does not match " +
             std::to_string(snps.size()) + " SNPs x " + std::to_string(subjects.size()) +
             " subjects");
  std::vector<std::uint8_t> data(bytes.begin() + 3, bytes.end());
  return PackedGenotypeMatrix(std::move(data), std::move(snps), std::move(subjects));
}

PackedGenotypeMatrix read_plink(const std::string& prefix) {
  return read_plink(prefix + ".bed", prefix + ".bim", prefix + ".fam");
}

void write_plink(const PackedGenotypeMatrix& matrix, const std::string& prefix) {
  {
    std::ofstream out(prefix + ".bed", std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + prefix + ".bed");
    out.write(reinterpret_cast<const char*>(kBedMagic), 3);
    out.write(reinterpret_cast<const char*>(matrix.data().data()),
              static_cast<std::streamsize>(matrix.data().size()));
    if (!out) fail(ErrorKind::Io, "write failed: " + prefix + ".bed");
  }
  {
    std::ofstream out(prefix + ".bim");
    if (!out) fail(ErrorKind::Io, "cannot write " + prefix + ".bim");
    for (const auto& s : matrix.snps())
      out << s.chromosome << '\t' << s.id << '\t' << format_double(s.genetic_distance)
          << '\t' << s.position << '\t' << s.allele1 << '\t' << s.allele2 << '\n';
    if (!out) fail(ErrorKind::Io, "write failed: " + prefix + ".bim");
  }
  {
    std::ofstream out(prefix + ".fam");
    if (!out) fail(ErrorKind::Io, "cannot write " + prefix + ".fam");
    for (const auto& s : matrix.subjects())
      out << s.family_id << ' ' << s.individual_id << ' ' << s.father_id << ' '
          << s.mother_id << ' ' << s.sex << ' ' << s.phenotype << '\n';
    if (!out) fail(ErrorKind::Io, "write failed: " + prefix + ".fam");
  }
}

}  // namespace genokit::snp
