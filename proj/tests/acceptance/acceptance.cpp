// Acceptance suite: one PASS/FAIL line per criterion. `acceptance` runs all
// ten, `acceptance 7` only the seventh.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "genokit/assoc.hpp"
#include "genokit/completion.hpp"
#include "genokit/empirical_kinship.hpp"
#include "genokit/iht.hpp"
#include "genokit/impute.hpp"
#include "genokit/numeric.hpp"
#include "genokit/parallel.hpp"
#include "genokit/pedigree.hpp"
#include "genokit/plink.hpp"
#include "genokit/simulate.hpp"
#include "genokit/vc.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace genokit;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Report {
  std::vector<std::pair<bool, std::string>> checks;

  void check(bool ok, std::string what) { checks.emplace_back(ok, std::move(what)); }
  bool ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.first; });
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

MatrixXd gaussian(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  MatrixXd a(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) a(i, j) = z(rng);
  return a;
}

std::vector<double> uniform_freqs(std::size_t m, std::mt19937_64& rng, double lo = 0.1,
                                  double hi = 0.9) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> f(m);
  for (auto& p : f) p = u(rng);
  return f;
}

double rel_err(const MatrixXd& got, const MatrixXd& want) {
  const double scale = std::max(want.cwiseAbs().maxCoeff(), 1e-300);
  return (got - want).cwiseAbs().maxCoeff() / scale;
}

bool nondecreasing(const std::vector<double>& t) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] < t[i - 1] - 1e-10 * std::max(1.0, std::abs(t[i - 1]))) return false;
  return true;
}

bool nonincreasing(const std::vector<double>& t) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] > t[i - 1] + 1e-12 * std::max(1.0, std::abs(t[i - 1]))) return false;
  return true;
}

/// `families` nuclear families of two founders and two children.
ped::Pedigree nuclear_families(std::size_t families) {
  std::vector<ped::PedigreeRecord> r;
  for (std::size_t f = 0; f < families; ++f) {
    const std::string p = "F" + std::to_string(f) + "_";
    r.push_back({p + "1", "0", "0"});
    r.push_back({p + "2", "0", "0"});
    r.push_back({p + "3", p + "1", p + "2"});
    r.push_back({p + "4", p + "1", p + "2"});
  }
  return ped::Pedigree::from_records(r);
}

MatrixXd with_intercept(const MatrixXd& z) {
  MatrixXd X(z.rows(), z.cols() + 1);
  X.col(0).setOnes();
  X.rightCols(z.cols()) = z;
  return X;
}

// ------------------------------------------------------------ 1 format

void format_fidelity(Report& rep) {
  oracle::ScratchDir dir;
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> nd(1, 64), md(1, 256), chr(1, 22);
  std::uniform_real_distribution<double> u;
  int identical = 0, decoded = 0;
  const int trips = 1000;
  for (int t = 0; t < trips; ++t) {
    const int n = nd(rng), m = md(rng);
    const double miss = 0.2 * u(rng);
    MatrixXd x(n, m);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < n; ++i)
        x(i, j) = u(rng) < miss ? std::nan("") : std::floor(3 * u(rng));
    std::vector<snp::SnpInfo> snps;
    long long pos = 0;
    for (int j = 0; j < m; ++j) {
      pos += 1 + static_cast<long long>(1000 * u(rng));
      snps.push_back({std::to_string(chr(rng)), "v" + std::to_string(j), 0.5 * j, pos,
                      u(rng) < 0.5 ? "A" : "C", u(rng) < 0.5 ? "G" : "T"});
    }
    const auto g = snp::PackedGenotypeMatrix::from_dosages(x, snps);
    // fresh names each trip: truncating an existing file is slow on some filesystems
    const std::string a = dir / ("a" + std::to_string(t)), b = dir / ("b" + std::to_string(t));
    snp::write_plink(g, a);
    const auto back = snp::read_plink(a);
    snp::write_plink(back, b);
    bool same = back == g;
    for (const char* ext : {".bed", ".bim", ".fam"})
      same = same && oracle::slurp(a + ext) == oracle::slurp(b + ext);
    same = same && oracle::slurp(a + ".bed").size() ==
                       3 + static_cast<std::size_t>(m) * static_cast<std::size_t>((n + 3) / 4);
    identical += same;
    bool values = true;
    for (int j = 0; j < m && values; ++j)
      for (int i = 0; i < n; ++i) {
        const int want = std::isnan(x(i, j)) ? snp::kMissingDosage : static_cast<int>(x(i, j));
        if (back.dosage(i, j) != want) {
          values = false;
          break;
        }
      }
    decoded += values;
    for (const auto& prefix : {a, b})
      for (const char* ext : {".bed", ".bim", ".fam"}) std::filesystem::remove(prefix + ext);
  }
  rep.check(identical == trips,
            std::to_string(identical) + "/1000 round-trips bit-identical (bed/bim/fam)");
  rep.check(decoded == trips, std::to_string(decoded) + "/1000 decoded dosages equal the input");

  // every byte value: 4 subjects, SNP b holds byte b
  const int code_dosage[4] = {2, snp::kMissingDosage, 1, 0};  // 00, 01, 10, 11
  {
    std::ofstream bed(dir / "crafted.bed", std::ios::binary);
    bed.put(0x6c).put(0x1b).put(0x01);
    for (int b = 0; b < 256; ++b) bed.put(static_cast<char>(b));
    std::ofstream bim(dir / "crafted.bim");
    for (int b = 0; b < 256; ++b) bim << "1\tb" << b << "\t0\t" << (b + 1) << "\tA\tG\n";
    std::ofstream fam(dir / "crafted.fam");
    for (int i = 0; i < 4; ++i) fam << "F I" << i << " 0 0 0 -9\n";
  }
  const auto crafted = snp::read_plink(dir / "crafted");
  int wrong = 0;
  for (int b = 0; b < 256; ++b)
    for (int i = 0; i < 4; ++i) wrong += crafted.dosage(i, b) != code_dosage[(b >> (2 * i)) & 3];
  rep.check(wrong == 0, "all 256 byte values decode per the code table (" +
                            std::to_string(wrong) + " mismatches)");

  // 3 subjects: the 4th slot is padding and must come back as 00
  {
    std::ofstream bed(dir / "pad.bed", std::ios::binary);
    bed.put(0x6c).put(0x1b).put(0x01);
    bed.put(static_cast<char>(0xE4));  // 11 10 01 00 from the high bits down
    std::ofstream(dir / "pad.bim") << "1\tp\t0\t1\tA\tG\n";
    std::ofstream fam(dir / "pad.fam");
    for (int i = 0; i < 3; ++i) fam << "F I" << i << " 0 0 0 -9\n";
  }
  const auto pad = snp::read_plink(dir / "pad");
  snp::write_plink(pad, dir / "pad2");
  const auto bytes = oracle::slurp(dir / "pad2.bed");
  const bool pad_ok = pad.dosage(0, 0) == 2 && pad.dosage(1, 0) == snp::kMissingDosage &&
                      pad.dosage(2, 0) == 1 && bytes.size() == 4 &&
                      static_cast<unsigned char>(bytes[3]) == 0x24;
  rep.check(pad_ok, "pad bits of a 3-subject SNP decode correctly and are written as 00");
}

// ------------------------------------------------------------ 2 kernels

MatrixXd dense_transform(const MatrixXd& x, snp::Scaling scaling) {
  MatrixXd a(x.rows(), x.cols());
  const auto freqs = oracle::column_freqs(x);
  for (Index k = 0; k < x.cols(); ++k) {
    const double p = freqs[static_cast<std::size_t>(k)];
    for (Index i = 0; i < x.rows(); ++i) {
      if (std::isnan(p)) {
        a(i, k) = 0.0;
        continue;
      }
      const double v = std::isnan(x(i, k)) ? 2 * p : x(i, k);
      switch (scaling) {
        case snp::Scaling::Raw: a(i, k) = v; break;
        case snp::Scaling::Centered: a(i, k) = v - 2 * p; break;
        case snp::Scaling::Standardized:
          a(i, k) = p <= 0 || p >= 1 ? 0.0 : (v - 2 * p) / std::sqrt(2 * p * (1 - p));
          break;
      }
    }
  }
  return a;
}

void packed_kernels(Report& rep) {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> nd(5, 120), md(5, 300);
  double gemv = 0.0, grm = 0.0, robust = 0.0, mom = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = nd(rng), m = md(rng);
    MatrixXd x = oracle::random_dosages(n, m, 0.05, rng);
    x.col(0).setConstant(2.0);  // one monomorphic column in every instance
    const auto g = sim::pack(x);
    for (auto s : {snp::Scaling::Raw, snp::Scaling::Centered, snp::Scaling::Standardized}) {
      const auto tr = snp::ColumnTransform::build(g, {s, snp::MissingPolicy::MeanImpute});
      const MatrixXd a = dense_transform(x, s);
      const VectorXd v = gaussian(m, 1, rng), w = gaussian(n, 1, rng);
      gemv = std::max(gemv, rel_err(snp::packed_gemv(g, tr, v, false), a * v));
      gemv = std::max(gemv, rel_err(snp::packed_gemv(g, tr, w, true), a.transpose() * w));
    }
    const auto f = oracle::column_freqs(x);
    grm = std::max(grm, rel_err(kin::grm(g).values, oracle::naive_grm(x, f)));
    robust = std::max(robust, rel_err(kin::robust_grm(g).values, oracle::naive_robust_grm(x, f)));
    mom = std::max(mom, rel_err(kin::mom_kinship(g).values, oracle::naive_mom(x, f)));
  }
  rep.check(gemv <= 1e-10, fmt("packed_gemv (3 scalings, both directions) max rel err %.2e", gemv));
  rep.check(grm <= 1e-10, fmt("GRM max rel err %.2e", grm));
  rep.check(robust <= 1e-10, fmt("robust GRM max rel err %.2e", robust));
  rep.check(mom <= 1e-10, fmt("MoM kinship max rel err %.2e", mom));
}

// ------------------------------------------------------------ 3 kinship

void kinship_concordance(Report& rep) {
  const std::string base = std::string(GENOKIT_TEST_DATA) + "/pedigrees/";
  for (const char* name : {"nuclear", "three_generation", "full_sib_mating", "half_sibs",
                           "first_cousins"}) {
    const auto ped = ped::read_pedigree(base + name + ".csv");
    const auto k = ped::theoretical_kinship(ped);
    std::map<std::pair<std::string, std::string>, double> want;
    std::ifstream in(base + name + ".kinship");
    std::string a, b, v;
    while (in >> a >> b >> v) want[{a, b}] = want[{b, a}] = oracle::parse_fraction(v);
    int exact = 0, total = 0;
    for (std::size_t i = 0; i < ped.size(); ++i)
      for (std::size_t j = 0; j < ped.size(); ++j) {
        const auto it = want.find({ped.id(i), ped.id(j)});
        const double w = it == want.end() ? 0.0 : it->second;
        ++total;
        exact += k.values(static_cast<Index>(i), static_cast<Index>(j)) == w;
      }
    rep.check(exact == total, std::string(name) + ": " + std::to_string(exact) + "/" +
                                  std::to_string(total) + " entries exactly equal");
    const auto drop = ped::gene_drop(ped, 100000, 303);
    const double dev = (drop.kinship.values - k.values).cwiseAbs().maxCoeff();
    rep.check(dev <= 0.01, std::string(name) + fmt(": gene drop 1e5 max |dev| %.4f", dev));
  }
}

// ------------------------------------------------------------ 4 GRM variance

void grm_variance(Report& rep) {
  // three families: grandparents, parents, two grandchildren; a second couple
  // with one child
  const auto ped = ped::Pedigree::from_records({{"P1", "0", "0"},
                                                {"P2", "0", "0"},
                                                {"C1", "P1", "P2"},
                                                {"C2", "P1", "P2"},
                                                {"P3", "0", "0"},
                                                {"G1", "C1", "P3"},
                                                {"G2", "C1", "P3"},
                                                {"P4", "0", "0"},
                                                {"P5", "0", "0"},
                                                {"S1", "P4", "P5"}});
  const MatrixXd phi = ped::theoretical_kinship(ped).values;
  const Index n = 10, K = 2000;
  const int reps = 500;
  const double rho = 0.5;
  std::mt19937_64 rng(404);
  const auto p = uniform_freqs(static_cast<std::size_t>(K), rng);
  MatrixXd R(K, K);
  for (Index k = 0; k < K; ++k)
    for (Index l = 0; l < K; ++l) R(k, l) = std::pow(rho, std::abs(double(k - l)));
  const MatrixXd L = (2.0 * phi).llt().matrixL();
  VectorXd sd(K);
  for (Index k = 0; k < K; ++k) sd[k] = std::sqrt(2 * p[static_cast<std::size_t>(k)] * (1 - p[static_cast<std::size_t>(k)]));
  double acc = 0.0;
  for (int r = 0; r < reps; ++r) {
    MatrixXd z = L * gaussian(n, K, rng);  // rows ~ N(0, 2 Phi)
    for (Index k = 1; k < K; ++k) z.col(k) = rho * z.col(k - 1) + std::sqrt(1 - rho * rho) * z.col(k);
    MatrixXd x(n, K);
    for (Index k = 0; k < K; ++k)
      x.col(k) = (2.0 * p[static_cast<std::size_t>(k)]) + sd[k] * z.col(k).array();
    acc += (kin::grm_from_dosages(x, p) - phi).squaredNorm();
  }
  const double empirical = acc / reps;
  const double approx = kin::grm_variance_approx(phi, kin::LdMatrix{R}, static_cast<std::size_t>(K));
  const double rel = std::abs(empirical - approx) / approx;
  rep.check(rel <= 0.15, fmt("E||S - ES||^2 empirical %.6g vs approximation %.6g", empirical, approx) +
                             fmt(" (rel diff %.3f)", rel));
}

// ------------------------------------------------------------ 5 imputation

void imputation(Report& rep) {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u;
  // monotone loss on random ALS and SVD-impute runs
  int monotone = 0, runs = 0;
  for (int t = 0; t < 20; ++t) {
    const MatrixXd x = gaussian(60, 3, rng) * gaussian(3, 50, rng) + 0.3 * gaussian(60, 50, rng);
    mc::ObservationMask mask(60, 50, true);
    for (Index j = 0; j < 50; ++j)
      for (Index i = 0; i < 60; ++i)
        if (u(rng) < 0.15) mask.set(i, j, false);
    const Index rank = 1 + t % 4;
    for (auto solver : {mc::Solver::Als, mc::Solver::SvdImpute}) {
      const auto fit = mc::complete(x, mask, rank, 1000 + t, {1e-8, 300}, solver);
      monotone += nonincreasing(fit.loss);
      ++runs;
    }
  }
  // rank-1 masked recovery
  double worst = 0.0;
  for (int t = 0; t < 5; ++t) {
    const MatrixXd x = gaussian(40, 1, rng) * gaussian(1, 30, rng);
    mc::ObservationMask mask(40, 30, true);
    for (Index j = 0; j < 30; ++j)
      for (Index i = 0; i < 40; ++i)
        if (u(rng) < 0.1) mask.set(i, j, false);
    for (auto solver : {mc::Solver::SvdImpute, mc::Solver::Als}) {
      const auto fit = mc::complete(x, mask, 1, 2000 + t, {1e-14, 5000}, solver);
      monotone += nonincreasing(fit.loss);
      ++runs;
      const MatrixXd y = fit.factors.product();
      for (Index j = 0; j < 30; ++j)
        for (Index i = 0; i < 40; ++i)
          if (!mask.observed(i, j)) worst = std::max(worst, std::abs(y(i, j) - x(i, j)));
    }
  }
  rep.check(monotone == runs, std::to_string(monotone) + "/" + std::to_string(runs) +
                                  " solver runs with non-increasing loss");
  rep.check(worst <= 1e-6, fmt("rank-1 masked recovery max error %.2e", worst));

  // rank-3 panel
  const MatrixXd truth = sim::haplotype_panel(200, 300, 3, 506);
  const MatrixXd observed = sim::mask_at_random(truth, 0.05, 507);
  mc::WindowPlan plan;
  plan.seed = 508;
  const auto r = mc::impute(sim::pack(observed), std::nullopt, plan);
  int masked = 0, correct = 0;
  for (Index j = 0; j < 300; ++j)
    for (Index i = 0; i < 200; ++i)
      if (std::isnan(observed(i, j))) {
        ++masked;
        correct += r.hard_calls.dosage(i, j) == static_cast<int>(truth(i, j));
      }
  const double acc = double(correct) / std::max(masked, 1);
  rep.check(acc > 0.95, fmt("rank-3 panel masked hard-call accuracy %.4f", acc) + " over " +
                            std::to_string(masked) + " entries");

  int hits = 0;
  for (int t = 0; t < 20; ++t) {
    const MatrixXd panel = sim::haplotype_panel(200, 300, 3, 600 + t);
    const MatrixXd obs = sim::mask_at_random(panel, 0.05, 700 + t);
    const auto sel =
        mc::select_rank(obs, mc::ObservationMask::of(obs), {1, 2, 3, 5, 8}, 0.1, 800 + t);
    hits += sel.rank == 3;
  }
  rep.check(hits >= 16, "select_rank found the planted rank 3 in " + std::to_string(hits) + "/20");
}

// ------------------------------------------------------------ 6 IHT

void iht_criterion(Report& rep) {
  std::mt19937_64 rng(606);
  double exact = 0.0;
  for (int t = 0; t < 5; ++t) {
    const MatrixXd x = oracle::random_orthonormal(60, 12, rng);
    const VectorXd y = gaussian(60, 1, rng);
    iht::IhtConfig cfg;
    cfg.k = 12;
    const auto fit = iht::iht_fit(iht::DenseDesign(x), y, cfg);
    exact = std::max(exact, (fit.beta - x.transpose() * y).cwiseAbs().maxCoeff());
    if (fit.loss.size() >= 2)
      exact = std::max(exact, std::abs(fit.loss[1] - 0.5 * (y - x * (x.transpose() * y)).squaredNorm()));
    else
      exact = INFINITY;
  }
  rep.check(exact <= 1e-12, fmt("orthonormal design: one step gives least squares (err %.1e)", exact));

  const int n = 500, p = 2000, k = 10;
  int hits = 0, descending = 0;
  for (int t = 0; t < 50; ++t) {
    const MatrixXd dose = sim::hwe_dosages(n, uniform_freqs(p, rng), 6000 + t);
    const auto g = sim::pack(dose);
    const MatrixXd z = snp::decompress(g, snp::NumericOptions{});
    std::vector<Index> idx(p);
    for (int j = 0; j < p; ++j) idx[static_cast<std::size_t>(j)] = j;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::set<Index> truth(idx.begin(), idx.begin() + k);
    VectorXd beta = VectorXd::Zero(p);
    int sign = 1;
    for (Index j : truth) beta[j] = 0.5 * (sign = -sign);
    const VectorXd y = z * beta + gaussian(n, 1, rng);
    iht::IhtConfig cfg;
    cfg.k = k;
    const auto fit = iht::iht_fit(iht::PackedDesign(g), y, cfg);
    hits += std::set<Index>(fit.support.begin(), fit.support.end()) == truth;
    descending += nonincreasing(fit.loss);
  }
  rep.check(hits >= 45, "planted support (n=500, p=2000, k=10) recovered in " +
                            std::to_string(hits) + "/50");
  rep.check(descending == 50, std::to_string(descending) + "/50 fits descend at every accepted step");

  int chosen = 0;
  for (int t = 0; t < 20; ++t) {
    const MatrixXd dose = sim::hwe_dosages(300, uniform_freqs(1000, rng), 6100 + t);
    const auto g = sim::pack(dose);
    const MatrixXd z = snp::decompress(g, snp::NumericOptions{});
    VectorXd beta = VectorXd::Zero(1000);
    std::vector<Index> idx(1000);
    for (int j = 0; j < 1000; ++j) idx[static_cast<std::size_t>(j)] = j;
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int j = 0; j < 5; ++j) beta[idx[static_cast<std::size_t>(j)]] = j % 2 ? -0.8 : 0.8;
    const VectorXd y = z * beta + gaussian(300, 1, rng);
    iht::IhtConfig cfg;
    cfg.seed = 6200 + t;
    const auto cv = iht::cross_validate_k(iht::PackedDesign(g), y, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, cfg);
    chosen += cv.k == 5;
  }
  rep.check(chosen > 10, "cross_validate_k chose the planted k=5 in " + std::to_string(chosen) + "/20");
}

// ------------------------------------------------------------ 7 variance components

void variance_components(Report& rep) {
  std::mt19937_64 rng(707);
  vc::MmOptions tight;
  tight.tol = 1e-14;
  tight.param_tol = 1e-14;
  tight.max_iter = 100000;
  int monotone = 0, fits = 0;
  auto track = [&](const vc::VcEstimate& e) {
    monotone += nondecreasing(e.trace);
    ++fits;
  };

  double ols = 0.0;
  for (int t = 0; t < 10; ++t) {
    const int n = 80;
    const MatrixXd X = with_intercept(gaussian(n, 2, rng));
    const VectorXd y = X * VectorXd::Ones(3) + gaussian(n, 1, rng);
    const auto fit = vc::mm_fit({y, X, {vc::Component::identity("e", n)}}, tight);
    track(fit);
    const VectorXd b = X.colPivHouseholderQr().solve(y);
    const double s2 = (y - X * b).squaredNorm() / n;
    ols = std::max({ols, (fit.beta - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(),
                    std::abs(fit.sigma2[0] - s2) / s2});
  }
  rep.check(ols <= 1e-10, fmt("V = I: mm_fit equals OLS (max rel err %.1e)", ols));

  // spectral against dense on pedigree kinship
  const auto ped = nuclear_families(50);
  const MatrixXd K = 2.0 * ped::theoretical_kinship(ped).values;
  const Index n = K.rows();
  double gap = 0.0;
  for (int t = 0; t < 10; ++t) {
    const MatrixXd X = with_intercept(gaussian(n, 1, rng));
    VectorXd s(2);
    s << 0.5 + t * 0.2, 1.0;
    const VectorXd y = sim::trait(X, VectorXd::Ones(2), {K, MatrixXd::Identity(n, n)}, s, 7000 + t);
    const vc::VcModel m{y, X, {{"genetic", K, true}, vc::Component::identity("environment", n)}};
    const auto dense = vc::mm_fit(m, tight);
    const auto spec = vc::spectral_fit(y, X, K, tight);
    track(dense);
    track(spec);
    gap = std::max({gap, (dense.sigma2 - spec.sigma2).cwiseAbs().maxCoeff(),
                    (dense.beta - spec.beta).cwiseAbs().maxCoeff(),
                    std::abs(dense.loglik - spec.loglik) / std::abs(dense.loglik)});
  }
  rep.check(gap <= 1e-6, fmt("spectral equals dense on 10 pedigree fits (max diff %.1e)", gap));

  // per-iteration speed at n = 2000
  {
    const MatrixXd K2 = 2.0 * ped::theoretical_kinship(nuclear_families(500)).values;
    const Index N = K2.rows();
    const MatrixXd X = with_intercept(gaussian(N, 1, rng));
    VectorXd s(2);
    s << 1.0, 1.0;
    const VectorXd y = sim::trait(X, VectorXd::Ones(2), {K2, MatrixXd::Identity(N, N)}, s, 7100);
    vc::MmOptions few;
    few.max_iter = 3;
    const auto dense = vc::mm_fit(
        {y, X, {{"genetic", K2, true}, vc::Component::identity("environment", N)}}, few);
    vc::MmOptions many;
    many.max_iter = 200;
    const auto spec = vc::spectral_fit(y, X, K2, many);
    track(dense);
    track(spec);
    auto mean = [](const std::vector<double>& v) {
      double a = 0;
      for (double x : v) a += x;
      return v.empty() ? NAN : a / double(v.size());
    };
    const double td = mean(dense.seconds), ts = mean(spec.seconds);
    rep.check(td >= 10 * ts, fmt("n=2000 per-iteration: dense %.3g s, spectral %.3g s", td, ts) +
                                 fmt(" (ratio %.0f)", td / ts));
  }

  // gradient against central differences
  double grad = 0.0;
  for (int t = 0; t < 5; ++t) {
    const int m = 40;
    const MatrixXd X = with_intercept(gaussian(m, 1, rng));
    const MatrixXd u1 = gaussian(m, 10, rng), u2 = gaussian(m, 5, rng);
    const vc::VcModel model{gaussian(m, 1, rng).col(0), X,
                            {vc::Component::from_factor("a", u1 / std::sqrt(10.0)),
                             vc::Component::from_factor("b", u2 / std::sqrt(5.0)),
                             vc::Component::identity("e", m)}};
    VectorXd beta(2), s(3);
    beta << 0.3, -0.2;
    s << 0.6 + 0.1 * t, 0.4, 1.1;
    const VectorXd gr = vc::loglik_gradient(model, beta, s);
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-6;
      VectorXd up = s, dn = s;
      up[j] += h;
      dn[j] -= h;
      const double fd = (vc::loglik(model, beta, up) - vc::loglik(model, beta, dn)) / (2 * h);
      grad = std::max(grad, std::abs(gr[j] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  rep.check(grad <= 1e-5, fmt("gradient vs central differences max rel err %.1e", grad));

  // null p-values for one extra fixed effect under the two-component null
  {
    const MatrixXd X = with_intercept(gaussian(n, 1, rng));
    VectorXd s(2);
    s << 1.0, 1.0;
    const auto base = vc::TwoComponentSpectral::build(K, VectorXd::Zero(n), X);
    vc::MmOptions opt;
    opt.tol = 1e-10;
    opt.param_tol = 1e-10;
    std::vector<double> lrt_p, score_p;
    const std::vector<double> freq{0.3};
    for (int r = 0; r < 500; ++r) {
      const VectorXd y = sim::trait(X, VectorXd::Zero(2), {K, MatrixXd::Identity(n, n)}, s, 7200 + r);
      VectorXd g = sim::hwe_dosages(static_cast<std::size_t>(n), freq, 9000 + r).col(0);
      const auto cache = base.with_response(y);
      const auto null = vc::spectral_fit(cache, opt);
      const auto alt = vc::spectral_fit(cache.with_covariate(g), opt);
      track(null);
      track(alt);
      lrt_p.push_back(vc::lrt(null, alt).p_value);
      score_p.push_back(vc::ScoreTester::spectral(cache, null).test(g).p_value);
    }
    const double ks_lrt = oracle::ks_uniform_p(lrt_p), ks_score = oracle::ks_uniform_p(score_p);
    rep.check(ks_lrt > 0.01, fmt("null LRT p-values: KS p = %.3f (500 reps)", ks_lrt));
    rep.check(ks_score > 0.01, fmt("null score p-values: KS p = %.3f (500 reps)", ks_score));
  }
  rep.check(monotone == fits, std::to_string(monotone) + "/" + std::to_string(fits) +
                                  " fits with non-decreasing loglik");
}

// ------------------------------------------------------------ 8 penalized

void penalized_selection(Report& rep) {
  std::mt19937_64 rng(808);
  const int n = 200, q = 50;
  bool equal = true;
  int hits = 0;
  for (int t = 0; t < 20; ++t) {
    std::vector<vc::Component> comps;
    std::vector<MatrixXd> V;
    for (int j = 0; j < 5; ++j) {
      comps.push_back(vc::Component::from_factor("c" + std::to_string(j + 1),
                                                 gaussian(n, q, rng) / std::sqrt(double(q))));
      V.push_back(comps.back().V);
    }
    comps.push_back(vc::Component::identity("environment", n));
    V.push_back(MatrixXd::Identity(n, n));
    VectorXd s(6);
    s << 1.5, 1.5, 0, 0, 0, 1.0;
    const MatrixXd X = MatrixXd::Ones(n, 1);
    const VectorXd y = sim::trait(X, VectorXd::Ones(1), V, s, 8000 + t);
    const vc::VcModel model{y, X, comps};
    vc::MmOptions opt;
    opt.tol = 1e-8;
    opt.max_iter = 2000;
    if (t < 3) {
      const auto base = vc::mm_fit(model, opt);
      for (auto kind : {vc::Penalty::Lasso, vc::Penalty::Ridge, vc::Penalty::Scad, vc::Penalty::Mcp}) {
        const auto pen = vc::penalized_fit(model, {kind, 0.0}, opt);
        equal = equal && pen.fit.sigma2 == base.sigma2 && pen.fit.loglik == base.loglik &&
                pen.fit.beta == base.beta;
      }
    }
    bool found = false;
    for (double lambda = 0.05; lambda < 60 && !found; lambda *= 1.6) {
      const auto pen = vc::penalized_fit(model, {vc::Penalty::Lasso, lambda}, opt);
      found = pen.selected[0] && pen.selected[1] && !pen.selected[2] && !pen.selected[3] &&
              !pen.selected[4];
    }
    hits += found;
  }
  rep.check(equal, "lambda = 0 reproduces mm_fit exactly for all four penalties");
  rep.check(hits >= 16, "lasso path isolates the 2 planted of 5 components in " +
                            std::to_string(hits) + "/20");
}

// ------------------------------------------------------------ 9 GWAS

void gwas_criterion(Report& rep) {
  std::mt19937_64 rng(909);
  double worst = 0.0;
  for (int t = 0; t < 3; ++t) {
    const int n = 300, m = 200;
    MatrixXd x = sim::mask_at_random(sim::hwe_dosages(n, uniform_freqs(m, rng), 9100 + t), 0.02, 9150 + t);
    const MatrixXd X = with_intercept(gaussian(n, 2, rng));
    const VectorXd y = X * VectorXd::Ones(3) + gaussian(n, 1, rng);
    const auto r = assoc::gwas_scan(sim::pack(x), y, X, std::nullopt);
    const MatrixXd filled = oracle::mean_imputed(x);
    for (const auto& row : r.rows) {
      const double want = oracle::regression_score(y, X, filled.col(static_cast<Index>(row.index)));
      worst = std::max(worst, std::abs(row.statistic - want) / std::max(1.0, want));
    }
  }
  rep.check(worst <= 1e-8, fmt("iid score vs regression oracle max rel err %.1e", worst));

  {
    const int n = 1000, m = 5000;
    const Index j = 2718;
    const MatrixXd x = sim::hwe_dosages(n, uniform_freqs(m, rng), 9200);
    const MatrixXd X = with_intercept(gaussian(n, 1, rng));
    // noise orthogonal to X and to the adjusted SNP, so the realized effect is
    // exactly 5 standard errors
    const MatrixXd H = X * (X.transpose() * X).inverse() * X.transpose();
    const VectorXd g = x.col(j) - H * x.col(j);
    VectorXd e = gaussian(n, 1, rng);
    e -= H * e;
    e -= (e.dot(g) / g.squaredNorm()) * g;
    e *= std::sqrt(n / e.squaredNorm());
    const VectorXd y = X.col(1) + (5.0 / g.norm()) * g + e;
    assoc::ScanOptions opt;
    const auto r = assoc::gwas_scan(sim::pack(x), y, X, std::nullopt, opt);
    std::size_t best = 0;
    for (std::size_t i = 1; i < r.rows.size(); ++i)
      if (r.rows[i].p_value < r.rows[best].p_value) best = i;
    const auto& top = r.rows[best];
    rep.check(top.index == static_cast<std::size_t>(j),
              "planted 5-SE SNP ranks first of 5000 (top is column " + std::to_string(top.index) + ")");
    rep.check(top.refined && top.lrt_p_value < opt.refine_threshold,
              fmt("planted SNP refined by LRT, LRT p = %.2e", top.lrt_p_value));
  }

  {
    const auto s = sim::two_populations(600, 3000, 0.15, 9300);
    const VectorXd y = s.population + gaussian(600, 1, rng);
    const auto g = sim::pack(s.dosages);
    const MatrixXd X = MatrixXd::Ones(600, 1);
    const auto raw = assoc::gwas_scan(g, y, X, std::nullopt);
    const auto pcs = assoc::add_pc_covariates(g, X, 1);
    const auto adj = assoc::gwas_scan(g, y, pcs.covariates, std::nullopt);
    rep.check(raw.lambda_gc > 1.1 && std::abs(adj.lambda_gc - 1) < std::abs(raw.lambda_gc - 1),
              fmt("structured sample lambda_GC %.3f without PCs, %.3f with 1 PC", raw.lambda_gc,
                  adj.lambda_gc));
  }
}

// ------------------------------------------------------------ 10 CLI

std::map<std::string, std::string> pipeline(const std::string& dir, unsigned threads, std::string& error) {
  const std::string t = std::to_string(threads);
  const std::string d = dir + "/";
  const std::vector<std::vector<std::string>> steps = {
      {"simulate", "--families", "100", "--snps", "2000", "--out", d + "sim"},
      {"summarize", "--bed", d + "sim", "--out", d + "summary.tsv", "--subjects-out", d + "subjects.tsv"},
      {"filter", "--bed", d + "sim", "--out", d + "qc", "--maf", "0.01"},
      {"kinship", "--pedigree", d + "qc.fam", "--estimator", "theoretical", "--out", d + "phi.tsv"},
      {"kinship", "--bed", d + "qc", "--estimator", "grm", "--out", d + "grm.tsv"},
      {"vcfit", "--pheno", d + "sim.pheno.tsv", "--covar", d + "sim.covar.tsv", "--kinship",
       d + "phi.tsv", "--kinship-scale", "kinship", "--out", d + "fit.txt"},
      {"gwas", "--bed", d + "qc", "--pheno", d + "sim.pheno.tsv", "--covar", d + "sim.covar.tsv",
       "--pcs", "2", "--kinship", d + "phi.tsv", "--kinship-scale", "kinship", "--refine", "1e-3",
       "--out", d + "gwas"}};
  for (const auto& step : steps) {
    std::vector<std::string> args = {"--quiet", "--seed", "11", "--threads", t};
    args.insert(args.end(), step.begin(), step.end());
    std::ostringstream out, err;
    if (cli::run(args, out, err) != 0) {
      error = step.front() + ": " + err.str();
      return {};
    }
  }
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    files[e.path().filename().string()] = oracle::slurp(e.path().string());
  return files;
}

void cli_reproducibility(Report& rep) {
  oracle::ScratchDir dir;
  std::string error;
  std::vector<std::map<std::string, std::string>> runs;
  for (auto [name, threads] : {std::pair{"a", 1u}, std::pair{"b", 1u}, std::pair{"c", 4u}}) {
    std::filesystem::create_directories(dir / name);
    runs.push_back(pipeline(dir / name, threads, error));
    if (!error.empty()) break;
  }
  rep.check(error.empty(), error.empty() ? "all pipeline steps exit 0" : "pipeline failed at " + error);
  if (!error.empty()) return;
  rep.check(runs[0].size() >= 15, std::to_string(runs[0].size()) + " output files per run");
  rep.check(runs[0] == runs[1], "two runs with the same seed are byte-identical");
  rep.check(runs[0] == runs[2], "threads 1 and 4 are byte-identical");
  set_thread_count(0);
}

struct Criterion {
  const char* name;
  double budget;  // seconds
  std::function<void(Report&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"format_fidelity", 10, format_fidelity},
      {"packed_kernels", 30, packed_kernels},
      {"kinship_concordance", 60, kinship_concordance},
      {"grm_variance", 120, grm_variance},
      {"imputation", 180, imputation},
      {"iht", 300, iht_criterion},
      {"variance_components", 600, variance_components},
      {"penalized_selection", 300, penalized_selection},
      {"gwas_scan", 300, gwas_criterion},
      {"cli_reproducibility", 300, cli_reproducibility},
  };
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const int c = std::atoi(argv[i]);
    if (c < 1 || c > static_cast<int>(all.size())) {
      std::fprintf(stderr, "usage: acceptance [criterion 1-10 ...]\n");
      return 2;
    }
    which.push_back(c);
  }
  if (which.empty())
    for (int i = 1; i <= static_cast<int>(all.size()); ++i) which.push_back(i);

  bool ok = true;
  for (int c : which) {
    const auto& cr = all[static_cast<std::size_t>(c - 1)];
    Report rep;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.run(rep);
    } catch (const std::exception& e) {
      rep.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.check(secs < cr.budget, fmt("runtime %.1f s (budget %.0f s)", secs, cr.budget));
    std::printf("%s %02d %s\n", rep.ok() ? "PASS" : "FAIL", c, cr.name);
    for (const auto& [pass, what] : rep.checks) std::printf("  [%s] %s\n", pass ? "ok" : "FAIL", what.c_str());
    std::fflush(stdout);
    ok = ok && rep.ok();
  }
  return ok ? 0 : 1;
}
