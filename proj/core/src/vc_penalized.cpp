#include <algorithm>
#include <cmath>

#include "genokit/error.hpp"
#include "genokit/vc.hpp"
#include "vc_engine.hpp"

namespace genokit::vc {

using Eigen::Index;
using Eigen::VectorXd;

Penalty parse_penalty(std::string_view name) {
  if (name == "ridge") return Penalty::Ridge;
  if (name == "lasso") return Penalty::Lasso;
  if (name == "scad") return Penalty::Scad;
  if (name == "mcp") return Penalty::Mcp;
  fail(ErrorKind::Argument, "unknown penalty '" + std::string(name) +
                                "' (expected ridge, lasso, scad or mcp)");
}

std::string_view to_string(Penalty p) noexcept {
  switch (p) {
    case Penalty::Ridge: return "ridge";
    case Penalty::Lasso: return "lasso";
    case Penalty::Scad: return "scad";
    case Penalty::Mcp: return "mcp";
  }
  return "lasso";
}

double penalty_value(const PenaltyOptions& p, double s) {
  const double l = p.lambda;
  switch (p.kind) {
    case Penalty::Ridge: return l * s * s;
    case Penalty::Lasso: return l * s;
    case Penalty::Scad: {
      const double a = p.scad_a;
      if (s <= l) return l * s;
      if (s <= a * l) return (2.0 * a * l * s - s * s - l * l) / (2.0 * (a - 1.0));
      return l * l * (a + 1.0) / 2.0;
    }
    case Penalty::Mcp: {
      const double g = p.mcp_gamma;
      if (s <= g * l) return l * s - s * s / (2.0 * g);
      return g * l * l / 2.0;
    }
  }
  return 0.0;
}

namespace {

/// Slope of the tangent used to majorize the concave penalties at s.
double tangent_slope(const PenaltyOptions& p, double s) {
  const double l = p.lambda;
  switch (p.kind) {
    case Penalty::Ridge: return 0.0;
    case Penalty::Lasso: return l;
    case Penalty::Scad:
      if (s <= l) return l;
      if (s <= p.scad_a * l) return (p.scad_a * l - s) / (p.scad_a - 1.0);
      return 0.0;
    case Penalty::Mcp: return std::max(l - s / p.mcp_gamma, 0.0);
  }
  return 0.0;
}

/// Positive root of c t^4 + w t^3 - a = 0 (c > 0, w >= 0, a >= 0).
double quartic_root(double c, double w, double a) {
  if (!(a > 0.0)) return 0.0;
  double lo = 0.0, hi = std::pow(a / c, 0.25);
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f = (c * mid + w) * mid * mid * mid - a;
    (f > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

PenalizedEstimate penalized_fit(const VcModel& model, const PenaltyOptions& penalty,
                                const MmOptions& options) {
  if (!(penalty.lambda >= 0.0)) fail(ErrorKind::Argument, "lambda must be >= 0");
  if (penalty.kind == Penalty::Scad && !(penalty.scad_a > 2.0))
    fail(ErrorKind::Argument, "SCAD parameter a must exceed 2");
  if (penalty.kind == Penalty::Mcp && !(penalty.mcp_gamma > 1.0))
    fail(ErrorKind::Argument, "MCP parameter gamma must exceed 1");
  model.validate();

  std::vector<double> diag;
  for (const auto& c : model.components) diag.push_back(c.V.diagonal().mean());
  VectorXd init = options.init ? *options.init : detail::default_init(model.y, diag);

  const double ridge = penalty.kind == Penalty::Ridge ? penalty.lambda : 0.0;
  auto update = [&](std::size_t j, double sigma2, double q, double c) {
    if (!model.components[j].penalized) return detail::mm_update(sigma2, q, c);
    const double w = tangent_slope(penalty, std::sqrt(sigma2));
    if (w == 0.0 && ridge == 0.0) return detail::mm_update(sigma2, q, c);
    if (!(c > 0.0)) return 0.0;
    const double t = quartic_root(c + 2.0 * ridge, w, sigma2 * sigma2 * std::max(q, 0.0));
    return t * t;
  };
  auto term = [&](const VectorXd& sigma2) {
    double s = 0.0;
    for (std::size_t j = 0; j < model.k(); ++j)
      if (model.components[j].penalized)
        s += penalty_value(penalty, std::sqrt(sigma2[static_cast<Index>(j)]));
    return s;
  };

  detail::DenseBackend backend(model);
  auto result = detail::run_mm(backend, std::move(init), options, update, term);
  PenalizedEstimate out;
  out.fit = std::move(result.estimate);
  out.fit.labels = model.labels();
  out.objective = std::move(result.objective);
  for (std::size_t j = 0; j < model.k(); ++j)
    out.selected.push_back(!model.components[j].penalized ||
                           std::sqrt(out.fit.sigma2[static_cast<Index>(j)]) >= 1e-8);
  return out;
}

}  // namespace genokit::vc
