#include "genokit/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

namespace genokit::stats {

double chi2_sf(double x, double df) {
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (df == 1.0) return std::erfc(std::sqrt(0.5 * x));
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double chi2_boundary_mixture_sf(double x) {
  if (!(x > 0.0)) return 0.5;
  return 0.5 * chi2_sf(x, 1.0);
}

}  // namespace genokit::stats
