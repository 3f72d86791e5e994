#pragma once

namespace genokit::stats {

/// Upper tail P(X >= x) of a chi-square variable with `df` degrees of freedom.
double chi2_sf(double x, double df);

/// Upper tail of the equal mixture 0.5*chi2(0) + 0.5*chi2(1), evaluated as
/// 0.5 * P(chi2(1) >= x). At x = 0 this returns 0.5.
double chi2_boundary_mixture_sf(double x);

/// Median of chi-square(1); the denominator of the genomic-inflation factor.
inline constexpr double kChi2MedianDf1 = 0.45493642311957289;

}  // namespace genokit::stats
