#pragma once

namespace lcert {

/// Standard normal CDF, full double precision via erfc.
double normal_cdf(double x);

/// Standard normal density.
double normal_pdf(double x);

/// Inverse standard normal CDF. Acklam's rational initial guess refined by a
/// Halley step on the erfc-based CDF; relative error is at the double
/// rounding floor across (0,1). Throws for p outside (0,1): the certification
/// bound composes this with a CDF deep in the tail, where a quietly saturated
/// quantile would silently move an abstention boundary.
double normal_quantile(double p);

}  // namespace lcert
