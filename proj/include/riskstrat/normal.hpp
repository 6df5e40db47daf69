#pragma once

namespace riskstrat::normal {

// Standard normal CDF.
double cdf(double x);
// Upper tail 1 - cdf(x), accurate far into the tail.
double sf(double x);
// Inverse CDF for p in (0,1). Throws DomainError otherwise. Rational
// approximation refined by one Halley step; absolute error below 1e-12 on
// (1e-300, 1 - 1e-16).
double quantile(double p);
// Two-sided critical value for a confidence level in (0,1), e.g. 1.959964
// for 0.95.
double critical_value(double level);

}  // namespace riskstrat::normal
