#pragma once

#include <cstdint>

namespace wmark {

// Inverse standard normal CDF. Acklam's rational approximation refined by
// one Halley step against erfc, giving ~1e-15 relative accuracy; detection
// thresholds must not depend on any particular math library's quantile.
double normal_quantile(double p);

double normal_cdf(double x);

struct WilsonInterval {
  double lo;
  double hi;
};

// Wilson score interval for a binomial proportion (default 95%).
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                               double z = 1.959963984540054);

// Exact Binomial(n, p) CDF: P(X <= k). Computed by the pmf recurrence.
double binomial_cdf(std::uint64_t k, std::uint64_t n, double p);

// Smallest k with P(X <= k) >= q.
std::uint64_t binomial_quantile(double q, std::uint64_t n, double p);

}  // namespace wmark
