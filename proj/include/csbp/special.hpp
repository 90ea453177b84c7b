#pragma once

#include <cstdint>

namespace csbp {

// e^{-x} - 1 + x without cancellation for small x.
double phi(double x);

// 1 - e^{-x}(1 + x) without cancellation for small x.
double one_minus_exp_poly(double x);

// (1+x)^a - 1 - a x, accurate for small |x|; requires x > -1.
double pow1p_minus_linear(double a, double x);

// (1+x)^a - 1, accurate for small |x|; requires x > -1.
double pow1p_minus_one(double a, double x);

// Upper incomplete gamma Gamma(s, x) for x > 0 and s > -3 (s not 0, -1, -2);
// x = 0 is allowed when s > 0.
double upper_gamma(double s, double x);

// Lower incomplete gamma gamma(s, x), s > 0.
double lower_gamma(double s, double x);

double log_poisson_pmf(std::int64_t k, double mean);

// P(N >= k) for N ~ Poisson(mean).
double poisson_upper_tail(std::int64_t k, double mean);

} // namespace csbp
