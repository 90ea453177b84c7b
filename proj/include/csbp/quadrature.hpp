#pragma once

#include <functional>
#include <vector>

namespace csbp {

using Integrand = std::function<double(double)>;

// Adaptive Gauss-Kronrod on [a, b]. Throws NumericalError if the estimated
// error exceeds abs_tol after maximal refinement.
double integrate(const Integrand& f, double a, double b, double abs_tol = 1e-12);

// Integral over (0, b]: dyadic panels towards 0, with the geometric tail of
// the panel sequence extrapolated once the panel ratio has settled.
// Returns +-infinity when the panels stop decaying.
double integrate_from_zero(const Integrand& f, double b, double abs_tol = 1e-12);

// Integral over [a, infinity), a > 0: doubling panels, same tail treatment.
double integrate_to_infinity(const Integrand& f, double a, double abs_tol = 1e-12);

// Integral over (0, infinity) split at the given interior break points.
double integrate_half_line(const Integrand& f, std::vector<double> breaks,
                           double abs_tol = 1e-12);

} // namespace csbp
