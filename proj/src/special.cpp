#include "csbp/special.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace csbp {

double phi(double x)
{
    if (std::fabs(x) < 0.1) {
        // x^2/2 - x^3/6 + ...
        double term = x * x / 2.0;
        double sum = term;
        for (int n = 3; n < 20; ++n) {
            term *= -x / n;
            sum += term;
            if (std::fabs(term) < 1e-18 * std::fabs(sum))
                break;
        }
        return sum;
    }
    return std::expm1(-x) + x;
}

double one_minus_exp_poly(double x)
{
    if (std::fabs(x) < 0.1) {
        // sum_{n>=2} (-1)^n (n-1) x^n / n!
        double pw = x * x / 2.0; // (-1)^n x^n / n! at n = 2
        double sum = pw;
        for (int n = 3; n < 22; ++n) {
            pw *= -x / n;
            double term = (n - 1) * pw;
            sum += term;
            if (std::fabs(term) < 1e-18 * std::fabs(sum))
                break;
        }
        return sum;
    }
    return -std::expm1(-x) - x * std::exp(-x);
}

double pow1p_minus_linear(double a, double x)
{
    if (x <= -1.0)
        throw std::invalid_argument("pow1p_minus_linear: x must exceed -1");
    if (std::fabs(x) < 0.05) {
        // sum_{n>=2} binom(a, n) x^n
        double coef = a * (a - 1.0) / 2.0;
        double pw = x * x;
        double sum = coef * pw;
        for (int n = 3; n < 40; ++n) {
            coef *= (a - n + 1.0) / n;
            pw *= x;
            double term = coef * pw;
            sum += term;
            if (std::fabs(term) <= 1e-18 * std::fabs(sum))
                break;
        }
        return sum;
    }
    return std::expm1(a * std::log1p(x)) - a * x;
}

double pow1p_minus_one(double a, double x)
{
    if (x <= -1.0)
        throw std::invalid_argument("pow1p_minus_one: x must exceed -1");
    return std::expm1(a * std::log1p(x));
}

double upper_gamma(double s, double x)
{
    if (x < 0.0)
        throw std::invalid_argument("upper_gamma: x must be nonnegative");
    if (s > 0.0)
        return x == 0.0 ? boost::math::tgamma(s) : boost::math::tgamma(s, x);
    if (x == 0.0)
        return std::numeric_limits<double>::infinity();
    if (s <= -3.0 || s == 0.0 || s == -1.0 || s == -2.0)
        throw std::invalid_argument("upper_gamma: unsupported order");
    // Gamma(s+1, x) = s Gamma(s, x) + x^s e^{-x}
    return (upper_gamma(s + 1.0, x) - std::exp(s * std::log(x) - x)) / s;
}

double lower_gamma(double s, double x)
{
    if (s <= 0.0)
        throw std::invalid_argument("lower_gamma: s must be positive");
    return boost::math::tgamma_lower(s, x);
}

double log_poisson_pmf(std::int64_t k, double mean)
{
    if (k < 0)
        return -std::numeric_limits<double>::infinity();
    if (mean == 0.0)
        return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    double kd = static_cast<double>(k);
    return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
}

double poisson_upper_tail(std::int64_t k, double mean)
{
    if (k <= 0)
        return 1.0;
    if (mean == 0.0)
        return 0.0;
    return boost::math::gamma_p(static_cast<double>(k), mean);
}

} // namespace csbp
