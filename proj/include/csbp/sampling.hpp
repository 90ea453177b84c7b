#pragma once

#include "csbp/random.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace csbp {

using Sampler = std::function<double(Stream&)>;

// Density proportional to y^{-1-a} e^{-rate y} on [lo, infinity); needs a > 0 or rate > 0,
// and a >= -1.
double sample_power_exp_tail(double a, double rate, double lo, Stream& s);

// Density proportional to y^{shape-1} e^{-rate y} on (0, hi), shape > 0.
double sample_power_exp_head(double shape, double rate, double hi, Stream& s);

// Inverse-CDF table over log-spaced cells of [lo, hi]; linear within a cell. Approximate.
Sampler tabulated_sampler(std::function<double(double)> h, double lo, double hi, int cells = 2000);

// Choice among weighted values.
class DiscreteSampler {
public:
    DiscreteSampler() = default;
    DiscreteSampler(std::vector<double> values, const std::vector<double>& weights);

    double total() const { return cum_.empty() ? 0.0 : cum_.back(); }
    double operator()(Stream& s) const;

private:
    std::vector<double> values_;
    std::vector<double> cum_;
};

// n ~ Poisson(z) conditioned on n >= 2.
std::int64_t sample_poisson_at_least_two(double z, Stream& s);

} // namespace csbp
