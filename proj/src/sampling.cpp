#include "csbp/sampling.hpp"

#include "csbp/quadrature.hpp"
#include "csbp/special.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace csbp {

double sample_power_exp_tail(double a, double rate, double lo, Stream& s)
{
    if (!(lo > 0.0) || a < -1.0 || (a <= 0.0 && !(rate > 0.0)))
        throw std::invalid_argument("power-exponential tail is not normalisable");
    if (a > 0.0 && rate * lo <= 1.0) {
        for (;;) {
            double y = lo * std::pow(s.uniform(), -1.0 / a);
            if (rate == 0.0 || s.uniform() <= std::exp(-rate * (y - lo)))
                return y;
        }
    }
    for (;;) {
        double y = lo + s.exponential() / rate;
        if (s.uniform() <= std::pow(y / lo, -1.0 - a))
            return y;
    }
}

double sample_power_exp_head(double shape, double rate, double hi, Stream& s)
{
    if (!(shape > 0.0) || !(hi > 0.0))
        throw std::invalid_argument("power-exponential head needs shape > 0 and hi > 0");
    if (rate * hi <= 1.0) {
        for (;;) {
            double y = hi * std::pow(s.uniform(), 1.0 / shape);
            if (rate == 0.0 || s.uniform() <= std::exp(-rate * y))
                return y;
        }
    }
    for (;;) {
        double y = s.gamma(shape) / rate;
        if (y < hi)
            return y;
    }
}

Sampler tabulated_sampler(std::function<double(double)> h, double lo, double hi, int cells)
{
    struct Table {
        std::vector<double> edges;
        std::vector<double> cdf;
    };
    auto tab = std::make_shared<Table>();
    double step = std::pow(hi / lo, 1.0 / cells);
    tab->edges.push_back(lo);
    tab->cdf.push_back(0.0);
    double acc = 0.0;
    for (int i = 0; i < cells; ++i) {
        double a = tab->edges.back();
        double b = i + 1 == cells ? hi : a * step;
        acc += integrate(h, a, b, 0.0);
        tab->edges.push_back(b);
        tab->cdf.push_back(acc);
    }
    if (!(acc > 0.0))
        throw std::invalid_argument("tabulated sampler: no mass on the table range");
    for (auto& c : tab->cdf)
        c /= acc;
    return [tab](Stream& s) {
        double u = s.uniform();
        auto it = std::upper_bound(tab->cdf.begin(), tab->cdf.end(), u);
        std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - tab->cdf.begin(), 1),
                                               tab->cdf.size() - 1);
        double c0 = tab->cdf[i - 1];
        double c1 = tab->cdf[i];
        double w = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
        return tab->edges[i - 1] + w * (tab->edges[i] - tab->edges[i - 1]);
    };
}

DiscreteSampler::DiscreteSampler(std::vector<double> values, const std::vector<double>& weights)
    : values_(std::move(values))
{
    if (values_.size() != weights.size())
        throw std::invalid_argument("discrete sampler: size mismatch");
    double acc = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0))
            throw std::invalid_argument("discrete sampler: negative weight");
        acc += w;
        cum_.push_back(acc);
    }
}

double DiscreteSampler::operator()(Stream& s) const
{
    if (!(total() > 0.0))
        throw std::logic_error("discrete sampler: empty");
    double u = s.uniform() * total();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cum_.begin()), cum_.size() - 1);
    return values_[i];
}

std::int64_t sample_poisson_at_least_two(double z, Stream& s)
{
    if (!(z > 0.0))
        throw std::invalid_argument("conditioned Poisson needs a positive mean");
    if (z > 5.0) {
        for (;;) {
            std::int64_t n = s.poisson(z);
            if (n >= 2)
                return n;
        }
    }
    // Sequential inversion of e^{-z} z^n / n! / P(N >= 2), n = 2, 3, ...
    double norm = one_minus_exp_poly(z);
    double u = s.uniform() * norm;
    double term = std::exp(-z) * z * z / 2.0;
    std::int64_t n = 2;
    double acc = term;
    while (acc < u && term > 0.0) {
        ++n;
        term *= z / static_cast<double>(n);
        acc += term;
    }
    return n;
}

} // namespace csbp
