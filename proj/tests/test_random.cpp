#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "csbp/random.hpp"

#include <cmath>
#include <vector>

using namespace csbp;

TEST_CASE("philox known answers")
{
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct")
{
    Stream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    for (int i = 0; i < 100; ++i) {
        auto x = a.next_u64();
        CHECK(x == b.next_u64());
        CHECK(x != c.next_u64());
        CHECK(x != d.next_u64());
    }
}

namespace {

struct Moments {
    double mean = 0, var = 0;
};

template <class F>
Moments moments(F draw, int n)
{
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        double x = draw();
        s += x;
        s2 += x * x;
    }
    Moments m;
    m.mean = s / n;
    m.var = s2 / n - m.mean * m.mean;
    return m;
}

} // namespace

TEST_CASE("uniform and normal moments")
{
    Stream s(1, 0);
    int n = 1000000;
    auto u = moments([&] { return s.uniform(); }, n);
    CHECK(std::fabs(u.mean - 0.5) < 3 * std::sqrt(1.0 / 12 / n) + 1e-12);
    auto z = moments([&] { return s.normal(); }, n);
    CHECK(std::fabs(z.mean) < 3 * std::sqrt(1.0 / n));
    CHECK(std::fabs(z.var - 1) < 3 * std::sqrt(2.0 / n));
}

TEST_CASE("poisson sampler")
{
    Stream s(2, 0);
    CHECK(s.poisson(0.0) == 0);
    int n = 1000000;
    auto small = moments([&] { return static_cast<double>(s.poisson(7.0)); }, n);
    CHECK(std::fabs(small.mean - 7.0) < 3 * std::sqrt(7.0 / n));
    auto big = moments([&] { return static_cast<double>(s.poisson(100.0)); }, n);
    CHECK(std::fabs(big.mean - 100.0) < 3 * std::sqrt(100.0 / n));
    CHECK(std::fabs(big.var / 100.0 - 1.0) < 0.01);
    auto huge = moments([&] { return static_cast<double>(s.poisson(1e7)); }, 100000);
    CHECK(std::fabs(huge.mean - 1e7) < 3 * std::sqrt(1e7 / 100000));
    // Pmf at a mean straddling the method switch.
    std::vector<int> counts(80, 0);
    for (int i = 0; i < n; ++i) {
        auto k = s.poisson(30.0);
        if (k < 80)
            ++counts[k];
    }
    for (int k = 20; k <= 40; ++k) {
        double p = std::exp(-30.0 + k * std::log(30.0) - std::lgamma(k + 1.0));
        CHECK(std::fabs(counts[k] - n * p) < 5 * std::sqrt(n * p));
    }
}

TEST_CASE("gamma sampler")
{
    Stream s(3, 0);
    int n = 500000;
    for (double a : {0.3, 1.0, 2.5, 40.0}) {
        auto m = moments([&] { return s.gamma(a); }, n);
        CHECK(std::fabs(m.mean - a) < 4 * std::sqrt(a / n));
        CHECK(std::fabs(m.var / a - 1.0) < 0.03);
    }
    auto e = moments([&] { return s.exponential(); }, n);
    CHECK(std::fabs(e.mean - 1.0) < 4 * std::sqrt(1.0 / n));
}
