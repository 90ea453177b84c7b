#pragma once

#include "csbp/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace csbp {

// Dormand-Prince 5(4) with the 4th-order continuous extension.
template <std::size_t N>
using OdeState = std::array<double, N>;

template <std::size_t N>
struct DenseSegment {
    double t0 = 0.0;
    double h = 0.0;
    std::array<OdeState<N>, 5> c{};

    OdeState<N> eval(double t) const
    {
        double th = (t - t0) / h;
        double th1 = 1.0 - th;
        OdeState<N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])));
        return y;
    }
};

template <std::size_t N>
struct OdeSolution {
    std::vector<double> t;
    std::vector<OdeState<N>> y;
    std::vector<DenseSegment<N>> dense;
    bool boundary = false;
    std::string boundary_reason;
    std::size_t rejected = 0;

    double t_end() const { return t.back(); }

    OdeState<N> at(double s) const
    {
        if (s <= t.front())
            return y.front();
        if (s >= t.back())
            return y.back();
        auto it = std::upper_bound(t.begin(), t.end(), s);
        std::size_t k = static_cast<std::size_t>(it - t.begin()) - 1;
        if (s == t[k])
            return y[k];
        return dense[k].eval(s);
    }
};

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    double h_floor = 1e-14;
    std::size_t max_steps = 2000000;
};

enum class StepVerdict { Continue, Stop };

// rhs(t, y, dy); on_accept(t, y) may stop the integration; at_floor(y)
// returns a non-empty boundary reason when an underflowing step is expected.
template <std::size_t N, class Rhs, class OnAccept, class AtFloor>
OdeSolution<N> dopri5(Rhs&& rhs, OdeState<N> y0, double t0, double T, const OdeOptions& opt,
                      OnAccept&& on_accept, AtFloor&& at_floor)
{
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                     d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                     d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

    using S = OdeState<N>;
    OdeSolution<N> sol;
    sol.t.push_back(t0);
    sol.y.push_back(y0);
    if (T <= t0)
        return sol;

    auto norm = [&](const S& a, const S& b, const S& e) {
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            double sc = opt.atol + opt.rtol * std::max(std::fabs(a[i]), std::fabs(b[i]));
            s += (e[i] / sc) * (e[i] / sc);
        }
        return std::sqrt(s / N);
    };
    auto axpy = [](const S& y, double h, std::initializer_list<std::pair<double, const S*>> terms) {
        S out = y;
        for (auto [a, k] : terms)
            for (std::size_t i = 0; i < N; ++i)
                out[i] += h * a * (*k)[i];
        return out;
    };

    double t = t0;
    S y = y0, k1, k2, k3, k4, k5, k6, k7;
    rhs(t, y, k1);

    // Initial step from the derivative scale.
    double dn = norm(y, y, k1), sn = norm(y, y, y);
    double h = (dn < 1e-5 || sn < 1e-5) ? 1e-6 : 0.01 * sn / dn;
    h = std::min(h, T - t0);

    bool last_rejected = false;
    for (std::size_t step = 0; step < opt.max_steps; ++step) {
        if (h < opt.h_floor * std::max(1.0, std::fabs(t))) {
            std::string why = at_floor(y);
            if (why.empty())
                throw NumericalError("ode: step size underflow at t=" + std::to_string(t));
            sol.boundary = true;
            sol.boundary_reason = why;
            return sol;
        }
        bool final_step = false;
        if (t + h >= T) {
            h = T - t;
            final_step = true;
        }
        S y2 = axpy(y, h, {{a21, &k1}});
        rhs(t + c2 * h, y2, k2);
        S y3 = axpy(y, h, {{a31, &k1}, {a32, &k2}});
        rhs(t + c3 * h, y3, k3);
        S y4 = axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
        rhs(t + c4 * h, y4, k4);
        S y5 = axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
        rhs(t + c5 * h, y5, k5);
        S y6 = axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
        rhs(t + h, y6, k6);
        S yn = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
        bool finite = true;
        for (double v : yn)
            finite = finite && std::isfinite(v);
        if (finite)
            rhs(t + h, yn, k7);
        for (double v : k7)
            finite = finite && std::isfinite(v);
        if (!finite) {
            h *= 0.2;
            ++sol.rejected;
            last_rejected = true;
            continue;
        }
        S err;
        for (std::size_t i = 0; i < N; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        double en = norm(y, yn, err);
        double fac = en == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 10.0);
        if (en > 1.0) {
            h *= std::min(fac, 1.0);
            ++sol.rejected;
            last_rejected = true;
            continue;
        }
        DenseSegment<N> seg;
        seg.t0 = t;
        seg.h = h;
        for (std::size_t i = 0; i < N; ++i) {
            double dy = yn[i] - y[i];
            double bspl = h * k1[i] - dy;
            seg.c[0][i] = y[i];
            seg.c[1][i] = dy;
            seg.c[2][i] = bspl;
            seg.c[3][i] = dy - h * k7[i] - bspl;
            seg.c[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                               d7 * k7[i]);
        }
        t = final_step ? T : t + h;
        y = yn;
        k1 = k7;
        sol.dense.push_back(seg);
        sol.t.push_back(t);
        sol.y.push_back(y);
        if (on_accept(t, y) == StepVerdict::Stop || final_step)
            return sol;
        if (last_rejected)
            fac = std::min(fac, 1.0);
        last_rejected = false;
        h *= fac;
    }
    throw NumericalError("ode: step budget exhausted");
}

} // namespace csbp
