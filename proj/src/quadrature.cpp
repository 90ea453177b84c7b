#include "csbp/quadrature.hpp"

#include "csbp/error.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace csbp {

namespace {

constexpr int max_panels = 1100;
constexpr std::size_t max_segments = 2000;

struct Segment {
    double a;
    double b;
    double value;
    double error;
    double l1;
};

// Gauss-Kronrod 7/15 rule with the QUADPACK error scaling, which stays
// meaningful when the request approaches roundoff.
Segment kronrod15(const Integrand& f, double a, double b)
{
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    using GL = boost::math::quadrature::gauss<double, 7>;
    static const auto& xk = GK::abscissa();
    static const auto& wk = GK::weights();
    static const auto& wg = GL::weights();
    double c = 0.5 * (a + b);
    double h = 0.5 * (b - a);
    double fv[15];
    fv[0] = f(c);
    for (std::size_t i = 1; i < xk.size(); ++i) {
        fv[2 * i - 1] = f(c - h * xk[i]);
        fv[2 * i] = f(c + h * xk[i]);
    }
    double rk = wk[0] * fv[0];
    double rabs = std::fabs(rk);
    double rg = 0.0;
    for (std::size_t i = 1; i < xk.size(); ++i) {
        double pair = fv[2 * i - 1] + fv[2 * i];
        rk += wk[i] * pair;
        rabs += wk[i] * (std::fabs(fv[2 * i - 1]) + std::fabs(fv[2 * i]));
        if (i % 2 == 0)
            rg += wg[i / 2] * pair;
    }
    // The 7-point Gauss rule shares the even Kronrod nodes (including the centre).
    rg += wg[0] * fv[0];
    double mean = 0.5 * rk;
    double asc = wk[0] * std::fabs(fv[0] - mean);
    for (std::size_t i = 1; i < xk.size(); ++i)
        asc += wk[i] * (std::fabs(fv[2 * i - 1] - mean) + std::fabs(fv[2 * i] - mean));
    double result = rk * h;
    double resabs = rabs * std::fabs(h);
    double resasc = asc * std::fabs(h);
    double err = std::fabs((rk - rg) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(50.0 * eps * resabs, err);
    return {a, b, result, err, resabs};
}

struct PanelSeries {
    double sum = 0.0;
    double prev = 0.0;
    double prev_ratio = 0.0;
    int small_run = 0;
    int stable_run = 0;
    int growth_run = 0;

    // Returns true when the remaining tail is negligible; the extrapolated
    // geometric tail (if any) has then been added to sum. Panels that stop
    // decaying mark the integral as divergent (sum becomes +-infinity).
    bool add(double v, double abs_tol, int index)
    {
        sum += v;
        double av = std::fabs(v);
        small_run = (av <= 1e-3 * abs_tol) ? small_run + 1 : 0;
        if (small_run >= 3)
            return true;
        if (index > 0 && prev != 0.0) {
            double ratio = v / prev;
            if (ratio > 0.0 && ratio < 1.0 &&
                std::fabs(ratio - prev_ratio) <= 1e-4 * ratio)
                ++stable_run;
            else
                stable_run = 0;
            prev_ratio = ratio;
            growth_run = (ratio >= 1.0 - 1e-9) ? growth_run + 1 : 0;
            if (growth_run >= 40) {
                sum = std::copysign(std::numeric_limits<double>::infinity(), v);
                return true;
            }
            if (stable_run >= 4) {
                double tail = v * ratio / (1.0 - ratio);
                if (std::fabs(tail) <= abs_tol) {
                    sum += tail;
                    return true;
                }
            }
        }
        prev = v;
        return false;
    }
};

} // namespace

double integrate(const Integrand& f, double a, double b, double abs_tol)
{
    if (a == b)
        return 0.0;
    std::vector<Segment> heap;
    heap.push_back(kronrod15(f, a, b));
    double value = heap.front().value;
    double error = heap.front().error;
    double l1 = heap.front().l1;
    auto by_error = [](const Segment& x, const Segment& y) { return x.error < y.error; };
    while (error > std::max(abs_tol, 1e-13 * l1)) {
        if (heap.size() >= max_segments)
            break;
        std::pop_heap(heap.begin(), heap.end(), by_error);
        Segment s = heap.back();
        heap.pop_back();
        double mid = 0.5 * (s.a + s.b);
        if (!(mid > s.a && mid < s.b)) {
            heap.push_back(s);
            std::push_heap(heap.begin(), heap.end(), by_error);
            break;
        }
        Segment left = kronrod15(f, s.a, mid);
        Segment right = kronrod15(f, mid, s.b);
        value += left.value + right.value - s.value;
        error += left.error + right.error - s.error;
        l1 += left.l1 + right.l1 - s.l1;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), by_error);
    }
    value = 0.0;
    error = 0.0;
    for (const auto& s : heap) {
        value += s.value;
        error += s.error;
    }
    if (!std::isfinite(value))
        throw NumericalError("quadrature produced a non-finite value on [" +
                             std::to_string(a) + ", " + std::to_string(b) + "]");
    if (error > std::max(abs_tol, 1e-10 * l1))
        throw NumericalError("quadrature did not converge on [" + std::to_string(a) + ", " +
                             std::to_string(b) + "], error estimate " + std::to_string(error));
    return value;
}

double integrate_from_zero(const Integrand& f, double b, double abs_tol)
{
    PanelSeries series;
    double hi = b;
    for (int k = 0; k < max_panels; ++k) {
        double lo = hi / 2.0;
        if (lo == 0.0)
            return series.sum;
        double v = integrate(f, lo, hi, 0.1 * abs_tol);
        if (series.add(v, abs_tol, k))
            return series.sum;
        hi = lo;
    }
    throw NumericalError("quadrature towards 0 did not settle");
}

double integrate_to_infinity(const Integrand& f, double a, double abs_tol)
{
    PanelSeries series;
    double lo = a;
    for (int k = 0; k < max_panels; ++k) {
        double hi = 2.0 * lo;
        if (!std::isfinite(hi))
            return series.sum;
        double v = integrate(f, lo, hi, 0.1 * abs_tol);
        if (series.add(v, abs_tol, k))
            return series.sum;
        lo = hi;
    }
    throw NumericalError("quadrature towards infinity did not settle");
}

double integrate_half_line(const Integrand& f, std::vector<double> breaks, double abs_tol)
{
    breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                                [](double x) { return !(x > 0.0) || !std::isfinite(x); }),
                 breaks.end());
    if (breaks.empty())
        breaks.push_back(1.0);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    double tol = abs_tol / static_cast<double>(breaks.size() + 1);
    double sum = integrate_from_zero(f, breaks.front(), tol);
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        // Widely separated breaks are bridged by geometric panels.
        double lo = breaks[i];
        while (lo < breaks[i + 1]) {
            double hi = std::min(16.0 * lo, breaks[i + 1]);
            sum += integrate(f, lo, hi, tol);
            lo = hi;
        }
    }
    sum += integrate_to_infinity(f, breaks.back(), tol);
    return sum;
}

} // namespace csbp
