#include "csbp/mechanism.hpp"

#include "csbp/error.hpp"
#include "csbp/quadrature.hpp"
#include "csbp/special.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csbp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double probe_cap = 1e12;

struct PowerLaw {
    double C;
    double alpha;
    double theta;

    double G() const { return C * std::tgamma(-alpha); }

    // Integral of y nu(dy) over (0, 1).
    double I0() const
    {
        if (alpha > 1.0)
            return infinity;
        if (theta == 0.0)
            return C / (1.0 - alpha);
        return C * std::pow(theta, alpha - 1.0) * lower_gamma(1.0 - alpha, theta);
    }

    // Integral of y nu(dy) over [1, infinity).
    double I1() const
    {
        if (theta == 0.0)
            return alpha > 1.0 ? C / (alpha - 1.0) : infinity;
        return C * std::pow(theta, alpha - 1.0) * upper_gamma(1.0 - alpha, theta);
    }

    // alpha < 1: integral of (e^{-qy} - 1) nu(dy).
    double none(double q) const
    {
        if (theta == 0.0)
            return G() * std::pow(q, alpha);
        return G() * std::pow(theta, alpha) * pow1p_minus_one(alpha, q / theta);
    }
    double none_prime(double q) const { return G() * alpha * std::pow(theta + q, alpha - 1.0); }

    // alpha > 1: integral of (e^{-qy} - 1 + qy) nu(dy).
    double full(double q) const
    {
        if (theta == 0.0)
            return G() * std::pow(q, alpha);
        return G() * std::pow(theta, alpha) * pow1p_minus_linear(alpha, q / theta);
    }
    double full_prime(double q) const
    {
        if (theta == 0.0)
            return G() * alpha * std::pow(q, alpha - 1.0);
        return G() * alpha * std::pow(theta, alpha - 1.0) * pow1p_minus_one(alpha - 1.0, q / theta);
    }

    double jump(double q, Compensation comp) const
    {
        if (alpha < 1.0) {
            double base = none(q) + q * I0();
            return comp == Compensation::UnitTruncation ? base : base + q * I1();
        }
        double base = full(q);
        return comp == Compensation::FullCompensation ? base : base - q * I1();
    }

    double jump_prime(double q, Compensation comp) const
    {
        if (alpha < 1.0) {
            double base = none_prime(q) + I0();
            return comp == Compensation::UnitTruncation ? base : base + I1();
        }
        double base = full_prime(q);
        return comp == Compensation::FullCompensation ? base : base - I1();
    }

    double moment(int j, double lo, double hi) const
    {
        double s = j - alpha;
        if (!(hi > lo))
            return 0.0;
        if (lo == 0.0 && s <= 0.0)
            return infinity;
        if (theta == 0.0) {
            if (std::isinf(hi))
                return s < 0.0 ? C * (-std::pow(lo, s)) / s : infinity;
            double lo_s = lo == 0.0 ? 0.0 : std::pow(lo, s);
            return C * (std::pow(hi, s) - lo_s) / s;
        }
        double scale = C * std::pow(theta, -s);
        if (std::isinf(hi))
            return scale * upper_gamma(s, theta * lo);
        if (lo == 0.0)
            return scale * lower_gamma(s, theta * hi);
        if (s > 0.0)
            return scale * (lower_gamma(s, theta * hi) - lower_gamma(s, theta * lo));
        return scale * (upper_gamma(s, theta * lo) - upper_gamma(s, theta * hi));
    }
};

PowerLaw as_power_law(const StableMeasure& s)
{
    return {stable_density_constant(s.alpha, s.c), s.alpha, 0.0};
}

PowerLaw as_power_law(const TemperedMeasure& t) { return {t.c, t.alpha, t.theta}; }

double density_at(const DensityMeasure& d, double y)
{
    double g = d.density(y);
    return d.tilt == 0.0 ? g : g * std::exp(-d.tilt * y);
}

std::vector<double> breaks_for(double q)
{
    std::vector<double> b{1.0};
    if (q > 0.0 && std::isfinite(1.0 / q))
        b.push_back(1.0 / q);
    return b;
}

// Whether the integral of y nu(dy) over [1, infinity) is finite for a density.
bool density_first_moment_finite(const DensityMeasure& d)
{
    if (d.hint.tail_rate > 0.0)
        return true;
    if (std::isnan(d.hint.tail_index))
        return true; // decided numerically by the caller's quadrature
    return d.hint.tail_index > 1.0;
}

double density_I1(const DensityMeasure& d)
{
    if (!density_first_moment_finite(d))
        return infinity;
    return integrate_to_infinity([&](double y) { return y * density_at(d, y); }, 1.0);
}

double jump_part(const LevyMeasure& nu, double q, Compensation comp)
{
    return std::visit(
        overloaded{
            [](const ZeroMeasure&) { return 0.0; },
            [&](const AtomMeasure& a) {
                double s = 0.0;
                for (const auto& at : a.atoms) {
                    double x = q * at.y;
                    if (comp == Compensation::FullCompensation || at.y < 1.0)
                        s += at.mass * phi(x);
                    else
                        s += at.mass * std::expm1(-x);
                }
                return s;
            },
            [&](const StableMeasure& s) {
                double v = s.c * std::pow(q, s.alpha);
                return s.alpha < 1.0 ? -v : v;
            },
            [&](const TemperedMeasure& t) { return as_power_law(t).jump(q, comp); },
            [&](const DensityMeasure& d) {
                auto f = [&](double y) {
                    double g = density_at(d, y);
                    if (g == 0.0)
                        return 0.0;
                    if (comp == Compensation::FullCompensation || y < 1.0)
                        return phi(q * y) * g;
                    return std::expm1(-q * y) * g;
                };
                return integrate_half_line(f, breaks_for(q));
            }},
        nu);
}

double jump_part_prime(const LevyMeasure& nu, double q, Compensation comp)
{
    return std::visit(
        overloaded{
            [](const ZeroMeasure&) { return 0.0; },
            [&](const AtomMeasure& a) {
                double s = 0.0;
                for (const auto& at : a.atoms) {
                    double x = q * at.y;
                    if (comp == Compensation::FullCompensation || at.y < 1.0)
                        s += at.mass * at.y * (-std::expm1(-x));
                    else
                        s -= at.mass * at.y * std::exp(-x);
                }
                return s;
            },
            [&](const StableMeasure& s) {
                double v = s.c * s.alpha * std::pow(q, s.alpha - 1.0);
                return s.alpha < 1.0 ? -v : v;
            },
            [&](const TemperedMeasure& t) { return as_power_law(t).jump_prime(q, comp); },
            [&](const DensityMeasure& d) {
                auto f = [&](double y) {
                    double g = density_at(d, y);
                    if (g == 0.0)
                        return 0.0;
                    if (comp == Compensation::FullCompensation || y < 1.0)
                        return y * (-std::expm1(-q * y)) * g;
                    return -y * std::exp(-q * y) * g;
                };
                return integrate_half_line(f, breaks_for(q));
            }},
        nu);
}

// Integral of y nu(dy) over [1, infinity) used for convention conversion;
// zero for the self-centred stable family.
double compensation_shift(const LevyMeasure& nu)
{
    return std::visit(overloaded{[](const ZeroMeasure&) { return 0.0; },
                                 [](const AtomMeasure& a) {
                                     double s = 0.0;
                                     for (const auto& at : a.atoms)
                                         if (at.y >= 1.0)
                                             s += at.mass * at.y;
                                     return s;
                                 },
                                 [](const StableMeasure&) { return 0.0; },
                                 [](const TemperedMeasure& t) { return as_power_law(t).I1(); },
                                 [](const DensityMeasure& d) { return density_I1(d); }},
                      nu);
}

bool is_zero_mechanism(const BranchingMechanism& m)
{
    return m.sigma2 == 0.0 && m.gamma == 0.0 && m.kappa == 0.0 && !has_jumps(m.levy);
}

} // namespace

std::string to_string(Criticality c)
{
    switch (c) {
    case Criticality::Supercritical:
        return "supercritical";
    case Criticality::Critical:
        return "critical";
    case Criticality::Subcritical:
        return "subcritical";
    }
    return "unknown";
}

BranchingMechanism feller(double sigma2, double gamma, double kappa)
{
    BranchingMechanism m;
    m.sigma2 = sigma2;
    m.gamma = gamma;
    m.kappa = kappa;
    return m;
}

BranchingMechanism stable_mechanism(double alpha, double c, double sigma2, double gamma)
{
    BranchingMechanism m;
    m.sigma2 = sigma2;
    m.gamma = gamma;
    m.levy = StableMeasure{alpha, c};
    return m;
}

DensityMeasure density_from_terms(std::vector<PowerTerm> terms)
{
    if (terms.empty())
        throw std::invalid_argument("density needs at least one term");
    DensityMeasure d;
    DensityHint hint;
    hint.small_index = -infinity;
    hint.tail_index = infinity;
    hint.tail_rate = infinity;
    for (const auto& t : terms) {
        hint.small_index = std::max(hint.small_index, t.alpha);
        if (t.theta < hint.tail_rate) {
            hint.tail_rate = t.theta;
            hint.tail_index = t.alpha;
        } else if (t.theta == hint.tail_rate) {
            hint.tail_index = std::min(hint.tail_index, t.alpha);
        }
    }
    d.hint = hint;
    d.terms = terms;
    d.density = [terms](double y) {
        double s = 0.0;
        double ly = std::log(y);
        for (const auto& t : terms)
            s += t.c * std::exp(-(1.0 + t.alpha) * ly - t.theta * y);
        return s;
    };
    return d;
}

DensityMeasure density_from_function(std::function<double(double)> g, DensityHint hint)
{
    DensityMeasure d;
    d.density = std::move(g);
    d.hint = hint;
    return d;
}

double stable_density_constant(double alpha, double c)
{
    return c / std::fabs(std::tgamma(-alpha));
}

bool has_jumps(const LevyMeasure& nu)
{
    if (std::holds_alternative<ZeroMeasure>(nu))
        return false;
    if (auto a = std::get_if<AtomMeasure>(&nu))
        return !a->atoms.empty();
    return true;
}

void validate(const BranchingMechanism& m)
{
    if (!(m.sigma2 >= 0.0) || !std::isfinite(m.sigma2))
        throw std::invalid_argument("sigma2 must be finite and nonnegative");
    if (!(m.kappa >= 0.0) || !std::isfinite(m.kappa))
        throw std::invalid_argument("kappa must be finite and nonnegative");
    if (!std::isfinite(m.gamma))
        throw std::invalid_argument("gamma must be finite");
    auto check_alpha = [](double a) {
        if (!(a > 0.0 && a < 2.0) || a == 1.0)
            throw std::invalid_argument("index alpha must lie in (0,1) or (1,2)");
    };
    std::visit(overloaded{[](const ZeroMeasure&) {},
                          [](const AtomMeasure& a) {
                              for (const auto& at : a.atoms)
                                  if (!(at.y > 0.0) || !(at.mass > 0.0) || !std::isfinite(at.y) ||
                                      !std::isfinite(at.mass))
                                      throw std::invalid_argument(
                                          "atoms need positive finite locations and masses");
                          },
                          [&](const StableMeasure& s) {
                              check_alpha(s.alpha);
                              if (!(s.c > 0.0) || !std::isfinite(s.c))
                                  throw std::invalid_argument("stable scale must be positive");
                          },
                          [&](const TemperedMeasure& t) {
                              check_alpha(t.alpha);
                              if (!(t.c > 0.0) || !std::isfinite(t.c))
                                  throw std::invalid_argument("tempered scale must be positive");
                              if (!(t.theta >= 0.0) || !std::isfinite(t.theta))
                                  throw std::invalid_argument("tempering must be nonnegative");
                          },
                          [](const DensityMeasure& d) {
                              if (!d.density)
                                  throw std::invalid_argument("density function missing");
                              for (const auto& t : d.terms) {
                                  if (!(t.c > 0.0) || !(t.theta >= 0.0) || !(t.alpha < 2.0))
                                      throw std::invalid_argument(
                                          "density terms need c > 0, theta >= 0, alpha < 2");
                                  if (t.theta == 0.0 && !(t.alpha > 0.0))
                                      throw std::invalid_argument(
                                          "untempered density terms need alpha > 0");
                              }
                              if (!std::isnan(d.hint.small_index) && !(d.hint.small_index < 2.0))
                                  throw std::invalid_argument(
                                      "density must integrate y^2 near 0 (small_index < 2)");
                              // (1 ^ y^2) integrability by quadrature.
                              double near = integrate_from_zero(
                                  [&](double y) { return y * y * density_at(d, y); }, 1.0, 1e-10);
                              double far = integrate_to_infinity(
                                  [&](double y) { return density_at(d, y); }, 1.0, 1e-10);
                              if (!std::isfinite(near) || !std::isfinite(far))
                                  throw std::invalid_argument("density is not a Levy measure");
                          }},
               m.levy);
    if (m.compensation == Compensation::FullCompensation &&
        !std::holds_alternative<StableMeasure>(m.levy) &&
        !std::isfinite(compensation_shift(m.levy)))
        throw std::invalid_argument(
            "full compensation requires a finite first moment on [1, infinity)");
}

double levy_density(const LevyMeasure& nu, double y)
{
    return std::visit(overloaded{[](const ZeroMeasure&) { return 0.0; },
                                 [](const AtomMeasure&) { return 0.0; },
                                 [&](const StableMeasure& s) {
                                     return stable_density_constant(s.alpha, s.c) *
                                            std::pow(y, -1.0 - s.alpha);
                                 },
                                 [&](const TemperedMeasure& t) {
                                     return t.c * std::exp(-(1.0 + t.alpha) * std::log(y) -
                                                           t.theta * y);
                                 },
                                 [&](const DensityMeasure& d) { return density_at(d, y); }},
                      nu);
}

double levy_moment(const LevyMeasure& nu, int j, double lo, double hi)
{
    return std::visit(
        overloaded{[](const ZeroMeasure&) { return 0.0; },
                   [&](const AtomMeasure& a) {
                       double s = 0.0;
                       for (const auto& at : a.atoms)
                           if (at.y >= lo && at.y < hi)
                               s += at.mass * std::pow(at.y, j);
                       return s;
                   },
                   [&](const StableMeasure& s) { return as_power_law(s).moment(j, lo, hi); },
                   [&](const TemperedMeasure& t) { return as_power_law(t).moment(j, lo, hi); },
                   [&](const DensityMeasure& d) {
                       auto f = [&](double y) { return std::pow(y, j) * density_at(d, y); };
                       if (!(hi > lo))
                           return 0.0;
                       if (lo == 0.0 && std::isinf(hi))
                           return integrate_half_line(f, {1.0});
                       if (lo == 0.0)
                           return integrate_from_zero(f, hi);
                       if (std::isinf(hi))
                           return integrate_to_infinity(f, lo);
                       return integrate(f, lo, hi);
                   }},
        nu);
}

double levy_tail_mass(const LevyMeasure& nu, double lo) { return levy_moment(nu, 0, lo, infinity); }

double eval_psi_unkilled(const BranchingMechanism& m, double q)
{
    if (q < 0.0 || std::isnan(q))
        throw std::invalid_argument("psi argument must be nonnegative");
    if (q == 0.0)
        return 0.0;
    return 0.5 * m.sigma2 * q * q - m.gamma * q + jump_part(m.levy, q, m.compensation);
}

double eval_psi(const BranchingMechanism& m, double q)
{
    if (!(q > 0.0))
        throw std::invalid_argument("psi argument must be positive");
    return eval_psi_unkilled(m, q) - m.kappa;
}

double eval_psi_prime(const BranchingMechanism& m, double lam)
{
    if (!(lam > 0.0))
        throw std::invalid_argument("psi' argument must be positive");
    return m.sigma2 * lam - m.gamma + jump_part_prime(m.levy, lam, m.compensation);
}

double psi_prime_at_zero(const BranchingMechanism& m)
{
    double jump = std::visit(
        overloaded{[](const ZeroMeasure&) { return 0.0; },
                   [&](const StableMeasure& s) { return s.alpha < 1.0 ? -infinity : 0.0; },
                   [&](const auto& other) {
                       if (m.compensation == Compensation::FullCompensation)
                           return 0.0;
                       return -compensation_shift(LevyMeasure{other});
                   }},
        m.levy);
    return jump - m.gamma;
}

double unit_truncation_drift(const BranchingMechanism& m)
{
    if (auto s = std::get_if<StableMeasure>(&m.levy)) {
        double C = stable_density_constant(s->alpha, s->c);
        return s->alpha < 1.0 ? m.gamma + C / (1.0 - s->alpha) : m.gamma - C / (s->alpha - 1.0);
    }
    return convert_compensation(m, Compensation::UnitTruncation).gamma;
}

BranchingMechanism esscher(const BranchingMechanism& m, double lam)
{
    if (!(lam >= 0.0))
        throw std::invalid_argument("Esscher parameter must be nonnegative");
    BranchingMechanism r = m;
    r.kappa = 0.0;
    if (lam == 0.0)
        return r;
    r.gamma = -eval_psi_prime(m, lam);
    r.compensation = Compensation::FullCompensation;
    r.levy = std::visit(
        overloaded{[](const ZeroMeasure& z) -> LevyMeasure { return z; },
                   [&](const AtomMeasure& a) -> LevyMeasure {
                       AtomMeasure out;
                       for (const auto& at : a.atoms) {
                           double w = at.mass * std::exp(-lam * at.y);
                           if (w > 0.0)
                               out.atoms.push_back({at.y, w});
                       }
                       return out;
                   },
                   [&](const StableMeasure& s) -> LevyMeasure {
                       return TemperedMeasure{s.alpha, lam, stable_density_constant(s.alpha, s.c)};
                   },
                   [&](const TemperedMeasure& t) -> LevyMeasure {
                       return TemperedMeasure{t.alpha, t.theta + lam, t.c};
                   },
                   [&](const DensityMeasure& d) -> LevyMeasure {
                       DensityMeasure out = d;
                       out.tilt += lam;
                       out.hint.tail_rate += lam;
                       return out;
                   }},
        m.levy);
    return r;
}

BranchingMechanism convert_compensation(const BranchingMechanism& m, Compensation target)
{
    if (m.compensation == target)
        return m;
    double shift = compensation_shift(m.levy);
    if (!std::isfinite(shift))
        throw std::invalid_argument(
            "full compensation requires a finite first moment on [1, infinity)");
    BranchingMechanism r = m;
    r.compensation = target;
    r.gamma = target == Compensation::FullCompensation ? m.gamma + shift : m.gamma - shift;
    return r;
}

int asymptotic_sign(const BranchingMechanism& m, bool derivative)
{
    if (m.sigma2 > 0.0)
        return 1;
    bool unit = m.compensation == Compensation::UnitTruncation;
    // Limit of psi' at infinity when the jump part grows at most linearly;
    // NaN flags superlinear growth, which is always positive.
    double lin = std::visit(
        overloaded{[&](const ZeroMeasure&) { return -m.gamma; },
                   [&](const AtomMeasure& a) {
                       double s = 0.0;
                       for (const auto& at : a.atoms)
                           if (!unit || at.y < 1.0)
                               s += at.mass * at.y;
                       return s - m.gamma;
                   },
                   [&](const StableMeasure& s) {
                       return s.alpha > 1.0 ? std::numeric_limits<double>::quiet_NaN() : -m.gamma;
                   },
                   [&](const TemperedMeasure& t) {
                       if (t.alpha > 1.0)
                           return std::numeric_limits<double>::quiet_NaN();
                       PowerLaw p = as_power_law(t);
                       return (unit ? p.I0() : p.I0() + p.I1()) - m.gamma;
                   },
                   [&](const DensityMeasure& d) {
                       if (std::isnan(d.hint.small_index))
                           return infinity; // unknown: sentinel
                       if (d.hint.small_index >= 1.0)
                           return std::numeric_limits<double>::quiet_NaN();
                       double I0 = integrate_from_zero(
                           [&](double y) { return y * density_at(d, y); }, 1.0);
                       double I1 = unit ? 0.0 : density_I1(d);
                       return I0 + I1 - m.gamma;
                   }},
        m.levy);
    if (std::isnan(lin))
        return 1;
    if (std::isinf(lin))
        return 0;
    double scale = std::max(1.0, std::fabs(m.gamma));
    if (derivative)
        return lin > 1e-12 * scale ? 1 : -1;
    if (lin > 1e-12 * scale)
        return 1;
    if (lin < -1e-12 * scale)
        return -1;
    // Linear part cancels: the sublinear remainder is negative for every
    // family reaching this point (constant -mass - kappa for atoms, a
    // negative q^alpha term for alpha < 1).
    return -1;
}

namespace {

// Largest x with f(x) < 0, given f < 0 near 0+ and f nondecreasing beyond its
// last sign change. Returns infinity per the asymptotic certificate.
double convex_crossing(const std::function<double(double)>& f, int sign_at_infinity,
                       const char* what)
{
    double lo = 0.0;
    double hi = 1.0;
    if (f(hi) < 0.0) {
        lo = hi;
        while (true) {
            hi = 2.0 * lo;
            if (f(hi) >= 0.0)
                break;
            lo = hi;
            if (hi >= probe_cap) {
                if (sign_at_infinity < 0)
                    return infinity;
                if (sign_at_infinity == 0)
                    throw InconclusiveError(std::string(what) +
                                            ": negative at probing cap with no asymptotic certificate");
                if (hi > 1e300)
                    throw NumericalError(std::string(what) + ": certificate contradicted by probing");
            }
        }
    }
    for (int it = 0; it < 4000; ++it) {
        double mid;
        if (lo == 0.0)
            mid = 0.5 * hi;
        else if (hi > 4.0 * lo)
            mid = std::sqrt(lo * hi);
        else
            mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi)
            break;
        if (f(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
        if (lo > 0.0 && hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * hi)
            break;
        if (hi < 1e-300)
            return 0.0;
    }
    return lo == 0.0 ? hi : lo + 0.5 * (hi - lo);
}

} // namespace

double largest_root(const BranchingMechanism& m)
{
    validate(m);
    if (m.kappa == 0.0 && psi_prime_at_zero(m) >= -1e-12)
        return 0.0;
    return convex_crossing([&](double q) { return eval_psi(m, q); }, asymptotic_sign(m, false),
                           "largest_root");
}

double argmin_location(const BranchingMechanism& m)
{
    validate(m);
    if (psi_prime_at_zero(m) >= -1e-12)
        return 0.0;
    return convex_crossing([&](double q) { return eval_psi_prime(m, q); },
                           asymptotic_sign(m, true), "argmin_location");
}

double small_q_exponent(const BranchingMechanism& m)
{
    return std::visit(overloaded{[](const StableMeasure& s) {
                                     return s.alpha < 1.0
                                                ? s.alpha
                                                : std::numeric_limits<double>::quiet_NaN();
                                 },
                                 [](const TemperedMeasure& t) {
                                     return (t.theta == 0.0 && t.alpha < 1.0)
                                                ? t.alpha
                                                : std::numeric_limits<double>::quiet_NaN();
                                 },
                                 [](const DensityMeasure& d) {
                                     if (d.hint.tail_rate == 0.0 && d.hint.tail_index < 1.0)
                                         return d.hint.tail_index;
                                     return std::numeric_limits<double>::quiet_NaN();
                                 },
                                 [](const auto&) { return std::numeric_limits<double>::quiet_NaN(); }},
                      m.levy);
}

Divergence divergence_probe(const std::function<double(double)>& h, double x0)
{
    std::vector<double> inc;
    double hi = x0;
    for (int k = 0; k < 30; ++k) {
        double lo = hi / 10.0;
        double v = integrate(h, lo, hi, 0.0);
        if (!std::isfinite(v))
            return Divergence::Diverges;
        inc.push_back(v);
        hi = lo;
    }
    std::vector<double> ratio;
    for (std::size_t k = inc.size() - 6; k + 1 < inc.size(); ++k)
        ratio.push_back(inc[k] > 0.0 ? inc[k + 1] / inc[k] : 0.0);
    double rmin = *std::min_element(ratio.begin(), ratio.end());
    double rmax = *std::max_element(ratio.begin(), ratio.end());
    if (rmin >= 0.999)
        return Divergence::Diverges;
    if (rmax < 0.99 && rmax - rmin <= 1e-3 * rmax)
        return Divergence::Converges;
    if (rmax < 0.5)
        return Divergence::Converges;
    return Divergence::Inconclusive;
}

Classification classify(const BranchingMechanism& m)
{
    validate(m);
    if (m.kappa > 0.0)
        throw std::invalid_argument("criticality classification requires kappa = 0");
    Classification c{};
    double d0 = psi_prime_at_zero(m);
    if (d0 < -1e-12)
        c.criticality = Criticality::Supercritical;
    else if (d0 > 1e-12)
        c.criticality = Criticality::Subcritical;
    else
        c.criticality = Criticality::Critical;
    double rho = largest_root(m);
    c.immortal = std::isinf(rho) || is_zero_mechanism(m);
    if (std::isfinite(d0)) {
        c.nonexplosive = true;
        return c;
    }
    double beta = small_q_exponent(m);
    if (!std::isnan(beta)) {
        c.nonexplosive = beta >= 1.0;
        return c;
    }
    double x0 = std::isfinite(rho) ? std::min(1.0, 0.5 * rho) : 1.0;
    Divergence d = divergence_probe([&](double q) { return 1.0 / std::fabs(eval_psi(m, q)); }, x0);
    if (d == Divergence::Inconclusive)
        throw InconclusiveError("Grey condition: divergence probe inconclusive");
    c.nonexplosive = d == Divergence::Diverges;
    return c;
}

} // namespace csbp
