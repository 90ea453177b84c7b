#include "csbp/joint.hpp"

#include "csbp/error.hpp"
#include "csbp/quadrature.hpp"
#include "csbp/sampling.hpp"
#include "csbp/special.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <stdexcept>

namespace csbp {

namespace {

constexpr std::int64_t max_terms = 1000000;

struct Power {
    double C;
    double alpha;
    double theta;
};

bool as_power(const LevyMeasure& nu, Power& p)
{
    if (auto s = std::get_if<StableMeasure>(&nu)) {
        p = {stable_density_constant(s->alpha, s->c), s->alpha, 0.0};
        return true;
    }
    if (auto t = std::get_if<TemperedMeasure>(&nu)) {
        p = {t->c, t->alpha, t->theta};
        return true;
    }
    return false;
}

double unkilled(const BranchingMechanism& m, double q) { return eval_psi_unkilled(m, q); }

// Breaks for integrands built from phi(a y).
std::vector<double> scale_breaks(std::initializer_list<double> rates)
{
    std::vector<double> b{1.0};
    for (double a : rates)
        if (a > 0.0)
            b.push_back(1.0 / a);
    return b;
}

// sum_k int (e^{-qy} r^{k+1} - r) s(dy, k), as an integral against nu.
double graft_integral(const JointMechanism& j, const DensityMeasure& d, double q, double g)
{
    double lam = j.lam;
    double r = 1.0 - g;
    auto f = [&](double y) {
        double v = levy_density(LevyMeasure{d}, y);
        if (v == 0.0)
            return 0.0;
        return (phi((q + lam * g) * y) - phi((q + lam) * y) + r * phi(lam * y)) * v;
    };
    return integrate_half_line(f, scale_breaks({q + lam * g, q + lam, lam})) / lam;
}

double graft_power_integral(const JointMechanism& j, const Power& p, double q, double g)
{
    DensityMeasure d = density_from_terms({{p.C, p.alpha, p.theta}});
    return graft_integral(j, d, q, g);
}

double graft_series_atoms(const JointMechanism& j, const AtomMeasure& a, double q, double g)
{
    double lam = j.lam;
    double r = 1.0 - g;
    double total = 0.0;
    for (const auto& at : a.atoms) {
        double z = lam * at.y;
        double eq = std::exp(-q * at.y);
        double log_base = std::log(at.mass * at.y) - z;
        double sum = 0.0;
        double rk1 = r; // r^{k+1}
        for (std::int64_t k = 0;; ++k) {
            double t = std::exp(log_base + k * std::log(z) - std::lgamma(k + 2.0));
            sum += t * (eq * rk1 - r);
            rk1 *= r;
            double ratio = z / (k + 3.0);
            if (k > z && ratio < 1.0) {
                double tail = t * ratio / (1.0 - ratio);
                if (tail <= 1e-16 * std::max(std::fabs(sum), 1e-300) || tail < 1e-300)
                    break;
            }
            if (k >= max_terms)
                throw NumericalError("graft series for atoms did not converge");
        }
        total += sum;
    }
    return total;
}

// lam * B_1 for a power law: -G [th'^a - th^a - a lam th'^{a-1}].
double power_lam_b1(const Power& p, double lam)
{
    double G = p.C * std::tgamma(-p.alpha);
    double tp = p.theta + lam;
    if (p.theta == 0.0)
        return -G * std::pow(lam, p.alpha) * (1.0 - p.alpha);
    return G * std::pow(tp, p.alpha) * pow1p_minus_linear(p.alpha, -lam / tp);
}

double graft_series_power(const JointMechanism& j, const Power& p, double q, double g)
{
    double lam = j.lam;
    double r = 1.0 - g;
    double tp = p.theta + lam;
    double rate = r * lam / (tp + q);
    if (rate > 0.99)
        return graft_power_integral(j, p, q, g);
    // A_0(q) - m_0.
    double a0 = p.C * std::tgamma(1.0 - p.alpha) * std::pow(tp, p.alpha - 1.0) *
                pow1p_minus_one(p.alpha - 1.0, q / tp);
    double b1 = power_lam_b1(p, lam) / lam;
    double sum = 0.0;
    double lC = std::log(p.C);
    double ll = std::log(lam);
    double lq = std::log(tp + q);
    double lr = std::log(r);
    for (std::int64_t k = 1;; ++k) {
        double la = lC + std::lgamma(k + 1.0 - p.alpha) + k * ll - std::lgamma(k + 2.0) -
                    (k + 1.0 - p.alpha) * lq;
        double t = std::exp(la + (k + 1.0) * lr);
        sum += t;
        double tail = t * rate / (1.0 - rate);
        if (tail <= 1e-16 * sum || t == 0.0)
            break;
        if (k >= max_terms)
            throw NumericalError("graft series for power law did not converge");
    }
    return r * a0 + sum - r * b1;
}

double graft_series(const JointMechanism& j, double q, double g)
{
    const LevyMeasure& nu = j.base.levy;
    Power p{};
    if (as_power(nu, p))
        return graft_series_power(j, p, q, g);
    if (auto a = std::get_if<AtomMeasure>(&nu))
        return graft_series_atoms(j, *a, q, g);
    if (auto d = std::get_if<DensityMeasure>(&nu))
        return graft_integral(j, *d, q, g);
    return 0.0;
}

} // namespace

std::string to_string(Regime r) { return r == Regime::AtOrAbove ? "at_or_above" : "below"; }

std::string to_string(Autonomy a)
{
    switch (a) {
    case Autonomy::DiscreteAutonomous:
        return "discrete_autonomous";
    case Autonomy::ContinuousAutonomous:
        return "continuous_autonomous";
    case Autonomy::Coupled:
        return "coupled";
    }
    return "unknown";
}

double JointMechanism::death_rate() const
{
    double d = regime == Regime::AtOrAbove ? std::max(psi_at_lam, 0.0) : 0.0;
    return (d + base.kappa) / lam;
}

double JointMechanism::birth_rate() const
{
    return regime == Regime::Below ? std::max(-psi_at_lam, 0.0) : 0.0;
}

JointMechanism make_joint(const BranchingMechanism& m, double lam)
{
    if (!(lam > 0.0) || !std::isfinite(lam))
        throw std::invalid_argument("lambda must be positive and finite");
    validate(m);
    JointMechanism j;
    j.base = m;
    j.lam = lam;
    j.rho = largest_root(m);
    j.regime = lam >= j.rho ? Regime::AtOrAbove : Regime::Below;
    j.esscher_mech = esscher(m, lam);
    j.psi_at_lam = eval_psi(m, lam);
    j.psi_prime_at_lam = eval_psi_prime(m, lam);
    return j;
}

double psi_c_g(const JointMechanism& j, double q, double g)
{
    double v = unkilled(j.esscher_mech, q) - j.base.kappa;
    if (j.regime == Regime::Below)
        v += g * j.psi_at_lam;
    return v;
}

double psi_d_closed_g(const JointMechanism& j, double q, double g)
{
    double v = unkilled(j.base, q + j.lam * g) - unkilled(j.esscher_mech, q);
    if (j.regime == Regime::Below)
        v -= g * j.psi_at_lam;
    return v / j.lam;
}

double psi_d_series_g(const JointMechanism& j, double q, double g)
{
    double r = 1.0 - g;
    return graft_series(j, q, g) + j.diffusion_atom() * (r * r - r) + j.death_rate() * g -
           j.base.sigma2 * q * r;
}

double psi_c(const JointMechanism& j, double q, double r)
{
    if (!(q > 0.0) || !(r > 0.0 && r < 1.0))
        throw std::invalid_argument("psi_c needs q > 0 and r in (0,1)");
    return psi_c_g(j, q, 1.0 - r);
}

double psi_d_closed(const JointMechanism& j, double q, double r)
{
    if (!(q > 0.0) || !(r > 0.0 && r < 1.0))
        throw std::invalid_argument("psi_d needs q > 0 and r in (0,1)");
    return psi_d_closed_g(j, q, 1.0 - r);
}

double psi_d_series(const JointMechanism& j, double q, double r)
{
    if (!(q > 0.0) || !(r > 0.0 && r < 1.0))
        throw std::invalid_argument("psi_d needs q > 0 and r in (0,1)");
    return psi_d_series_g(j, q, 1.0 - r);
}

double psi_d(const JointMechanism& j, double q, double r)
{
    double c = psi_d_closed(j, q, r);
    double s = psi_d_series(j, q, r);
    double g = 1.0 - r;
    double scale = std::max({1.0, std::fabs(c),
                             (std::fabs(unkilled(j.base, q + j.lam * g)) +
                              std::fabs(unkilled(j.esscher_mech, q)) + std::fabs(g * j.psi_at_lam)) /
                                 j.lam});
    if (std::fabs(c - s) > 1e-9 * scale)
        throw NumericalError("Psi_d closed form and series disagree");
    return c;
}

double joint_identity_residual(const JointMechanism& j, double q, double r)
{
    double lhs = eval_psi(j.base, q + j.lam * (1.0 - r));
    return lhs - psi_c(j, q, r) - j.lam * psi_d_series(j, q, r);
}

double GraftSlice::sample(Stream& s) const
{
    if (empty() || !std::isfinite(mass) || !sampler)
        throw std::logic_error("graft slice has no finite mass to sample from");
    return sampler(s);
}

GraftSlice graft_kernel(const JointMechanism& j, std::int64_t k)
{
    if (k < 0)
        throw std::invalid_argument("graft slice index must be nonnegative");
    GraftSlice out;
    out.k = k;
    out.diffusion_atom = k == 1 ? j.diffusion_atom() : 0.0;
    double lam = j.lam;
    const LevyMeasure& nu = j.base.levy;
    Power p{};
    if (as_power(nu, p)) {
        double shape = k + 1.0 - p.alpha;
        if (shape <= 0.0) {
            out.mass = infinity;
            return out;
        }
        double tp = p.theta + lam;
        out.mass = std::exp(std::log(p.C) + std::lgamma(shape) + k * std::log(lam) -
                            std::lgamma(k + 2.0) - shape * std::log(tp));
        out.sampler = [shape, tp](Stream& s) { return s.gamma(shape) / tp; };
    } else if (auto a = std::get_if<AtomMeasure>(&nu)) {
        std::vector<double> w;
        std::vector<double> ys;
        for (const auto& at : a->atoms) {
            double z = lam * at.y;
            double v = std::exp(std::log(at.mass * at.y) - z + k * std::log(z) - std::lgamma(k + 2.0));
            out.mass += v;
            w.push_back(out.mass);
            ys.push_back(at.y);
        }
        double total = out.mass;
        out.sampler = [w, ys, total](Stream& s) {
            double u = s.uniform() * total;
            auto it = std::upper_bound(w.begin(), w.end(), u);
            std::size_t i = std::min<std::size_t>(it - w.begin(), w.size() - 1);
            return ys[i];
        };
    } else if (auto d = std::get_if<DensityMeasure>(&nu)) {
        LevyMeasure copy = *d;
        auto h = [copy, lam, k](double y) {
            double v = levy_density(copy, y);
            if (v == 0.0)
                return 0.0;
            return std::exp(std::log(y) - lam * y + k * std::log(lam * y) - std::lgamma(k + 2.0)) * v;
        };
        double centre = (k + 1.0) / lam;
        double m = integrate_half_line(h, {std::min(1.0, centre), std::max(1.0, centre)});
        out.mass = m;
        if (std::isfinite(m) && m >= 1e-300)
            out.sampler = tabulated_sampler(h, centre * 1e-12, centre * 1e4);
    }
    if (out.mass < 1e-300) {
        out.mass = 0.0;
        out.sampler = nullptr;
    }
    return out;
}

double graft_branch_mass(const JointMechanism& j)
{
    double lam = j.lam;
    const LevyMeasure& nu = j.base.levy;
    Power p{};
    if (as_power(nu, p))
        return power_lam_b1(p, lam) / lam;
    if (auto a = std::get_if<AtomMeasure>(&nu)) {
        double s = 0.0;
        for (const auto& at : a->atoms)
            s += at.mass * one_minus_exp_poly(lam * at.y);
        return s / lam;
    }
    if (auto d = std::get_if<DensityMeasure>(&nu)) {
        LevyMeasure copy = *d;
        auto f = [&](double y) { return one_minus_exp_poly(lam * y) * levy_density(copy, y); };
        return integrate_half_line(f, scale_breaks({lam})) / lam;
    }
    return 0.0;
}

double graft_total_mass(const JointMechanism& j)
{
    double lam = j.lam;
    const LevyMeasure& nu = j.base.levy;
    Power p{};
    if (as_power(nu, p)) {
        if (p.alpha > 1.0)
            return infinity;
        double m0 = p.C * std::tgamma(1.0 - p.alpha) * std::pow(p.theta + lam, p.alpha - 1.0);
        return m0 + power_lam_b1(p, lam) / lam;
    }
    if (auto a = std::get_if<AtomMeasure>(&nu)) {
        double s = 0.0;
        for (const auto& at : a->atoms)
            s += at.mass * (-std::expm1(-lam * at.y));
        return s / lam;
    }
    if (auto d = std::get_if<DensityMeasure>(&nu)) {
        LevyMeasure copy = *d;
        auto f = [&](double y) { return -std::expm1(-lam * y) * levy_density(copy, y); };
        return integrate_half_line(f, scale_breaks({lam})) / lam;
    }
    return 0.0;
}

double OffspringDistribution::prob(std::int64_t k) const
{
    if (k == -1)
        return p_minus1;
    if (k >= 1 && k <= static_cast<std::int64_t>(p.size()))
        return p[k - 1];
    return 0.0;
}

double OffspringDistribution::skeleton_mechanism(double r) const
{
    double s = p_minus1 * (1.0 - r);
    double rk = r * r;
    for (double pk : p) {
        s += (rk - r) * pk;
        rk *= r;
    }
    return total_rate * s;
}

OffspringDistribution offspring_distribution(const JointMechanism& j, double tail_tol)
{
    if (j.regime != Regime::AtOrAbove)
        throw std::invalid_argument("offspring law is defined only for lambda >= rho");
    double rate = j.psi_prime_at_lam;
    if (!(rate > 0.0))
        throw std::invalid_argument("offspring law needs psi'(lambda) > 0");
    OffspringDistribution d;
    d.total_rate = rate;
    d.p_minus1 = j.death_rate() * 1.0 / rate;
    double b1 = graft_branch_mass(j);
    double acc = 0.0;
    for (std::int64_t k = 1;; ++k) {
        GraftSlice s = graft_kernel(j, k);
        double pk = (s.diffusion_atom + s.mass) / rate;
        d.p.push_back(pk);
        acc += s.mass;
        double tail = std::max(b1 - acc, 0.0) / rate;
        if (tail < tail_tol || (s.mass == 0.0 && k > 1)) {
            d.tail_mass = tail;
            break;
        }
        if (k >= max_terms)
            throw NumericalError("offspring tail did not fall below tolerance within 10^6 terms");
    }
    d.cutoff = static_cast<std::int64_t>(d.p.size());
    return d;
}

void write_offspring_csv(std::ostream& os, const OffspringDistribution& d)
{
    os << "k,p_k,cumulative\n";
    os << std::setprecision(17);
    double c = d.p_minus1;
    os << -1 << ',' << d.p_minus1 << ',' << c << '\n';
    for (std::size_t i = 0; i < d.p.size(); ++i) {
        c += d.p[i];
        os << i + 1 << ',' << d.p[i] << ',' << c << '\n';
    }
}

namespace {

Divergence reciprocal_probe(const std::function<double(double)>& f)
{
    for (double x : {1e-8, 1e-4, 0.01, 0.1, 0.5, 1.0})
        if (f(x) == 0.0)
            return Divergence::Diverges;
    return divergence_probe([&](double x) { return 1.0 / std::fabs(f(x)); }, 1.0);
}

} // namespace

Autonomy autonomy_check(const TwoTypeDescription& d)
{
    if (d.pi_only_k0 && d.psi_c_at_r1) {
        Divergence v = reciprocal_probe(d.psi_c_at_r1);
        if (v == Divergence::Inconclusive)
            throw InconclusiveError("autonomy: divergence probe for Psi_c inconclusive");
        if (v == Divergence::Diverges)
            return Autonomy::DiscreteAutonomous;
    }
    if (d.rho_only_y0 && d.b == 0.0 && d.psi_d_at_q0) {
        Divergence v = reciprocal_probe([&](double g) { return d.psi_d_at_q0(1.0 - g); });
        if (v == Divergence::Inconclusive)
            throw InconclusiveError("autonomy: divergence probe for Psi_d inconclusive");
        if (v == Divergence::Diverges)
            return Autonomy::ContinuousAutonomous;
    }
    return Autonomy::Coupled;
}

Autonomy autonomy_check(const JointMechanism& j)
{
    TwoTypeDescription d;
    d.pi_only_k0 = j.regime == Regime::AtOrAbove || j.psi_at_lam == 0.0;
    d.rho_only_y0 = !has_jumps(j.base.levy);
    d.b = j.base.sigma2;
    d.psi_c_at_r1 = [&j](double q) { return psi_c_g(j, q, 0.0); };
    d.psi_d_at_q0 = [&j](double r) { return psi_d_closed_g(j, 0.0, 1.0 - r); };
    // psi_lambda has finite slope psi'(lambda) at 0, so without killing the
    // discrete criterion holds analytically.
    if (d.pi_only_k0 && j.base.kappa == 0.0)
        return Autonomy::DiscreteAutonomous;
    return autonomy_check(d);
}

} // namespace csbp
