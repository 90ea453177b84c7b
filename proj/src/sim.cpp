#include "csbp/sim.hpp"

#include "csbp/error.hpp"
#include "csbp/quadrature.hpp"
#include "csbp/special.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace csbp {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// A finite measure on (0, infinity) driving jumps, with its normalised sampler.
struct JumpLaw {
    double rate = 0.0;
    double mean = nan;
    double var = nan;
    Sampler sample;
    // Power-law families: density proportional to y^{-1-a} e^{-theta y}.
    bool power = false;
    double a = 0.0;
    double theta = 0.0;
    LevyMeasure mu;
    int w = 0;
    double delta = 0.0;
};

double table_hi(double lo) { return std::max(lo * 1e8, 1e4); }

// mu restricted to [delta, infinity), weighted by y^w (w = 0 or 1).
JumpLaw restricted_law(const LevyMeasure& mu, int w, double delta)
{
    JumpLaw law;
    law.rate = levy_moment(mu, w, delta, infinity);
    if (!(law.rate > 0.0)) {
        law.rate = 0.0;
        return law;
    }
    if (!std::isfinite(law.rate))
        throw std::invalid_argument("sim: jump rate above the cutoff is infinite");
    double m1 = levy_moment(mu, w + 1, delta, infinity);
    double m2 = levy_moment(mu, w + 2, delta, infinity);
    law.mean = m1 / law.rate;
    law.var = std::isfinite(m2) ? m2 / law.rate - law.mean * law.mean : infinity;
    law.mu = mu;
    law.w = w;
    law.delta = delta;
    if (auto s = std::get_if<StableMeasure>(&mu)) {
        law.power = true;
        law.a = s->alpha - w;
    } else if (auto t = std::get_if<TemperedMeasure>(&mu)) {
        law.power = true;
        law.a = t->alpha - w;
        law.theta = t->theta;
    }
    if (law.power) {
        double a = law.a, th = law.theta;
        law.sample = [a, th, delta](Stream& st) { return sample_power_exp_tail(a, th, delta, st); };
    } else if (auto at = std::get_if<AtomMeasure>(&mu)) {
        std::vector<double> ys, ws;
        for (const auto& a : at->atoms)
            if (a.y >= delta) {
                ys.push_back(a.y);
                ws.push_back(a.mass * std::pow(a.y, w));
            }
        DiscreteSampler d(ys, ws);
        law.sample = [d](Stream& st) { return d(st); };
    } else if (std::holds_alternative<DensityMeasure>(mu)) {
        LevyMeasure copy = mu;
        auto h = [copy, w](double y) { return std::pow(y, w) * levy_density(copy, y); };
        law.sample = tabulated_sampler(h, delta, table_hi(delta));
    }
    return law;
}

// Branch grafts: y-marginal (1/lam)(1 - e^{-lam y}(1 + lam y)) nu(dy), then
// k + 1 ~ Poisson(lam y) conditioned on >= 2.
struct BranchLaw {
    double rate = 0.0;
    Sampler sample_y;
};

BranchLaw branch_law(const JointMechanism& j)
{
    BranchLaw law;
    law.rate = graft_branch_mass(j);
    if (!(law.rate > 0.0)) {
        law.rate = 0.0;
        return law;
    }
    double lam = j.lam;
    const LevyMeasure& nu = j.base.levy;
    double alpha = 0.0, theta = 0.0;
    bool power = false;
    if (auto s = std::get_if<StableMeasure>(&nu)) {
        alpha = s->alpha;
        power = true;
    } else if (auto t = std::get_if<TemperedMeasure>(&nu)) {
        alpha = t->alpha;
        theta = t->theta;
        power = true;
    }
    if (power) {
        // Envelope min(z^2/2, 1) for 1 - e^{-z}(1 + z), split at z = sqrt(2).
        double b = std::sqrt(2.0) / lam;
        auto head = [&](double y) { return 0.5 * lam * std::pow(y, 1.0 - alpha) * std::exp(-theta * y); };
        auto tail = [&](double y) { return std::pow(y, -1.0 - alpha) * std::exp(-theta * y) / lam; };
        double mh = integrate_from_zero(head, b);
        double mt = integrate_to_infinity(tail, b);
        double p_head = mh / (mh + mt);
        law.sample_y = [=](Stream& s) {
            for (;;) {
                bool in_head = s.uniform() < p_head;
                double y = in_head ? sample_power_exp_head(2.0 - alpha, theta, b, s)
                                   : sample_power_exp_tail(alpha, theta, b, s);
                double z = lam * y;
                double env = in_head ? 0.5 * z * z : 1.0;
                if (s.uniform() * env <= one_minus_exp_poly(z))
                    return y;
            }
        };
    } else if (auto at = std::get_if<AtomMeasure>(&nu)) {
        std::vector<double> ys, ws;
        for (const auto& a : at->atoms) {
            ys.push_back(a.y);
            ws.push_back(a.mass * one_minus_exp_poly(lam * a.y));
        }
        DiscreteSampler d(ys, ws);
        law.sample_y = [d](Stream& s) { return d(s); };
    } else if (std::holds_alternative<DensityMeasure>(nu)) {
        LevyMeasure copy = nu;
        auto h = [copy, lam](double y) { return one_minus_exp_poly(lam * y) * levy_density(copy, y); };
        law.sample_y = tabulated_sampler(h, 1e-12 / lam, 1e6 / lam);
    }
    return law;
}

// Exact step of dX = (a + bX)dt + sqrt(s2 X) dW over h.
double cbi_step(double x, double a, double s2, double b, double h, Stream& s)
{
    double m = std::exp(b * h);
    double grow = b == 0.0 ? h : std::expm1(b * h) / b;
    if (s2 == 0.0)
        return x * m + a * grow;
    double c = 0.5 * s2 * grow;
    std::int64_t n = x > 0.0 ? s.poisson(x * m / c) : 0;
    double shape = static_cast<double>(n) + 2.0 * a / s2;
    return shape > 0.0 ? c * s.gamma(shape) : 0.0;
}

double sum_draws(const JumpLaw& law, std::int64_t n, Stream& s)
{
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i)
        acc += law.sample(s);
    return acc;
}

double normal_sum(double n, double mean, double var, Stream& s)
{
    return std::max(0.0, n * mean + std::sqrt(n * var) * s.normal());
}

// Total size of Poisson(expected) jumps. Large batches use a normal sum; with
// an infinite variance the jumps above a level D (about 100 of them) are drawn
// one by one and those below D are summed normally.
std::pair<double, std::int64_t> leap_sum(const JumpLaw& law, double expected, Stream& s)
{
    if (!(expected > 0.0))
        return {0.0, 0};
    if (expected <= 1000.0 || (!law.power && !std::isfinite(law.var))) {
        std::int64_t n = s.poisson(expected);
        return {sum_draws(law, n, s), n};
    }
    if (std::isfinite(law.var)) {
        std::int64_t n = s.poisson(expected);
        return {normal_sum(static_cast<double>(n), law.mean, law.var, s), n};
    }
    double per = expected / law.rate;
    auto above = [&](double D) { return per * levy_moment(law.mu, law.w, D, infinity); };
    double lo = law.delta, hi = law.delta;
    while (above(hi) > 100.0)
        hi *= 2.0;
    for (int i = 0; i < 60 && hi > lo * (1 + 1e-6); ++i) {
        double mid = std::sqrt(lo * hi);
        (above(mid) > 100.0 ? lo : hi) = mid;
    }
    double D = hi;
    double n_small_mean = per * levy_moment(law.mu, law.w, law.delta, D);
    double m1 = per * levy_moment(law.mu, law.w + 1, law.delta, D);
    double m2 = per * levy_moment(law.mu, law.w + 2, law.delta, D);
    double acc = 0.0;
    std::int64_t n_small = 0;
    if (n_small_mean > 0.0) {
        n_small = s.poisson(n_small_mean);
        double mean = m1 / n_small_mean;
        acc += normal_sum(static_cast<double>(n_small), mean, m2 / n_small_mean - mean * mean, s);
    }
    std::int64_t n_big = s.poisson(above(D));
    for (std::int64_t i = 0; i < n_big; ++i)
        acc += sample_power_exp_tail(law.a, law.theta, D, s);
    return {acc, n_small + n_big};
}

} // namespace

struct Engine {
    SimConfig cfg;
    double s2 = 0.0;        // diffusion, small jumps folded in
    double b = 0.0;         // drift rate per unit mass
    double a_per_l = 0.0;   // immigration rate per skeleton individual
    double kappa = 0.0;
    double beta = 0.0;      // births per unit mass
    double death = 0.0;     // per individual
    double atom = 0.0;      // binary branching without mass, per individual
    double lam = 0.0;
    JumpLaw jumps;          // per unit mass
    JumpLaw zero_grafts;    // per individual
    BranchLaw branch;       // per individual
    bool two_type = false;

    void set_continuous(const BranchingMechanism& m)
    {
        const LevyMeasure& nu = m.levy;
        double delta = cfg.delta;
        b = unit_truncation_drift(m);
        if (has_jumps(nu))
            b -= delta < 1.0 ? levy_moment(nu, 1, delta, 1.0) : -levy_moment(nu, 1, 1.0, delta);
        s2 = m.sigma2;
        if (cfg.small_jump_diffusion && has_jumps(nu))
            s2 += levy_moment(nu, 2, 0.0, delta);
        jumps = restricted_law(nu, 0, delta);
    }

    std::pair<double, std::int64_t> sample_branch_graft(Stream& s) const
    {
        double y = branch.sample_y(s);
        return {y, sample_poisson_at_least_two(lam * y, s) - 1};
    }

    TwoTypePath run(double x0, std::int64_t l0, double T, Stream& s) const;
};

namespace {

struct Runner {
    const Engine& e;
    Stream& s;
    TwoTypePath& path;
    double x;
    std::int64_t l;
    bool recording = true;
    bool done = false;

    void record(double t, EventTag tag, std::int64_t k = 0, std::int64_t count = 1)
    {
        if (e.cfg.record_events && recording)
            path.events.push_back({t, x, l, tag, k, count});
    }

    void check_caps(double t)
    {
        bool first = path.status != PathStatus::Exploded;
        if (x >= e.cfg.x_max && std::isinf(path.t_cap_x))
            path.t_cap_x = t;
        if (static_cast<double>(l) >= e.cfg.l_max && std::isinf(path.t_cap_l))
            path.t_cap_l = t;
        if (first && (std::isfinite(path.t_cap_x) || std::isfinite(path.t_cap_l))) {
            path.status = PathStatus::Exploded;
            path.status_time = t;
            record(t, EventTag::Explosion);
            recording = false;
        }
    }

    bool caps_done() const
    {
        bool xs = std::isfinite(path.t_cap_x);
        bool ls = std::isfinite(path.t_cap_l);
        return e.two_type ? (xs && ls) : xs || ls;
    }

    bool runaway() const { return !(x <= 1e300) || static_cast<double>(l) > 1e15; }

    void continuous(double h)
    {
        double a = e.a_per_l * static_cast<double>(l);
        x = cbi_step(x, a, e.s2, e.b, h, s);
    }

    void kill(double t)
    {
        path.killed = true;
        if (path.status != PathStatus::Exploded) {
            path.status = PathStatus::Exploded;
            path.status_time = t;
        }
        record(t, EventTag::Killed);
        done = true;
    }

    void exact_events(double t0, double h)
    {
        double tl = 0.0;
        for (;;) {
            double dl = static_cast<double>(l);
            double J = x * e.jumps.rate;
            double G0 = dl * e.zero_grafts.rate;
            double D = dl * e.death, A = dl * e.atom, Br = dl * e.branch.rate;
            double B = e.beta * x, K = e.kappa * x;
            double total = J + G0 + D + A + Br + B + K;
            if (!(total > 0.0))
                return;
            if (total * (h - tl) > 4.0 * e.cfg.batch_threshold) {
                batch_events(t0 + tl, h - tl);
                return;
            }
            tl += s.exponential() / total;
            if (tl >= h)
                return;
            double t = t0 + tl;
            double u = s.uniform() * total;
            if ((u -= J) < 0.0) {
                x += e.jumps.sample(s);
                record(t, EventTag::MassJump);
            } else if ((u -= G0) < 0.0) {
                x += e.zero_grafts.sample(s);
                record(t, EventTag::Graft, 0);
            } else if ((u -= D) < 0.0) {
                --l;
                record(t, EventTag::SkeletonDeath);
            } else if ((u -= A) < 0.0) {
                ++l;
                record(t, EventTag::SkeletonBranch, 1);
            } else if ((u -= Br) < 0.0) {
                auto [y, k] = e.sample_branch_graft(s);
                x += y;
                l += k;
                record(t, EventTag::Graft, k);
            } else if ((u -= B) < 0.0) {
                ++l;
                record(t, EventTag::MassBirth);
            } else {
                kill(t);
                return;
            }
            check_caps(t);
            if ((x == 0.0 && l == 0) || (path.status == PathStatus::Exploded && (caps_done() || runaway())))
                return;
        }
    }

    void batch_events(double t0, double h)
    {
        if (runaway())
            return;
        double t = t0 + h;
        double dl = static_cast<double>(l);
        if (e.kappa > 0.0 && s.poisson(e.kappa * x * h) > 0) {
            kill(t0 + s.uniform() * h);
            return;
        }
        // Midpoint mass for the leap: jumps feed their own rate within the step.
        double growth = e.jumps.rate > 0.0 && std::isfinite(e.jumps.mean) ? e.jumps.rate * e.jumps.mean : 0.0;
        auto [dx, nj] = leap_sum(e.jumps, x * std::exp(0.5 * growth * h) * e.jumps.rate * h, s);
        auto [dz, n0] = leap_sum(e.zero_grafts, dl * e.zero_grafts.rate * h, s);
        dx += dz;
        std::int64_t nd = s.poisson(dl * e.death * h);
        std::int64_t na = s.poisson(dl * e.atom * h);
        std::int64_t ng = s.poisson(dl * e.branch.rate * h);
        std::int64_t nb = s.poisson(e.beta * x * h);
        std::int64_t dk = 0;
        for (std::int64_t i = 0; i < ng; ++i) {
            auto [y, k] = e.sample_branch_graft(s);
            dx += y;
            dk += k;
        }
        x += dx;
        l = std::max<std::int64_t>(0, l + dk + na + nb - nd);
        if (nj > 0)
            record(t, EventTag::MassJump, 0, nj);
        if (n0 > 0)
            record(t, EventTag::Graft, 0, n0);
        if (ng > 0)
            record(t, EventTag::Graft, dk, ng);
        if (na > 0)
            record(t, EventTag::SkeletonBranch, 1, na);
        if (nd > 0)
            record(t, EventTag::SkeletonDeath, 0, nd);
        if (nb > 0)
            record(t, EventTag::MassBirth, 0, nb);
        check_caps(t);
    }

    void events(double t0, double h)
    {
        double dl = static_cast<double>(l);
        double expected = h * (x * (e.jumps.rate + e.beta + e.kappa) +
                               dl * (e.zero_grafts.rate + e.death + e.atom + e.branch.rate));
        if (expected > e.cfg.batch_threshold)
            batch_events(t0, h);
        else
            exact_events(t0, h);
    }
};

} // namespace

TwoTypePath Engine::run(double x0, std::int64_t l0, double T, Stream& s) const
{
    if (!(x0 >= 0.0) || l0 < 0 || !(T >= 0.0))
        throw std::invalid_argument("sim: initial state and horizon must be nonnegative");
    if (!two_type && l0 != 0)
        throw std::invalid_argument("sim: CSBP paths carry no skeleton");
    TwoTypePath path;
    path.x0 = x0;
    path.l0 = l0;
    path.seed = s.seed();
    path.stream_id = s.id();
    path.status_time = T;
    Runner r{*this, s, path, x0, l0};
    r.check_caps(0.0);
    if (x0 == 0.0 && l0 == 0) {
        path.status = PathStatus::Extinct;
        path.status_time = 0.0;
    }
    std::int64_t n = T > 0.0 ? static_cast<std::int64_t>(std::ceil(T / cfg.h - 1e-9)) : 0;
    double h = n > 0 ? T / static_cast<double>(n) : 0.0;
    std::int64_t window_end = -1;
    for (std::int64_t i = 0; i < n && path.status != PathStatus::Extinct; ++i) {
        double t0 = h * static_cast<double>(i);
        if (path.status == PathStatus::Exploded) {
            if (r.caps_done())
                break;
            if (window_end < 0)
                window_end = i + cfg.cap_window_steps;
            if (i >= window_end || r.runaway())
                break;
        }
        r.continuous(0.5 * h);
        r.check_caps(t0 + 0.5 * h);
        r.events(t0, h);
        if (r.done)
            break;
        r.continuous(0.5 * h);
        r.check_caps(t0 + h);
        if (cfg.record_steps)
            r.record(t0 + h, EventTag::DiffusionStep);
        if (path.status == PathStatus::AliveAtT && r.x == 0.0 && r.l == 0) {
            path.status = PathStatus::Extinct;
            path.status_time = t0 + h;
            break;
        }
    }
    path.x_T = r.x;
    path.l_T = r.l;
    return path;
}

double poisson_kernel(double x, std::int64_t l, double lam)
{
    if (!(x >= 0.0) || l < 0 || !(lam > 0.0))
        throw std::invalid_argument("poisson_kernel: need x >= 0, l >= 0, lam > 0");
    if (x == 0.0)
        return l == 0 ? 1.0 : 0.0;
    return std::exp(log_poisson_pmf(l, lam * x));
}

std::int64_t sample_poisson(double mean, Stream& s)
{
    if (!(mean >= 0.0))
        throw std::invalid_argument("sample_poisson: mean must be nonnegative");
    return s.poisson(mean);
}

std::string to_string(EventTag tag)
{
    switch (tag) {
    case EventTag::DiffusionStep:
        return "diffusion_step";
    case EventTag::MassJump:
        return "mass_jump";
    case EventTag::SkeletonBranch:
        return "skeleton_branch";
    case EventTag::SkeletonDeath:
        return "skeleton_death";
    case EventTag::MassBirth:
        return "mass_birth";
    case EventTag::Graft:
        return "graft";
    case EventTag::Explosion:
        return "explosion";
    case EventTag::Killed:
        return "killed";
    }
    return "?";
}

std::string to_string(PathStatus s)
{
    switch (s) {
    case PathStatus::AliveAtT:
        return "alive_at_T";
    case PathStatus::Exploded:
        return "exploded";
    case PathStatus::Extinct:
        return "extinct";
    }
    return "?";
}

void SimConfig::validate() const
{
    if (!(h > 0.0) || !(delta > 0.0))
        throw std::invalid_argument("sim config: h and delta must be positive");
    if (!(x_max > 0.0) || !(l_max > 0.0))
        throw std::invalid_argument("sim config: caps must be positive");
    if (!(batch_threshold > 0.0) || cap_window_steps < 0)
        throw std::invalid_argument("sim config: invalid batch threshold or cap window");
}

CsbpSimulator::CsbpSimulator(const BranchingMechanism& m, const SimConfig& cfg)
{
    validate(m);
    cfg.validate();
    auto e = std::make_shared<Engine>();
    e->cfg = cfg;
    e->set_continuous(m);
    e->kappa = m.kappa;
    engine_ = e;
}

TwoTypePath CsbpSimulator::run(double x0, double T, Stream& s) const
{
    if (x0 >= engine_->cfg.x_max)
        throw std::invalid_argument("sim: initial mass at or above the cap");
    return engine_->run(x0, 0, T, s);
}

TwoTypeSimulator::TwoTypeSimulator(const JointMechanism& j, const SimConfig& cfg) : j_(j), cfg_(cfg)
{
    cfg.validate();
    auto e = std::make_shared<Engine>();
    e->cfg = cfg;
    e->two_type = true;
    e->lam = j.lam;
    e->set_continuous(j.esscher_mech);
    e->kappa = j.base.kappa;
    e->a_per_l = j.base.sigma2;
    if (has_jumps(j.esscher_mech.levy))
        e->a_per_l += levy_moment(j.esscher_mech.levy, 2, 0.0, cfg.delta);
    e->zero_grafts = restricted_law(j.esscher_mech.levy, 1, cfg.delta);
    e->branch = branch_law(j);
    e->death = j.death_rate();
    e->atom = j.diffusion_atom();
    e->beta = j.birth_rate();
    engine_ = e;
}

TwoTypePath TwoTypeSimulator::run(double x0, std::int64_t l0, double T, Stream& s) const
{
    if (x0 >= cfg_.x_max || static_cast<double>(l0) >= cfg_.l_max)
        throw std::invalid_argument("sim: initial state at or above the caps");
    return engine_->run(x0, l0, T, s);
}

SkeletonPath TwoTypeSimulator::run_skeleton(std::int64_t l0, double T, Stream& s) const
{
    if (j_.regime != Regime::AtOrAbove)
        throw std::invalid_argument("skeleton GW needs lambda >= rho");
    if (l0 < 0 || !(T >= 0.0))
        throw std::invalid_argument("skeleton GW: l0 and T must be nonnegative");
    const Engine& e = *engine_;
    double rate = e.death + e.atom + e.branch.rate;
    SkeletonPath p;
    p.status_time = T;
    std::int64_t l = l0;
    double t = 0.0;
    if (cfg_.record_events)
        p.events.push_back({0.0, l});
    for (;;) {
        if (l == 0) {
            p.status = PathStatus::Extinct;
            p.status_time = t;
            break;
        }
        t += s.exponential() / (static_cast<double>(l) * rate);
        if (t > T)
            break;
        double u = s.uniform() * rate;
        if (u < e.death)
            --l;
        else if (u < e.death + e.atom)
            ++l;
        else
            l += e.sample_branch_graft(s).second;
        if (cfg_.record_events)
            p.events.push_back({t, l});
        if (static_cast<double>(l) >= cfg_.l_max) {
            p.status = PathStatus::Exploded;
            p.status_time = t;
            break;
        }
    }
    p.l_T = l;
    return p;
}

TwoTypePath sample_csbp_path(const BranchingMechanism& m, double x0, double T, const SimConfig& cfg,
                             Stream& s)
{
    return CsbpSimulator(m, cfg).run(x0, T, s);
}

TwoTypePath sample_two_type_path(const JointMechanism& j, double x0, std::int64_t l0, double T,
                                 const SimConfig& cfg, Stream& s)
{
    return TwoTypeSimulator(j, cfg).run(x0, l0, T, s);
}

SkeletonPath sample_skeleton_gw(const JointMechanism& j, std::int64_t l0, double T,
                                const SimConfig& cfg, Stream& s)
{
    return TwoTypeSimulator(j, cfg).run_skeleton(l0, T, s);
}

void write_path_csv(std::ostream& os, const TwoTypePath& path)
{
    os << "t,x,l,event_tag\n" << std::setprecision(17);
    for (const auto& ev : path.events) {
        os << ev.t << ',' << ev.x << ',' << ev.l << ',' << to_string(ev.tag);
        if (ev.tag == EventTag::Graft || ev.tag == EventTag::SkeletonBranch)
            os << '(' << ev.k << ')';
        if (ev.count > 1)
            os << '*' << ev.count;
        os << '\n';
    }
}

} // namespace csbp
