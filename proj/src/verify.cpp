#include "csbp/verify.hpp"

#include "csbp/error.hpp"
#include "csbp/flow.hpp"
#include "csbp/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <stdexcept>

namespace csbp {

namespace {

using ojson = nlohmann::ordered_json;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0)
{
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

ojson spec_json(const BranchingMechanism& m)
{
    try {
        return mechanism_to_json(m);
    } catch (const std::exception&) {
        return "opaque";
    }
}

ojson joint_inputs(const JointMechanism& j)
{
    ojson in;
    in["mechanism"] = spec_json(j.base);
    in["lambda"] = j.lam;
    in["regime"] = to_string(j.regime);
    return in;
}

ojson mc_inputs(const McOptions& opt)
{
    ojson in;
    in["N"] = opt.n_paths;
    in["seed"] = opt.seed;
    in["h"] = opt.sim.h;
    in["delta"] = opt.sim.delta;
    return in;
}

void finish_statistical(TestReport& r, const MeanEstimate& e, double reference)
{
    r.kind = ReportKind::Statistical;
    r.statistic = e.mean;
    r.reference = reference;
    r.error = e.se;
    r.score = z_score(e, reference);
    r.degenerate = e.degenerate;
    if (e.degenerate)
        r.notes.push_back("degenerate variance: all paths gave the same value");
    r.pass = std::fabs(r.score) <= r.level;
}

void bonferroni_note(TestReport& r, std::size_t tests)
{
    if (tests > 1)
        r.notes.push_back("grid of " + std::to_string(tests) + " tests at " + std::to_string(r.level) +
                          " sigma each; familywise level is not adjusted");
}

double path_value(double q, double r, double x, std::int64_t l, bool cemetery)
{
    if (cemetery)
        return 0.0;
    return std::exp(-q * x) * std::pow(r, static_cast<double>(l));
}

// Decile bins of X among surviving paths; bins under 100 paths are merged into
// their left neighbour.
std::vector<std::vector<std::size_t>> decile_bins(const TerminalSample& s)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.x.size(); ++i)
        if (!s.cemetery[i])
            idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s.x[a] < s.x[b]; });
    std::vector<std::vector<std::size_t>> bins;
    std::size_t n = idx.size();
    for (int b = 0; b < 10; ++b) {
        std::size_t lo = n * b / 10, hi = n * (b + 1) / 10;
        std::vector<std::size_t> bin(idx.begin() + lo, idx.begin() + hi);
        if (!bins.empty() && bin.size() < 100)
            bins.back().insert(bins.back().end(), bin.begin(), bin.end());
        else if (!bin.empty())
            bins.push_back(std::move(bin));
    }
    if (bins.size() > 1 && bins.front().size() < 100) {
        bins[1].insert(bins[1].begin(), bins[0].begin(), bins[0].end());
        bins.erase(bins.begin());
    }
    return bins;
}

} // namespace

std::string to_string(ReportKind k)
{
    return k == ReportKind::Analytic ? "analytic" : "statistical";
}

std::string to_string(InitLaw i)
{
    return i == InitLaw::Fixed ? "fixed" : "poisson";
}

ojson to_json(const TestReport& r, bool with_runtime)
{
    ojson out;
    out["name"] = r.name;
    out["kind"] = to_string(r.kind);
    out["inputs"] = r.inputs;
    out["statistic"] = json_number(r.statistic);
    out["reference"] = json_number(r.reference);
    out[r.kind == ReportKind::Analytic ? "tolerance" : "stderr"] = json_number(r.error);
    out[r.kind == ReportKind::Analytic ? "residual" : "z"] = json_number(r.score);
    if (r.kind == ReportKind::Statistical)
        out["level"] = r.level;
    out["verdict"] = r.pass ? "pass" : "fail";
    out["degenerate"] = r.degenerate;
    out["notes"] = r.notes;
    out["details"] = r.details;
    if (with_runtime)
        out["runtime_s"] = r.runtime_s;
    return out;
}

void write_suite_csv(std::ostream& os, const std::vector<TestReport>& reports)
{
    os << "name,kind,statistic,reference,error,score,level,verdict\n";
    os << std::setprecision(17);
    for (const auto& r : reports) {
        os << r.name << ',' << to_string(r.kind) << ',' << r.statistic << ',' << r.reference << ','
           << r.error << ',' << r.score << ',';
        if (r.kind == ReportKind::Statistical)
            os << r.level;
        os << ',' << (r.pass ? "pass" : "fail") << '\n';
    }
}

MeanEstimate estimate_mean(const std::vector<double>& v)
{
    MeanEstimate e;
    e.n = v.size();
    if (v.empty())
        return e;
    double mean = 0.0, m2 = 0.0;
    std::size_t k = 0;
    for (double y : v) {
        ++k;
        double d = y - mean;
        mean += d / static_cast<double>(k);
        m2 += d * (y - mean);
    }
    e.mean = mean;
    double var = e.n > 1 ? m2 / static_cast<double>(e.n - 1) : 0.0;
    e.se = std::sqrt(var / static_cast<double>(e.n));
    e.degenerate = std::all_of(v.begin(), v.end(), [&](double y) { return y == v.front(); });
    return e;
}

double z_score(const MeanEstimate& e, double reference)
{
    double d = e.mean - reference;
    if (e.degenerate || !(e.se > 0.0))
        return std::fabs(d) <= 1e-12 * (1.0 + std::fabs(reference)) ? 0.0 : std::copysign(infinity, d);
    return d / e.se;
}

std::vector<CoreTerm> random_core_combination(std::size_t n, Stream& s, double q_max)
{
    std::vector<CoreTerm> f(n);
    for (auto& t : f) {
        t.coef = 2.0 * s.uniform() - 1.0;
        t.q = q_max * s.uniform();
        t.r = s.uniform();
    }
    return f;
}

TestReport check_generator_intertwining(const JointMechanism& j, const std::vector<CoreTerm>& f,
                                        double x, double tol)
{
    auto t0 = clock_type::now();
    TestReport rep;
    rep.name = "generator_intertwining";
    rep.inputs = joint_inputs(j);
    rep.inputs["x"] = x;
    rep.inputs["terms"] = f.size();
    double gk = 0.0, kh = 0.0, scale = 0.0;
    for (const auto& t : f) {
        double s = t.q + j.lam * (1.0 - t.r);
        double e = x * std::exp(-s * x);
        double left = t.coef * e * eval_psi(j.base, s);
        double right = t.coef * e * (psi_c(j, t.q, t.r) + j.lam * psi_d(j, t.q, t.r));
        gk += left;
        kh += right;
        scale += std::fabs(left);
    }
    rep.statistic = gk;
    rep.reference = kh;
    rep.error = tol;
    rep.score = std::fabs(gk - kh) / (1.0 + scale);
    rep.pass = rep.score <= tol;
    rep.details["scale"] = scale;
    rep.runtime_s = seconds_since(t0);
    return rep;
}

TestReport mc_laplace_joint(const JointMechanism& j, double x, InitLaw init, std::int64_t n0, double q,
                            double r, double t, const McOptions& opt)
{
    if (opt.n_paths < 1000)
        throw std::invalid_argument("mc_laplace_joint: needs at least 1000 paths");
    auto t0 = clock_type::now();
    TestReport rep;
    rep.name = "mc_laplace_joint";
    rep.level = opt.level;
    rep.inputs = joint_inputs(j);
    rep.inputs["x"] = x;
    rep.inputs["init"] = to_string(init);
    if (init == InitLaw::Fixed)
        rep.inputs["l0"] = n0;
    rep.inputs["q"] = q;
    rep.inputs["r"] = r;
    rep.inputs["t"] = t;
    rep.inputs.update(mc_inputs(opt));

    double reference;
    if (t == 0.0) {
        double l_term = init == InitLaw::Fixed ? std::pow(r, static_cast<double>(n0))
                                               : std::exp(-j.lam * x * (1.0 - r));
        reference = std::exp(-q * x) * l_term;
    } else {
        auto flow = solve_joint(j, q, r, t);
        if (flow.boundary)
            throw NumericalError("mc_laplace_joint: flow hit a boundary: " + flow.boundary_reason);
        double u = flow.u(t), f = flow.f(t);
        reference = init == InitLaw::Fixed ? std::exp(-x * u) * std::pow(f, static_cast<double>(n0))
                                           : std::exp(-x * (u + j.lam * (1.0 - f)));
        rep.details["u"] = u;
        rep.details["f"] = f;
    }
    TwoTypeSimulator sim(j, opt.sim);
    auto values = run_replicates(opt.n_paths, opt.threads, [&](std::size_t i) {
        Stream s(opt.seed, i);
        std::int64_t l0 = init == InitLaw::Fixed ? n0 : s.poisson(j.lam * x);
        auto p = sim.run(x, l0, t, s);
        return path_value(q, r, p.x_T, p.l_T, p.in_cemetery());
    });
    finish_statistical(rep, estimate_mean(values), reference);
    rep.runtime_s = seconds_since(t0);
    return rep;
}

TerminalSample simulate_terminal(const JointMechanism& j, double x, double t, const McOptions& opt)
{
    TerminalSample out;
    out.lam = j.lam;
    out.x0 = x;
    out.t = t;
    TwoTypeSimulator sim(j, opt.sim);
    struct End {
        double x;
        std::int64_t l;
        bool cemetery;
    };
    auto ends = run_replicates(opt.n_paths, opt.threads, [&](std::size_t i) {
        Stream s(opt.seed, i);
        auto p = sim.run(x, s.poisson(j.lam * x), t, s);
        return End{p.x_T, p.l_T, p.in_cemetery()};
    });
    out.x.reserve(ends.size());
    for (const auto& e : ends) {
        out.x.push_back(e.x);
        out.l.push_back(e.l);
        out.cemetery.push_back(e.cemetery);
    }
    return out;
}

TestReport marginal_law_test(const JointMechanism& j, const TerminalSample& sample,
                             const std::vector<double>& q_grid, double level)
{
    if (q_grid.empty())
        throw std::invalid_argument("marginal_law_test: empty q grid");
    auto t0 = clock_type::now();
    TestReport rep;
    rep.name = "marginal_law";
    rep.kind = ReportKind::Statistical;
    rep.level = level;
    rep.inputs = joint_inputs(j);
    rep.inputs["x"] = sample.x0;
    rep.inputs["t"] = sample.t;
    rep.inputs["q_grid"] = q_grid;
    rep.inputs["N"] = sample.x.size();
    rep.details["rows"] = ojson::array();
    double worst = -1.0;
    bool all_degenerate = true;
    for (double q : q_grid) {
        double reference = std::exp(-q * sample.x0);
        if (sample.t > 0.0) {
            auto flow = solve_u(j.base, q, sample.t);
            if (flow.boundary)
                throw NumericalError("marginal_law_test: flow hit a boundary: " + flow.boundary_reason);
            reference = std::exp(-sample.x0 * flow.u(sample.t));
        }
        std::vector<double> v(sample.x.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = path_value(q, 1.0, sample.x[i], 0, sample.cemetery[i]);
        auto e = estimate_mean(v);
        double z = z_score(e, reference);
        all_degenerate = all_degenerate && e.degenerate;
        rep.details["rows"].push_back({{"q", q}, {"estimate", e.mean}, {"stderr", e.se}, {"reference", reference}, {"z", z}});
        if (std::fabs(z) > worst) {
            worst = std::fabs(z);
            rep.statistic = e.mean;
            rep.reference = reference;
            rep.error = e.se;
            rep.score = z;
        }
    }
    rep.degenerate = all_degenerate;
    rep.pass = worst <= level;
    bonferroni_note(rep, q_grid.size());
    rep.runtime_s = seconds_since(t0);
    return rep;
}

TestReport marginal_law_test(const JointMechanism& j, double x, double t,
                             const std::vector<double>& q_grid, const McOptions& opt)
{
    auto t0 = clock_type::now();
    auto rep = marginal_law_test(j, simulate_terminal(j, x, t, opt), q_grid, opt.level);
    rep.inputs.update(mc_inputs(opt));
    rep.runtime_s = seconds_since(t0);
    return rep;
}

TestReport paired_marginal_test(const TerminalSample& a, const TerminalSample& b,
                                const std::vector<double>& q_grid, double level)
{
    if (a.x0 != b.x0 || a.t != b.t)
        throw std::invalid_argument("paired_marginal_test: samples differ in x or t");
    auto t0 = clock_type::now();
    TestReport rep;
    rep.name = "paired_marginal";
    rep.kind = ReportKind::Statistical;
    rep.level = level;
    rep.inputs["lambda_a"] = a.lam;
    rep.inputs["lambda_b"] = b.lam;
    rep.inputs["x"] = a.x0;
    rep.inputs["t"] = a.t;
    rep.inputs["q_grid"] = q_grid;
    rep.details["rows"] = ojson::array();
    double worst = -1.0;
    auto values = [](const TerminalSample& s, double q) {
        std::vector<double> v(s.x.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = path_value(q, 1.0, s.x[i], 0, s.cemetery[i]);
        return estimate_mean(v);
    };
    for (double q : q_grid) {
        auto ea = values(a, q), eb = values(b, q);
        double se = std::hypot(ea.se, eb.se);
        double d = ea.mean - eb.mean;
        double z = se > 0.0 ? d / se : (d == 0.0 ? 0.0 : std::copysign(infinity, d));
        rep.details["rows"].push_back({{"q", q}, {"estimate_a", ea.mean}, {"estimate_b", eb.mean}, {"z", z}});
        if (std::fabs(z) > worst) {
            worst = std::fabs(z);
            rep.statistic = d;
            rep.reference = 0.0;
            rep.error = se;
            rep.score = z;
        }
    }
    rep.pass = worst <= level;
    bonferroni_note(rep, q_grid.size());
    rep.runtime_s = seconds_since(t0);
    return rep;
}

TestReport poisson_conditional_test(const TerminalSample& sample, const std::vector<double>& r_grid,
                                    double level, double lam_reference)
{
    if (r_grid.empty())
        throw std::invalid_argument("poisson_conditional_test: empty r grid");
    auto t0 = clock_type::now();
    double lam = std::isnan(lam_reference) ? sample.lam : lam_reference;
    TestReport rep;
    rep.name = "poisson_conditional";
    rep.kind = ReportKind::Statistical;
    rep.level = level;
    rep.inputs["lambda"] = sample.lam;
    if (lam != sample.lam)
        rep.inputs["lambda_reference"] = lam;
    rep.inputs["x"] = sample.x0;
    rep.inputs["t"] = sample.t;
    rep.inputs["r_grid"] = r_grid;
    rep.inputs["N"] = sample.x.size();
    rep.details["rows"] = ojson::array();
    auto bins = decile_bins(sample);
    rep.details["bins"] = bins.size();
    double worst = -1.0, worst_bin = 0.0;
    bool all_degenerate = true;
    for (double r : r_grid) {
        std::vector<double> d(sample.x.size());
        for (std::size_t i = 0; i < d.size(); ++i)
            d[i] = sample.cemetery[i] ? 0.0
                                      : std::pow(r, static_cast<double>(sample.l[i])) -
                                            std::exp(-lam * sample.x[i] * (1.0 - r));
        auto e = estimate_mean(d);
        double z = z_score(e, 0.0);
        all_degenerate = all_degenerate && e.degenerate;
        for (const auto& bin : bins) {
            std::vector<double> db;
            db.reserve(bin.size());
            for (auto i : bin)
                db.push_back(d[i]);
            worst_bin = std::max(worst_bin, std::fabs(z_score(estimate_mean(db), 0.0)));
        }
        rep.details["rows"].push_back({{"r", r}, {"mean_difference", e.mean}, {"stderr", e.se}, {"z", z}});
        if (std::fabs(z) > worst) {
            worst = std::fabs(z);
            rep.statistic = e.mean;
            rep.reference = 0.0;
            rep.error = e.se;
            rep.score = z;
        }
    }
    rep.details["max_bin_z"] = worst_bin;
    rep.degenerate = all_degenerate;
    rep.pass = worst <= level;
    bonferroni_note(rep, r_grid.size());
    rep.notes.push_back("decile bins are a diagnostic and do not enter the verdict");
    rep.runtime_s = seconds_since(t0);
    return rep;
}

TestReport poisson_conditional_test(const JointMechanism& j, double x, double t,
                                    const std::vector<double>& r_grid, const McOptions& opt)
{
    auto t0 = clock_type::now();
    auto rep = poisson_conditional_test(simulate_terminal(j, x, t, opt), r_grid, opt.level);
    rep.inputs = [&] {
        auto in = joint_inputs(j);
        in.update(rep.inputs);
        in.update(mc_inputs(opt));
        return in;
    }();
    rep.runtime_s = seconds_since(t0);
    return rep;
}

TestReport binomial_thinning_test(const BranchingMechanism& m, double lam, double mu,
                                  const std::vector<double>& r_grid, double t, double tol)
{
    auto t0 = clock_type::now();
    auto jl = make_joint(m, lam);
    if (!(mu > lam) || jl.regime != Regime::AtOrAbove)
        throw std::invalid_argument("binomial_thinning_test: needs mu > lam >= rho");
    if (r_grid.empty())
        throw std::invalid_argument("binomial_thinning_test: empty r grid");
    auto jm = make_joint(m, mu);
    double p = lam / mu;
    TestReport rep;
    rep.name = "binomial_thinning";
    rep.inputs["mechanism"] = spec_json(m);
    rep.inputs["lambda"] = lam;
    rep.inputs["mu"] = mu;
    rep.inputs["t"] = t;
    rep.inputs["r_grid"] = r_grid;
    rep.error = tol;
    rep.score = -1.0;
    rep.details["rows"] = ojson::array();
    for (double r : r_grid) {
        double left = solve_skeleton(jm, 1.0 - p + p * r, t).f(t);
        double right = 1.0 - p + p * solve_skeleton(jl, r, t).f(t);
        double res = std::fabs(left - right);
        rep.details["rows"].push_back({{"r", r}, {"left", left}, {"right", right}, {"residual", res}});
        if (res > rep.score) {
            rep.score = res;
            rep.statistic = left;
            rep.reference = right;
        }
    }
    rep.pass = rep.score <= tol;
    rep.runtime_s = seconds_since(t0);
    return rep;
}

TestReport explosion_coupling_test(const JointMechanism& j, double x, double T, const McOptions& opt,
                                   double fraction)
{
    if (j.base.kappa != 0.0)
        throw std::invalid_argument("explosion_coupling_test: needs kappa = 0");
    auto t0 = clock_type::now();
    TestReport rep;
    rep.name = "explosion_coupling";
    rep.kind = ReportKind::Statistical;
    rep.level = opt.level;
    rep.inputs = joint_inputs(j);
    rep.inputs["x"] = x;
    rep.inputs["T"] = T;
    rep.inputs["x_max"] = opt.sim.x_max;
    rep.inputs["l_max"] = opt.sim.l_max;
    rep.inputs.update(mc_inputs(opt));

    bool explosive = !classify(j.base).nonexplosive;
    double reference = explosive ? 1.0 - std::exp(-x * u_at_zero(j.base, T)) : 0.0;
    TwoTypeSimulator sim(j, opt.sim);
    struct Outcome {
        bool exploded;
        double gap;
    };
    auto out = run_replicates(opt.n_paths, opt.threads, [&](std::size_t i) {
        Stream s(opt.seed, i);
        auto p = sim.run(x, s.poisson(j.lam * x), T, s);
        return Outcome{p.status == PathStatus::Exploded, std::fabs(p.t_cap_x - p.t_cap_l)};
    });
    std::vector<double> hits(out.size());
    std::size_t exploded = 0, coupled = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        hits[i] = out[i].exploded ? 1.0 : 0.0;
        if (out[i].exploded) {
            ++exploded;
            if (out[i].gap <= 2.0 * opt.sim.h * (1.0 + 1e-9))
                ++coupled;
        }
    }
    double n = static_cast<double>(out.size());
    double freq = static_cast<double>(exploded) / n;
    double se = std::sqrt(reference * (1.0 - reference) / n);
    rep.statistic = freq;
    rep.reference = reference;
    rep.error = se;
    rep.score = se > 0.0 ? (freq - reference) / se : (exploded == 0 ? 0.0 : infinity);
    double share = exploded > 0 ? static_cast<double>(coupled) / static_cast<double>(exploded) : 1.0;
    rep.details["exploded"] = exploded;
    rep.details["coupled_within_2h"] = coupled;
    rep.details["coupled_share"] = share;
    rep.details["required_share"] = fraction;
    bool freq_ok = std::fabs(rep.score) <= rep.level;
    bool coupling_ok = share >= fraction;
    if (exploded == 0 && reference > 10.0 / n) {
        rep.notes.push_back("no explosions observed although the reference exceeds 10/N");
        freq_ok = false;
    }
    rep.pass = freq_ok && coupling_ok;
    rep.runtime_s = seconds_since(t0);
    return rep;
}

double convergence_error(const BranchingMechanism& m, double q, double t, double lam)
{
    double u = solve_u(m, q, t).u(t);
    double ul = solve_u(m, -lam * std::expm1(-q / lam), t).u(t);
    return std::fabs(ul - u) / u;
}

TestReport convergence_scan(const BranchingMechanism& m, double x, double q, double t,
                            const std::vector<double>& lam_list, const ConvergenceOptions& opt)
{
    if (lam_list.empty() || !std::is_sorted(lam_list.begin(), lam_list.end()) ||
        std::adjacent_find(lam_list.begin(), lam_list.end()) != lam_list.end())
        throw std::invalid_argument("convergence_scan: lambda list must be strictly increasing");
    double rho = largest_root(m);
    if (lam_list.front() < rho)
        throw std::invalid_argument("convergence_scan: every lambda must be >= rho");
    auto t0 = clock_type::now();
    TestReport rep;
    rep.name = "convergence_scan";
    rep.inputs["mechanism"] = spec_json(m);
    rep.inputs["x"] = x;
    rep.inputs["q"] = q;
    rep.inputs["t"] = t;
    rep.inputs["lambdas"] = lam_list;
    rep.details["rows"] = ojson::array();
    std::vector<double> err;
    for (double lam : lam_list) {
        double e = convergence_error(m, q, t, lam);
        err.push_back(e);
        rep.details["rows"].push_back({{"lambda", lam}, {"error", e}, {"lambda_error", lam * e}});
    }
    // Residual: largest step-to-step change; strict decrease means it is negative.
    double step = -infinity;
    for (std::size_t i = 1; i < err.size(); ++i)
        step = std::max(step, err[i] - err[i - 1]);
    bool monotone = step < 0.0;
    if (!monotone)
        rep.notes.push_back("error is not strictly decreasing in lambda");
    rep.details["monotone"] = monotone;
    rep.details["ratio_last_first"] = err.back() / err.front();
    rep.statistic = err.back();
    rep.reference = err.front();
    rep.score = err.size() > 1 ? step : -err.front();
    rep.error = 0.0;
    rep.pass = monotone;
    if (opt.mc) {
        double lam = std::isnan(opt.mc_lam) ? lam_list.back() : opt.mc_lam;
        auto j = make_joint(m, lam);
        if (j.regime != Regime::AtOrAbove)
            throw std::invalid_argument("convergence_scan: the MC check needs lam >= rho");
        double reference = std::exp(-x * solve_u(m, -lam * std::expm1(-q / lam), t).u(t));
        TwoTypeSimulator sim(j, opt.mc_opt.sim);
        auto v = run_replicates(opt.mc_opt.n_paths, opt.mc_opt.threads, [&](std::size_t i) {
            Stream s(opt.mc_opt.seed, i);
            auto p = sim.run_skeleton(s.poisson(lam * x), t, s);
            if (p.status == PathStatus::Exploded)
                return 0.0;
            return std::exp(-q * static_cast<double>(p.l_T) / lam);
        });
        auto e = estimate_mean(v);
        double z = z_score(e, reference);
        rep.details["mc"] = {{"lambda", lam}, {"N", opt.mc_opt.n_paths}, {"seed", opt.mc_opt.seed},
                             {"estimate", e.mean}, {"stderr", e.se}, {"reference", reference}, {"z", z},
                             {"level", opt.mc_opt.level}};
        if (std::fabs(z) > opt.mc_opt.level) {
            rep.notes.push_back("MC spot check outside the level");
            rep.pass = false;
        }
    }
    rep.runtime_s = seconds_since(t0);
    return rep;
}

} // namespace csbp
