// Acceptance run: one line per criterion, nonzero exit if any fails.
#include "commands.hpp"

#include "csbp/flow.hpp"
#include "csbp/joint.hpp"
#include "csbp/mechanism.hpp"
#include "csbp/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>

using namespace csbp;
namespace fs = std::filesystem;

namespace {

using clock_type = std::chrono::steady_clock;

int failures = 0;

void verdict(int id, bool ok, const std::string& what)
{
    std::printf("AC%-2d %s  %s\n", id, ok ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    if (!ok)
        ++failures;
}

double since(clock_type::time_point t0)
{
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

BranchingMechanism tempered(double a, double th, double c, double s2, double g)
{
    BranchingMechanism m;
    m.sigma2 = s2;
    m.gamma = g;
    m.levy = TemperedMeasure{a, th, c};
    return m;
}

BranchingMechanism atoms(std::vector<Atom> at, double s2 = 0.0, double g = 0.0)
{
    BranchingMechanism m;
    m.sigma2 = s2;
    m.gamma = g;
    m.levy = AtomMeasure{std::move(at)};
    return m;
}

BranchingMechanism density(double s2, double g)
{
    BranchingMechanism m;
    m.sigma2 = s2;
    m.gamma = g;
    m.levy = density_from_terms({{0.7, 0.6, 0.5}});
    return m;
}

// psi(q) = q^2/2 - q, rho = 2
BranchingMechanism feller_super() { return feller(1.0, 1.0); }

McOptions mc(std::size_t n, std::uint64_t seed, double h = 0.01, double delta = 1e-2)
{
    McOptions o;
    o.n_paths = n;
    o.seed = seed;
    o.sim.h = h;
    o.sim.delta = delta;
    return o;
}

void ac1()
{
    auto t0 = clock_type::now();
    std::vector<BranchingMechanism> fams = {feller_super(), stable_mechanism(1.5, 1.0, 0.0, 1.0),
                                            tempered(0.7, 1.0, 1.0, 0.3, 1.0),
                                            atoms({{0.5, 1.0}, {2.0, 0.3}}, 0.2, 0.7)};
    Stream s(101, 0);
    double worst = 0.0;
    int points = 0;
    for (const auto& m : fams) {
        double rho = largest_root(m);
        for (int i = 0; i < 200; ++i) {
            double lam = 2.0 * rho * s.uniform() + 0.05;
            double q = 5.0 * s.uniform();
            double r = s.uniform();
            auto j = make_joint(m, lam);
            double psi = eval_psi(m, q + lam * (1.0 - r));
            worst = std::max(worst, std::fabs(joint_identity_residual(j, q, r)) / (1.0 + std::fabs(psi)));
            ++points;
        }
    }
    double secs = since(t0);
    verdict(1, worst <= 1e-9 && secs < 1.0,
            fmt("joint identity: max residual/(1+|psi|) %.2e <= 1e-9 over %d points; %.2f s < 1 s", worst,
                points, secs));
}

void ac2()
{
    auto t0 = clock_type::now();
    std::vector<BranchingMechanism> fams = {feller_super(), stable_mechanism(1.5, 1.0, 0.0, 1.0),
                                            tempered(0.7, 1.0, 1.0, 0.3, 1.0),
                                            atoms({{0.5, 1.0}, {2.0, 0.3}}, 0.2, 0.7), density(0.1, 0.8)};
    Stream s(102, 0);
    double worst = 0.0;
    int below = 0, above = 0;
    for (int i = 0; i < 50; ++i) {
        const auto& m = fams[i % fams.size()];
        double rho = largest_root(m);
        double lam = i % 2 == 0 ? rho * (0.1 + 0.85 * s.uniform()) : rho * (1.0 + 2.0 * s.uniform());
        auto j = make_joint(m, lam);
        (j.regime == Regime::Below ? below : above)++;
        auto rep = check_generator_intertwining(j, random_core_combination(20, s), 0.1 + 3.0 * s.uniform());
        worst = std::max(worst, rep.score);
    }
    double secs = since(t0);
    verdict(2, worst <= 1e-9 && below == 25 && above == 25 && secs < 1.0,
            fmt("generator intertwining: max residual %.2e <= 1e-9 on 50 combinations (%d below, %d at/above "
                "rho); %.2f s < 1 s",
                worst, below, above, secs));
}

void ac3()
{
    auto t0 = clock_type::now();
    struct Scenario {
        const char* label;
        BranchingMechanism m;
        double lam_over_rho;
        InitLaw init;
        std::int64_t n0;
    };
    std::vector<Scenario> sc = {
        {"feller below poisson", feller_super(), 0.5, InitLaw::Poisson, 0},
        {"feller below fixed", feller_super(), 0.5, InitLaw::Fixed, 1},
        {"feller at poisson", feller_super(), 1.0, InitLaw::Poisson, 0},
        {"feller above fixed", feller_super(), 2.0, InitLaw::Fixed, 3},
        {"stable1.5 below poisson", stable_mechanism(1.5, 1.0, 0.0, 1.0), 0.5, InitLaw::Poisson, 0},
        {"stable1.5 above fixed", stable_mechanism(1.5, 1.0, 0.0, 1.0), 2.0, InitLaw::Fixed, 2},
        {"tempered below poisson", tempered(0.7, 1.0, 1.0, 0.3, 1.0), 0.5, InitLaw::Poisson, 0},
        {"tempered above fixed", tempered(0.7, 1.0, 1.0, 0.3, 1.0), 1.5, InitLaw::Fixed, 2},
        {"atoms above poisson", atoms({{0.5, 1.0}, {2.0, 0.3}}, 0.2, 0.7), 2.0, InitLaw::Poisson, 0},
        {"density at fixed", density(0.1, 0.8), 1.0, InitLaw::Fixed, 1},
    };
    int within = 0;
    std::string worst;
    double worst_z = 0.0;
    for (std::size_t i = 0; i < sc.size(); ++i) {
        const auto& s = sc[i];
        auto j = make_joint(s.m, s.lam_over_rho * largest_root(s.m));
        auto rep = mc_laplace_joint(j, 1.0, s.init, s.n0, 1.0, 0.5, 1.0, mc(100000, 300 + i));
        std::printf("     %-26s z = %+.2f\n", s.label, rep.score);
        if (std::fabs(rep.score) <= 3.0)
            ++within;
        if (std::fabs(rep.score) >= std::fabs(worst_z)) {
            worst_z = rep.score;
            worst = s.label;
        }
    }
    double secs = since(t0);
    verdict(3, within >= 9 && secs <= 300.0,
            fmt("joint Laplace functional: %d/10 scenarios within 3 sigma (need 9), N = 1e5, worst z %+.2f "
                "(%s); %.0f s <= 300 s",
                within, worst_z, worst.c_str(), secs));
}

void ac4()
{
    auto t0 = clock_type::now();
    auto m = feller_super();
    bool ok = true;
    double worst = 0.0;
    std::vector<TerminalSample> samples;
    for (double lam : {1.0, 2.0, 4.0}) {
        auto j = make_joint(m, lam);
        auto sample = simulate_terminal(j, 1.0, 1.0, mc(100000, 400 + static_cast<int>(lam)));
        auto ml = marginal_law_test(j, sample, {0.5, 1.0, 2.0});
        auto pc = poisson_conditional_test(sample, {0.25, 0.5, 0.75});
        std::printf("     lambda %.0f (%s): marginal max|z| %.2f, conditional max|z| %.2f\n", lam,
                    to_string(j.regime).c_str(), std::fabs(ml.score), std::fabs(pc.score));
        ok = ok && ml.pass && pc.pass;
        worst = std::max({worst, std::fabs(ml.score), std::fabs(pc.score)});
        samples.push_back(std::move(sample));
    }
    auto paired = paired_marginal_test(samples[0], samples[2], {0.5, 1.0, 2.0});
    std::printf("     paired marginals lambda 1 vs 4: max|z| %.2f\n", std::fabs(paired.score));
    auto power = poisson_conditional_test(samples[1], {0.5}, 3.0, 2.2);
    std::printf("     power check, reference with lambda 2.2 instead of 2: z %+.2f (must fail)\n", power.score);
    double secs = since(t0);
    verdict(4, ok && !power.pass && secs <= 300.0,
            fmt("skeleton decomposition, psi = q^2/2 - q, lambda in {1, 2, 4}: max|z| %.2f <= 3 over 6 tests, "
                "N = 1e5; perturbed reference rejected; %.0f s <= 300 s",
                worst, secs));
}

void ac5()
{
    auto t0 = clock_type::now();
    auto bin = offspring_distribution(make_joint(feller(2.0, 0.0), 1.0));
    bool binary = bin.p_minus1 == 0.5 && bin.p.size() >= 1 && bin.p[0] == 0.5;
    for (std::size_t k = 1; k < bin.p.size(); ++k)
        binary = binary && bin.p[k] == 0.0;
    auto at = offspring_distribution(make_joint(atoms({{0.5, 1.0}}), 2.0));
    double atom_err = std::fabs(at.p_minus1 - 0.58197);
    double norm = 0.0, gf = 0.0;
    std::vector<std::pair<BranchingMechanism, double>> cases = {
        {feller(2.0, 0.0), 1.0}, {atoms({{0.5, 1.0}}), 2.0}, {feller_super(), 3.0},
        {tempered(0.7, 1.0, 1.0, 0.3, 1.0), 2.0}, {atoms({{0.5, 1.0}, {2.0, 0.3}}, 0.2, 0.7), 2.0}};
    for (auto& [m, lam] : cases) {
        lam = std::max(lam, lam * largest_root(m));
        auto d = offspring_distribution(make_joint(m, lam));
        double total = d.p_minus1 + d.tail_mass;
        for (double p : d.p)
            total += p;
        norm = std::max(norm, std::fabs(total - 1.0));
        for (int i = 0; i <= 10; ++i) {
            double r = i / 10.0;
            gf = std::max(gf, std::fabs(d.skeleton_mechanism(r) - eval_psi_unkilled(m, lam * (1.0 - r)) / lam));
        }
    }
    double secs = since(t0);
    verdict(5, binary && atom_err <= 1e-4 && norm <= 1e-10 && gf <= 1e-8 && secs < 1.0,
            fmt("offspring law: binary (1/2, 1/2) %s; atom p_-1 = %.6f (|err| %.1e <= 1e-4); normalisation %.1e "
                "<= 1e-10; generating function %.1e <= 1e-8; %.2f s < 1 s",
                binary ? "exact" : "WRONG", at.p_minus1, atom_err, norm, gf, secs));
}

void ac6()
{
    auto t0 = clock_type::now();
    Stream s(106, 0);
    double oracle = 0.0, semi = 0.0;
    for (int i = 0; i < 100; ++i) {
        double s2 = 0.2 + 2.0 * s.uniform();
        double g = 2.0 * s.uniform() - 1.0;
        double q = 0.05 + 4.0 * s.uniform();
        double t = 0.1 + 3.0 * s.uniform();
        auto m = feller(s2, g);
        auto flow = solve_u(m, q, t);
        oracle = std::max(oracle, std::fabs(flow.u(t) - feller_u_oracle(s2, g, q, t)));
        double a = t * s.uniform();
        double composed = solve_u(m, flow.u(a), t - a).u(t - a);
        semi = std::max(semi, std::fabs(composed - flow.u(t)));
    }
    double secs = since(t0);
    verdict(6, oracle <= 1e-8 && semi <= 1e-8 && secs < 1.0,
            fmt("Feller oracle: max |u - oracle| %.1e <= 1e-8 on 100 points; semiflow %.1e <= 1e-8; %.2f s < 1 s",
                oracle, semi, secs));
}

void ac7()
{
    auto t0 = clock_type::now();
    std::vector<BranchingMechanism> fams = {feller_super(), feller(2.0, 0.0), stable_mechanism(1.5, 1.0, 0.0, 1.0),
                                            tempered(0.7, 1.0, 1.0, 0.3, 1.0),
                                            atoms({{0.5, 1.0}, {2.0, 0.3}}, 0.2, 0.7)};
    Stream s(107, 0);
    double worst = 0.0;
    int cells = 0;
    for (const auto& m : fams) {
        double rho = largest_root(m);
        for (int i = 0; i < 4; ++i) {
            double lam = std::max(rho, 0.1) * (1.0 + s.uniform());
            double mu = lam * (1.1 + 2.0 * s.uniform());
            double t = 0.2 + 2.0 * s.uniform();
            auto rep = binomial_thinning_test(m, lam, mu, {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}, t);
            worst = std::max(worst, rep.score);
            cells += 6;
        }
    }
    double secs = since(t0);
    verdict(7, worst <= 1e-8 && secs < 1.0,
            fmt("binomial intertwining: max residual %.1e <= 1e-8 over %d (lambda, mu, r, t) cells; %.2f s < 1 s",
                worst, cells, secs));
}

void ac8()
{
    auto t0 = clock_type::now();
    auto o = mc(10000, 800, 1e-3, 1e-4);
    o.sim.x_max = 1e6;
    o.sim.l_max = 1e6;
    auto rep = explosion_coupling_test(make_joint(stable_mechanism(0.5, 1.0), 1.0), 1.0, 1.0, o);
    double share = rep.details["coupled_share"].get<double>();
    double secs = since(t0);
    verdict(8, rep.pass && secs <= 300.0,
            fmt("simultaneous explosion, psi = -sqrt(q): frequency %.4f vs 1 - e^{-1/4} = %.4f (z %+.2f, |z| <= 3); "
                "%.2f%% of %d exploded paths coupled within 2h (>= 99%%); N = 1e4; %.0f s <= 300 s",
                rep.statistic, rep.reference, rep.score, 100.0 * share,
                rep.details["exploded"].get<int>(), secs));
}

void ac9()
{
    auto t0 = clock_type::now();
    ConvergenceOptions co;
    co.mc_lam = 10.0;
    co.mc_opt = mc(100000, 900);
    auto rep = convergence_scan(feller_super(), 1.0, 1.0, 1.0, {5, 10, 20, 40, 80}, co);
    bool monotone = rep.details["monotone"].get<bool>();
    double e5 = rep.reference, e80 = rep.statistic;
    double z = rep.details["mc"]["z"].get<double>();
    std::string scaled;
    for (const auto& row : rep.details["rows"])
        scaled += fmt(" %.4f", row["lambda_error"].get<double>());
    std::printf("     lambda * e(lambda):%s\n", scaled.c_str());
    double secs = since(t0);
    verdict(9, monotone && e80 <= e5 / 10.0 && std::fabs(z) <= 3.0 && secs <= 120.0,
            fmt("convergence scan: e(lambda) strictly decreasing %s, e(80) = %.2e <= e(5)/10 = %.2e; MC at lambda 10 "
                "z %+.2f (|z| <= 3, N = 1e5); %.0f s <= 120 s",
                monotone ? "yes" : "no", e80, e5 / 10.0, z, secs));
}

std::map<std::string, std::string> read_tree(const fs::path& dir)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file())
            continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        out[fs::relative(e.path(), dir).string()] = buf.str();
    }
    return out;
}

void ac10()
{
    auto t0 = clock_type::now();
    fs::path root = fs::temp_directory_path() / ("csbp_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::string spec = R"({"sigma2": 1, "gamma": 1})";
    std::vector<std::vector<std::string>> commands = {
        {"mech", "--spec", spec},
        {"flow", "--spec", spec, "--q", "1", "--r", "0.5", "--lambda", "1", "--T", "2"},
        {"simulate", "--spec", spec, "--lambda", "2", "--T", "1", "--n-paths", "3000", "--dump", "3", "--seed", "7"},
        {"verify", "--spec", spec, "--suite", "all", "--n-paths", "4000", "--seed", "7"},
        {"converge", "--spec", spec, "--n-paths", "4000", "--mc-lambda", "10", "--seed", "7"},
    };
    int same = 0, files = 0;
    std::ostringstream sink;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::vector<std::map<std::string, std::string>> trees;
        for (const char* threads : {"1", "1", "4"}) {
            auto args = commands[c];
            fs::path dir = root / (std::to_string(c) + "_" + std::to_string(trees.size()));
            args.insert(args.end(), {"--out", dir.string()});
            if (args[0] != "mech" && args[0] != "flow")
                args.insert(args.end(), {"--threads", threads});
            cli::run(args, sink, sink);
            trees.push_back(read_tree(dir));
        }
        bool ok = !trees[0].empty() && trees[0] == trees[1] && trees[0] == trees[2];
        same += ok ? 1 : 0;
        files += static_cast<int>(trees[0].size());
    }
    fs::remove_all(root);
    double secs = since(t0);
    verdict(10, same == static_cast<int>(commands.size()),
            fmt("reproducibility: %d/%zu commands byte-identical across reruns and 1 vs 4 threads (%d files); %.1f s",
                same, commands.size(), files, secs));
}

} // namespace

int main()
{
    std::vector<std::function<void()>> criteria = {ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10};
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        try {
            criteria[i]();
        } catch (const std::exception& e) {
            verdict(static_cast<int>(i + 1), false, std::string("threw: ") + e.what());
        }
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
