#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "csbp/flow.hpp"
#include "csbp/verify.hpp"

#include <cmath>
#include <sstream>

using namespace csbp;

namespace {

std::vector<BranchingMechanism> families()
{
    BranchingMechanism tem;
    tem.sigma2 = 0.3;
    tem.gamma = 1.0;
    tem.levy = TemperedMeasure{0.7, 1.0, 1.0};
    BranchingMechanism at;
    at.sigma2 = 0.2;
    at.gamma = 0.7;
    at.levy = AtomMeasure{{{0.5, 1.0}, {2.0, 0.3}}};
    BranchingMechanism dens;
    dens.sigma2 = 0.1;
    dens.gamma = 0.8;
    dens.levy = density_from_terms({{0.7, 0.6, 0.5}});
    return {feller(1.0, 1.0), stable_mechanism(1.5, 1.0, 0.0, 1.0), tem, at, dens};
}

McOptions quick(std::size_t n, std::uint64_t seed)
{
    McOptions o;
    o.n_paths = n;
    o.seed = seed;
    o.sim.h = 0.01;
    o.sim.delta = 1e-2;
    return o;
}

} // namespace

TEST_CASE("mean estimates")
{
    auto e = estimate_mean({1.0, 2.0, 3.0, 4.0});
    CHECK(e.mean == doctest::Approx(2.5));
    CHECK(e.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK_FALSE(e.degenerate);
    auto d = estimate_mean({0.5, 0.5});
    CHECK(d.degenerate);
    CHECK(z_score(d, 0.5) == 0.0);
    CHECK(std::isinf(z_score(d, 0.4)));
}

TEST_CASE("generator intertwining")
{
    auto j = make_joint(feller(2.0, 0.0), 1.0);
    auto rep = check_generator_intertwining(j, {{1.0, 1.0, 0.5}}, 2.0);
    CHECK(rep.statistic == doctest::Approx(2.0 * std::exp(-3.0) * 2.25).epsilon(1e-12));
    CHECK(rep.reference == doctest::Approx(2.0 * std::exp(-3.0) * 2.25).epsilon(1e-12));
    CHECK(rep.pass);
    auto zero = check_generator_intertwining(j, {{1.0, 1.0, 0.5}}, 0.0);
    CHECK(zero.statistic == 0.0);
    CHECK(zero.reference == 0.0);

    Stream s(3, 0);
    int below = 0, above = 0;
    for (const auto& m : families()) {
        double rho = largest_root(m);
        for (double lam : {0.5 * rho, rho, 2.0 * rho + 0.5}) {
            auto jm = make_joint(m, lam);
            (jm.regime == Regime::Below ? below : above)++;
            for (double x : {0.3, 1.0, 4.0}) {
                auto r = check_generator_intertwining(jm, random_core_combination(50, s), x);
                CHECK(r.score <= 1e-9);
                CHECK(r.pass);
            }
        }
    }
    CHECK(below > 0);
    CHECK(above > 0);
}

TEST_CASE("joint Laplace functional by simulation")
{
    auto j = make_joint(feller(2.0, 0.0), 1.0);
    auto t0 = mc_laplace_joint(j, 1.0, InitLaw::Fixed, 3, 1.0, 0.5, 0.0, quick(1000, 1));
    CHECK(t0.reference == doctest::Approx(std::exp(-1.0) * 0.125));
    CHECK(t0.score == 0.0);
    CHECK(t0.degenerate);
    CHECK(t0.pass);

    auto p = mc_laplace_joint(j, 1.0, InitLaw::Poisson, 0, 1.0, 0.5, 1.0, quick(20000, 2));
    CHECK(p.reference == doctest::Approx(std::exp(-0.6)).epsilon(1e-8));
    CHECK(p.pass);

    auto below = make_joint(feller(1.0, 1.0), 1.0);
    CHECK(below.regime == Regime::Below);
    for (auto init : {InitLaw::Fixed, InitLaw::Poisson}) {
        auto r = mc_laplace_joint(below, 0.8, init, 2, 0.7, 0.4, 0.5, quick(20000, 3));
        auto flow = solve_joint(below, 0.7, 0.4, 0.5);
        double ref = init == InitLaw::Fixed
                         ? std::exp(-0.8 * flow.u(0.5)) * std::pow(flow.f(0.5), 2)
                         : std::exp(-0.8 * (flow.u(0.5) + (1.0 - flow.f(0.5))));
        CHECK(r.reference == doctest::Approx(ref).epsilon(1e-12));
        CHECK(r.pass);
    }
    CHECK_THROWS_AS(mc_laplace_joint(j, 1.0, InitLaw::Fixed, 1, 1.0, 0.5, 1.0, quick(10, 1)),
                    std::invalid_argument);
}

TEST_CASE("marginal law and Poisson conditional law")
{
    auto m = feller(2.0, 0.0);
    auto a = simulate_terminal(make_joint(m, 1.0), 1.0, 1.0, quick(20000, 4));
    auto b = simulate_terminal(make_joint(m, 2.0), 1.0, 1.0, quick(20000, 5));
    auto ml = marginal_law_test(make_joint(m, 1.0), a, {0.5, 1.0, 2.0});
    CHECK(ml.pass);
    CHECK(ml.details["rows"][1]["reference"].get<double>() == doctest::Approx(std::exp(-0.5)).epsilon(1e-8));
    CHECK(marginal_law_test(make_joint(m, 2.0), b, {0.5, 1.0, 2.0}).pass);
    CHECK(paired_marginal_test(a, b, {0.5, 1.0, 2.0}).pass);

    auto pc = poisson_conditional_test(a, {0.5});
    CHECK(pc.pass);
    CHECK(pc.details["bins"].get<int>() == 10);
    auto wrong = poisson_conditional_test(a, {0.5}, 3.0, 1.1);
    CHECK_FALSE(wrong.pass);
    CHECK(std::fabs(wrong.score) > 6.0);

    auto zero = simulate_terminal(make_joint(m, 1.0), 1.0, 0.0, quick(5000, 6));
    CHECK(marginal_law_test(make_joint(m, 1.0), zero, {1.0}).score == 0.0);
    CHECK(poisson_conditional_test(zero, {0.3, 0.7}).pass);

    auto below = make_joint(feller(1.0, 1.0), 1.0);
    auto r = poisson_conditional_test(below, 1.0, 0.5, {0.3, 0.7}, quick(20000, 7));
    CHECK(r.pass);
    CHECK(r.inputs["regime"] == "below");
}

TEST_CASE("binomial thinning")
{
    auto m = feller(2.0, 0.0);
    auto rep = binomial_thinning_test(m, 1.0, 2.0, {0.0}, 1.0);
    CHECK(rep.statistic == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(rep.reference == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(rep.pass);
    auto one = binomial_thinning_test(m, 1.0, 2.0, {1.0}, 1.0);
    CHECK(one.statistic == doctest::Approx(1.0));
    Stream s(9, 0);
    for (const auto& fam : families()) {
        double rho = largest_root(fam);
        for (int i = 0; i < 4; ++i) {
            double lam = rho + 2.0 * s.uniform();
            double mu = lam * (1.0 + 2.0 * s.uniform());
            auto r = binomial_thinning_test(fam, lam, mu, {0.0, s.uniform(), 0.9}, 0.2 + 2.0 * s.uniform());
            CHECK(r.score <= 1e-8);
        }
    }
    CHECK_THROWS_AS(binomial_thinning_test(feller(1.0, 1.0), 1.0, 3.0, {0.5}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(binomial_thinning_test(m, 2.0, 1.0, {0.5}, 1.0), std::invalid_argument);
}

TEST_CASE("explosion coupling")
{
    auto calm = explosion_coupling_test(make_joint(feller(2.0, 0.0), 1.0), 1.0, 1.0, quick(1000, 10));
    CHECK(calm.statistic == 0.0);
    CHECK(calm.reference == 0.0);
    CHECK(calm.pass);

    auto o = quick(2000, 11);
    o.sim.h = 1e-3;
    o.sim.delta = 1e-4;
    o.sim.x_max = 1e6;
    o.sim.l_max = 1e6;
    auto rep = explosion_coupling_test(make_joint(stable_mechanism(0.5, 1.0), 1.0), 1.0, 1.0, o);
    CHECK(rep.reference == doctest::Approx(1.0 - std::exp(-0.25)).epsilon(1e-6));
    CHECK(rep.pass);
    CHECK(rep.details["coupled_share"].get<double>() >= 0.99);
    BranchingMechanism killed = feller(1.0, 0.0, 0.5);
    CHECK_THROWS_AS(explosion_coupling_test(make_joint(killed, 1.0), 1.0, 1.0, o), std::invalid_argument);
}

TEST_CASE("convergence scan")
{
    auto m = feller(2.0, 0.0);
    CHECK(convergence_error(m, 1.0, 1.0, 10.0) ==
          doctest::Approx(std::fabs(0.951626 / 1.951626 - 0.5) / 0.5).epsilon(1e-5));
    ConvergenceOptions opt;
    opt.mc_lam = 10.0;
    opt.mc_opt = quick(20000, 12);
    auto rep = convergence_scan(m, 1.0, 1.0, 1.0, {5, 10, 20, 40, 80}, opt);
    CHECK(rep.pass);
    CHECK(rep.details["monotone"].get<bool>());
    CHECK(rep.statistic <= rep.reference / 10.0);
    CHECK(std::fabs(rep.details["mc"]["z"].get<double>()) <= 3.0);
    auto rows = rep.details["rows"];
    CHECK(rows[4]["lambda_error"].get<double>() == doctest::Approx(0.25).epsilon(0.02));
    CHECK_THROWS_AS(convergence_scan(m, 1.0, 1.0, 1.0, {10, 5}, opt), std::invalid_argument);
    CHECK_THROWS_AS(convergence_scan(feller(1.0, 1.0), 1.0, 1.0, 1.0, {1, 5}, opt), std::invalid_argument);
}

TEST_CASE("reports are reproducible across thread counts")
{
    auto j = make_joint(feller(1.0, 1.0), 2.0);
    auto o = quick(3000, 13);
    auto serial = to_json(mc_laplace_joint(j, 1.0, InitLaw::Poisson, 0, 0.5, 0.5, 1.0, o)).dump();
    o.threads = 3;
    auto parallel = to_json(mc_laplace_joint(j, 1.0, InitLaw::Poisson, 0, 0.5, 0.5, 1.0, o)).dump();
    CHECK(serial == parallel);
    std::ostringstream a, b;
    write_suite_csv(a, {mc_laplace_joint(j, 1.0, InitLaw::Poisson, 0, 0.5, 0.5, 1.0, o)});
    o.threads = 1;
    write_suite_csv(b, {mc_laplace_joint(j, 1.0, InitLaw::Poisson, 0, 0.5, 0.5, 1.0, o)});
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("name,kind,statistic", 0) == 0);
    CHECK(serial.find("runtime") == std::string::npos);
}
