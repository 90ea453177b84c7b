#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "csbp/joint.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace csbp;

namespace {

BranchingMechanism tempered(double a, double th, double c, double s2 = 0, double g = 0, double k = 0)
{
    BranchingMechanism m;
    m.sigma2 = s2;
    m.gamma = g;
    m.kappa = k;
    m.levy = TemperedMeasure{a, th, c};
    return m;
}

BranchingMechanism atoms(std::vector<Atom> at, double s2 = 0, double g = 0, double k = 0)
{
    BranchingMechanism m;
    m.sigma2 = s2;
    m.gamma = g;
    m.kappa = k;
    m.levy = AtomMeasure{std::move(at)};
    return m;
}

std::vector<BranchingMechanism> families()
{
    BranchingMechanism dens;
    dens.sigma2 = 0.1;
    dens.gamma = 0.8;
    dens.levy = density_from_terms({{0.7, 0.6, 0.5}});
    return {feller(1.0, 1.0), feller(2.0, -0.3, 0.2), stable_mechanism(1.5, 1.0, 0.0, 1.0),
            stable_mechanism(0.5, 1.0, 0.5, 0.0), tempered(0.7, 1.0, 1.0, 0.3, 1.0, 0.1),
            tempered(1.4, 0.5, 0.8, 0.0, 0.5), atoms({{0.5, 1.0}, {2.0, 0.3}}, 0.2, 0.7),
            atoms({{0.5, 1.0}}), dens};
}

} // namespace

TEST_CASE("regimes")
{
    CHECK(make_joint(feller(2.0, 0.0), 1.0).regime == Regime::AtOrAbove);
    auto b = make_joint(feller(1.0, 1.0), 1.0);
    CHECK(b.regime == Regime::Below);
    CHECK(b.psi_at_lam == doctest::Approx(-0.5));
    auto t = make_joint(feller(1.0, 1.0), 2.0);
    CHECK(t.regime == Regime::AtOrAbove);
    CHECK(std::fabs(t.psi_at_lam) < 1e-14);
    CHECK_THROWS_AS(make_joint(feller(1.0, 1.0), 0.0), std::invalid_argument);
    CHECK(to_string(Regime::Below) == "below");
}

TEST_CASE("hand values of Psi_c and Psi_d")
{
    auto a = make_joint(feller(2.0, 0.0), 1.0);
    CHECK(psi_c(a, 1.0, 0.5) == doctest::Approx(3.0));
    CHECK(psi_c(a, 1.0, 0.1) == doctest::Approx(3.0));
    CHECK(psi_d(a, 1.0, 0.5) == doctest::Approx(-0.75));
    CHECK(std::fabs(joint_identity_residual(a, 1.0, 0.5)) < 1e-14);
    auto b = make_joint(feller(1.0, 1.0), 1.0);
    CHECK(psi_c(b, 1.0, 0.5) == doctest::Approx(0.25));
    CHECK(psi_d(b, 1.0, 0.5) == doctest::Approx(-0.625));
    CHECK(std::fabs(joint_identity_residual(b, 1.0, 0.5)) < 1e-14);
    // q -> 0 in the upper regime gives the skeleton mechanism.
    auto m = tempered(0.7, 1.0, 1.0, 0.3, -0.2, 0.1);
    auto j = make_joint(m, 3.0);
    REQUIRE(j.regime == Regime::AtOrAbove);
    for (double r : {0.2, 0.6, 0.95})
        CHECK(psi_d_closed_g(j, 0.0, 1 - r) ==
              doctest::Approx((eval_psi(m, 3.0 * (1 - r)) + 0.1) / 3.0).epsilon(1e-12));
}

TEST_CASE("identity and dual evaluation on random grids")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0, 1);
    auto fam = families();
    for (std::size_t f = 0; f < fam.size(); ++f) {
        for (int i = 0; i < 40; ++i) {
            double q = std::pow(10.0, 3 * U(rng) - 1.5);
            double r = 0.01 + 0.98 * U(rng);
            double lam = std::pow(10.0, 2 * U(rng) - 1);
            auto j = make_joint(fam[f], lam);
            double ref = eval_psi(fam[f], q + lam * (1 - r));
            INFO("family " << f << " q=" << q << " r=" << r << " lam=" << lam);
            CHECK(std::fabs(joint_identity_residual(j, q, r)) <= 1e-9 * (1 + std::fabs(ref)));
            CHECK_NOTHROW(psi_d(j, q, r));
        }
    }
}

TEST_CASE("regime continuity at rho")
{
    for (const auto& m : {feller(1.0, 1.0), stable_mechanism(1.5, 1.0, 0.0, 1.0),
                          tempered(0.5, 1.0, 1.0, 0.5, 1.0)}) {
        double rho = largest_root(m);
        REQUIRE(rho > 0);
        auto up = make_joint(m, rho);
        CHECK(up.regime == Regime::AtOrAbove);
        auto down = up;
        down.regime = Regime::Below;
        for (double q : {0.1, 1.0, 5.0})
            for (double r : {0.1, 0.5, 0.9}) {
                CHECK(std::fabs(psi_d_closed(up, q, r) - psi_d_closed(down, q, r)) <= 1e-10);
                CHECK(std::fabs(psi_d_series(up, q, r) - psi_d_series(down, q, r)) <= 1e-10);
            }
    }
}

TEST_CASE("graft kernel")
{
    auto j = make_joint(atoms({{0.5, 1.0}}), 2.0);
    CHECK(graft_kernel(j, 0).mass == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(graft_kernel(j, 2).mass == doctest::Approx(0.5 * std::exp(-1.0) / 6).epsilon(1e-14));
    auto z = make_joint(feller(2.0, 0.0), 1.5);
    CHECK(graft_kernel(z, 0).empty());
    CHECK(graft_kernel(z, 1).mass == 0.0);
    CHECK(graft_kernel(z, 1).diffusion_atom == doctest::Approx(1.5));

    // Sum of slice masses against a direct quadrature of (1/lam) int (1 - e^{-lam y}) nu.
    boost::math::quadrature::exp_sinh<double> es;
    double lam = 1.7;
    auto t = make_joint(tempered(0.5, 1.0, 1.0), lam);
    double ref = es.integrate(
        [&](double y) { return y < 1e-100 ? 0.0 : -std::expm1(-lam * y) * std::pow(y, -1.5) * std::exp(-y); }) / lam;
    double sum = 0.0;
    for (int k = 0; k < 400; ++k)
        sum += graft_kernel(t, k).mass;
    CHECK(sum == doctest::Approx(ref).epsilon(1e-10));
    CHECK(graft_total_mass(t) == doctest::Approx(ref).epsilon(1e-10));
    CHECK(graft_branch_mass(t) == doctest::Approx(ref - graft_kernel(t, 0).mass).epsilon(1e-10));
    CHECK(std::isinf(graft_kernel(make_joint(stable_mechanism(1.5, 1.0), 1.0), 0).mass));

    // Slice samplers reproduce the slice mean.
    Stream s(9, 0);
    for (auto m : {tempered(0.5, 1.0, 1.0), atoms({{0.5, 1.0}, {3.0, 0.5}})}) {
        auto jj = make_joint(m, lam);
        for (int k : {1, 3}) {
            auto sl = graft_kernel(jj, k);
            double mean_ref = 0.0;
            if (std::holds_alternative<TemperedMeasure>(m.levy))
                mean_ref = (k + 0.5) / (1.0 + lam);
            else {
                double w = 0, wy = 0;
                for (double y : {0.5, 3.0}) {
                    double mass = y == 0.5 ? 1.0 : 0.5;
                    double v = mass * y * std::exp(-lam * y) * std::pow(lam * y, k) / std::tgamma(k + 2.0);
                    w += v;
                    wy += v * y;
                }
                mean_ref = wy / w;
            }
            double acc = 0, acc2 = 0;
            int n = 200000;
            for (int i = 0; i < n; ++i) {
                double y = sl.sample(s);
                acc += y;
                acc2 += y * y;
            }
            double mean = acc / n;
            double sd = std::sqrt(acc2 / n - mean * mean);
            CHECK(std::fabs(mean - mean_ref) < 4 * sd / std::sqrt(n));
        }
    }

    // Tabulated sampler for a density slice.
    BranchingMechanism dm;
    dm.levy = density_from_terms({{1.0, 0.5, 1.0}});
    auto dj = make_joint(dm, lam);
    auto sl = graft_kernel(dj, 2);
    CHECK(sl.mass == doctest::Approx(graft_kernel(make_joint(tempered(0.5, 1.0, 1.0), lam), 2).mass).epsilon(1e-9));
    double acc = 0;
    int n = 100000;
    for (int i = 0; i < n; ++i)
        acc += sl.sample(s);
    CHECK(acc / n == doctest::Approx(2.5 / (1 + lam)).epsilon(5e-3));
}

TEST_CASE("offspring law")
{
    for (double lam : {0.5, 1.0, 3.0}) {
        auto d = offspring_distribution(make_joint(feller(2.0, 0.0), lam));
        CHECK(d.p_minus1 == doctest::Approx(0.5).epsilon(1e-15));
        REQUIRE(d.p.size() >= 1);
        CHECK(d.p[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(d.total_rate == doctest::Approx(2 * lam));
        CHECK(d.prob(0) == 0.0);
    }
    auto d = offspring_distribution(make_joint(atoms({{0.5, 1.0}}), 2.0));
    CHECK(std::fabs(d.p_minus1 - 0.58197) < 1e-4);
    CHECK(d.total_rate == doctest::Approx((1 - std::exp(-1.0)) / 2).epsilon(1e-14));
    for (int k = 1; k <= 6; ++k)
        CHECK(d.prob(k) == doctest::Approx(d.p_minus1 / std::tgamma(k + 2.0)).epsilon(1e-12));

    std::vector<std::pair<BranchingMechanism, double>> cases{
        {feller(2.0, 0.0), 1.0},
        {atoms({{0.5, 1.0}}), 2.0},
        {atoms({{0.3, 2.0}, {1.5, 0.7}}, 0.4, 0.2), 2.5},
        {tempered(0.6, 1.0, 1.0, 0.2, -0.5), 1.0},
        {tempered(1.5, 2.0, 1.0, 0.0, 0.0), 1.0},
        {feller(2.0, 0.0, 0.5), 2.0},
        {tempered(0.6, 1.0, 1.0, 0.2, 0.5, 0.3), 3.0},
        {feller(1.0, 1.0), 2.0}};
    for (auto& [m, lam] : cases) {
        auto j = make_joint(m, lam);
        REQUIRE(j.regime == Regime::AtOrAbove);
        auto od = offspring_distribution(j);
        double total = od.p_minus1 + od.tail_mass;
        for (double p : od.p) {
            CHECK(p >= 0.0);
            total += p;
        }
        CHECK(std::fabs(total - 1.0) <= 1e-10);
        for (int i = 1; i <= 9; ++i) {
            double r = i / 10.0;
            double ref = (eval_psi_unkilled(m, lam * (1 - r))) / lam;
            CHECK(std::fabs(od.skeleton_mechanism(r) - ref) <= 1e-8);
        }
        // Rate reconciliation.
        CHECK(j.psi_prime_at_lam ==
              doctest::Approx(j.diffusion_atom() + graft_branch_mass(j) + j.death_rate()).epsilon(1e-12));
        if (m.kappa == 0.0) {
            double mean = -od.p_minus1;
            for (std::size_t k = 0; k < od.p.size(); ++k)
                mean += (k + 1.0) * od.p[k];
            CHECK(mean == doctest::Approx(-psi_prime_at_zero(m) / j.psi_prime_at_lam).epsilon(1e-8));
        }
    }
    // Immortal skeleton at lambda = rho.
    auto at_rho = offspring_distribution(make_joint(feller(1.0, 1.0), 2.0));
    CHECK(std::fabs(at_rho.p_minus1) < 1e-14);
    CHECK_THROWS_AS(offspring_distribution(make_joint(feller(1.0, 1.0), 1.0)), std::invalid_argument);

    std::ostringstream os;
    write_offspring_csv(os, offspring_distribution(make_joint(feller(2.0, 0.0), 1.0)));
    CHECK(os.str().rfind("k,p_k,cumulative\n-1,0.5,0.5\n1,0.5,1\n", 0) == 0);
}

TEST_CASE("criticality transfer")
{
    for (const auto& m : {feller(1.0, 1.0), feller(2.0, 0.0), feller(2.0, -1.0)}) {
        auto j = make_joint(m, 3.0);
        auto od = offspring_distribution(j);
        double h = 1e-6;
        double slope = (od.skeleton_mechanism(1 - h) - od.skeleton_mechanism(1 - 2 * h)) / h;
        double d0 = psi_prime_at_zero(m);
        if (d0 == 0.0)
            CHECK(std::fabs(slope) < 1e-5);
        else
            CHECK((slope > 0) == (-d0 > 0));
    }
}

TEST_CASE("autonomy")
{
    CHECK(autonomy_check(make_joint(feller(1.0, 1.0), 3.0)) == Autonomy::DiscreteAutonomous);
    CHECK(autonomy_check(make_joint(tempered(0.5, 1.0, 1.0), 1.0)) == Autonomy::DiscreteAutonomous);
    CHECK(autonomy_check(make_joint(feller(1.0, 1.0), 1.0)) == Autonomy::Coupled);
    TwoTypeDescription zero;
    zero.rho_only_y0 = true;
    zero.psi_d_at_q0 = [](double) { return 0.0; };
    zero.psi_c_at_r1 = [](double q) { return -std::sqrt(q); };
    CHECK(autonomy_check(zero) == Autonomy::ContinuousAutonomous);
    TwoTypeDescription expl;
    expl.pi_only_k0 = true;
    expl.psi_c_at_r1 = [](double q) { return -std::sqrt(q); };
    CHECK(autonomy_check(expl) == Autonomy::Coupled);
    CHECK(to_string(Autonomy::Coupled) == "coupled");
}
