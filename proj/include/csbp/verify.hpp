#pragma once

#include "csbp/joint.hpp"
#include "csbp/random.hpp"
#include "csbp/sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace csbp {

enum class ReportKind { Analytic, Statistical };

std::string to_string(ReportKind k);

struct TestReport {
    std::string name;
    ReportKind kind = ReportKind::Analytic;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    double statistic = std::numeric_limits<double>::quiet_NaN();
    double reference = std::numeric_limits<double>::quiet_NaN();
    // Standard error (statistical) or tolerance (analytic).
    double error = std::numeric_limits<double>::quiet_NaN();
    // z-score (statistical) or residual (analytic).
    double score = std::numeric_limits<double>::quiet_NaN();
    double level = 3.0;
    bool pass = false;
    bool degenerate = false;
    std::vector<std::string> notes;
    nlohmann::ordered_json details = nlohmann::ordered_json::object();
    double runtime_s = 0.0;
};

// Runtime is left out unless asked for, so reports stay byte-reproducible.
nlohmann::ordered_json to_json(const TestReport& r, bool with_runtime = false);

// One row per report.
void write_suite_csv(std::ostream& os, const std::vector<TestReport>& reports);

// Mean and standard error accumulated in index order.
struct MeanEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
    bool degenerate = false;
};

MeanEstimate estimate_mean(const std::vector<double>& v);

// z-score of an estimate against a reference; degenerate estimates give 0 when
// they hit the reference to 1e-12 and infinity otherwise.
double z_score(const MeanEstimate& e, double reference);

// Term c e^{-q x} r^l of a finite combination on the core.
struct CoreTerm {
    double coef;
    double q;
    double r;
};

std::vector<CoreTerm> random_core_combination(std::size_t n, Stream& s, double q_max = 5.0);

TestReport check_generator_intertwining(const JointMechanism& j, const std::vector<CoreTerm>& f,
                                        double x, double tol = 1e-9);

enum class InitLaw { Fixed, Poisson };

std::string to_string(InitLaw i);

struct McOptions {
    SimConfig sim;
    std::size_t n_paths = 100000;
    unsigned threads = 1;
    std::uint64_t seed = 1;
    double level = 3.0;
};

TestReport mc_laplace_joint(const JointMechanism& j, double x, InitLaw init, std::int64_t n0, double q,
                            double r, double t, const McOptions& opt);

// Terminal states of two-type paths from X_0 = x, L_0 ~ Poi(lam x); path i
// uses stream (seed, i).
struct TerminalSample {
    double lam = 0.0;
    double x0 = 0.0;
    double t = 0.0;
    std::vector<double> x;
    std::vector<std::int64_t> l;
    std::vector<char> cemetery;
};

TerminalSample simulate_terminal(const JointMechanism& j, double x, double t, const McOptions& opt);

TestReport marginal_law_test(const JointMechanism& j, const TerminalSample& sample,
                             const std::vector<double>& q_grid, double level = 3.0);
TestReport marginal_law_test(const JointMechanism& j, double x, double t,
                             const std::vector<double>& q_grid, const McOptions& opt);

// Two-sample comparison of the X-marginals of two samples with the same x and t.
TestReport paired_marginal_test(const TerminalSample& a, const TerminalSample& b,
                                const std::vector<double>& q_grid, double level = 3.0);

// lam_reference replaces lam in e^{-lam X (1 - r)} (power checks).
TestReport poisson_conditional_test(const TerminalSample& sample, const std::vector<double>& r_grid,
                                    double level = 3.0,
                                    double lam_reference = std::numeric_limits<double>::quiet_NaN());
TestReport poisson_conditional_test(const JointMechanism& j, double x, double t,
                                    const std::vector<double>& r_grid, const McOptions& opt);

TestReport binomial_thinning_test(const BranchingMechanism& m, double lam, double mu,
                                  const std::vector<double>& r_grid, double t, double tol = 1e-8);

// Caps are taken from opt.sim; fraction is the share of exploded paths whose
// cap-crossing times differ by at most 2h.
TestReport explosion_coupling_test(const JointMechanism& j, double x, double T, const McOptions& opt,
                                   double fraction = 0.99);

struct ConvergenceOptions {
    bool mc = true;
    double mc_lam = std::numeric_limits<double>::quiet_NaN(); // NaN: the largest lambda
    McOptions mc_opt;
};

TestReport convergence_scan(const BranchingMechanism& m, double x, double q, double t,
                            const std::vector<double>& lam_list, const ConvergenceOptions& opt);

// Exact cumulant error |u_t(lam(1 - e^{-q/lam})) - u_t(q)| / u_t(q).
double convergence_error(const BranchingMechanism& m, double q, double t, double lam);

} // namespace csbp
