#include "commands.hpp"

#include "csbp/error.hpp"
#include "csbp/flow.hpp"
#include "csbp/io.hpp"
#include "csbp/joint.hpp"
#include "csbp/mechanism.hpp"
#include "csbp/sim.hpp"
#include "csbp/verify.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace csbp::cli {

namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Common {
    std::string spec;
    std::string out;
    unsigned threads = 1;
    std::uint64_t seed = 1;
    double tol = default_flow_tol;
};

BranchingMechanism read_spec(const std::string& spec)
{
    if (spec.empty())
        throw SchemaError("--spec is required");
    auto first = spec.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && spec[first] == '{')
        return parse_mechanism(spec);
    return load_mechanism(spec);
}

std::string out_dir(const Common& c)
{
    if (!c.out.empty())
        return c.out;
    if (const char* env = std::getenv(out_dir_env); env && *env)
        return env;
    return "csbp-out";
}

// Files are only written once a command has finished without error.
class Artifacts {
public:
    Artifacts(const std::string& command, const BranchingMechanism& m, ojson params, std::optional<std::uint64_t> seed)
        : seed_(seed)
    {
        config_["command"] = command;
        config_["spec"] = mechanism_to_json(m);
        config_["params"] = std::move(params);
        if (seed)
            config_["seed"] = *seed;
        hash_ = hex64(fnv1a64(config_.dump()));
    }

    ojson provenance() const
    {
        ojson p;
        p["tool"] = "csbp";
        p["version"] = tool_version;
        p["config_hash"] = hash_;
        p["seed"] = seed_ ? ojson(*seed_) : ojson(nullptr);
        return p;
    }

    void json(const std::string& name, ojson body)
    {
        ojson doc;
        doc["provenance"] = provenance();
        doc["config"] = config_;
        for (auto& [k, v] : body.items())
            doc[k] = v;
        files_.emplace_back(name, doc.dump(2) + "\n");
    }

    void csv(const std::string& name, const std::string& body)
    {
        std::string head = "# csbp " + std::string(tool_version) + " config_hash=" + hash_ +
                           " seed=" + (seed_ ? std::to_string(*seed_) : std::string("none")) + "\n";
        files_.emplace_back(name, head + body);
    }

    void write(const std::string& dir, std::ostream& out) const
    {
        fs::create_directories(dir);
        for (const auto& [name, body] : files_) {
            auto path = fs::path(dir) / name;
            std::ofstream f(path, std::ios::binary);
            if (!f)
                throw std::runtime_error("cannot write " + path.string());
            f << body;
            out << path.string() << "\n";
        }
    }

private:
    ojson config_;
    std::string hash_;
    std::optional<std::uint64_t> seed_;
    std::vector<std::pair<std::string, std::string>> files_;
};

void add_common(CLI::App* sub, Common& c, bool random)
{
    sub->add_option("--spec", c.spec, "mechanism spec: JSON file or inline JSON")->required();
    sub->add_option("--out", c.out, std::string("output directory (default $") + out_dir_env + " or csbp-out)");
    if (random) {
        sub->add_option("--seed", c.seed, "base seed");
        sub->add_option("--threads", c.threads, "worker threads, 0 for all cores");
    }
}

void add_sim(CLI::App* sub, SimConfig& s)
{
    sub->add_option("--step", s.h, "time step");
    sub->add_option("--delta", s.delta, "small-jump cutoff");
    sub->add_option("--x-max", s.x_max, "mass cap");
    sub->add_option("--l-max", s.l_max, "skeleton cap");
}

ojson sim_json(const SimConfig& s)
{
    return {{"h", s.h}, {"delta", s.delta}, {"x_max", s.x_max}, {"l_max", s.l_max}};
}

double default_lambda(const BranchingMechanism& m)
{
    double rho = largest_root(m);
    return rho > 0.0 && std::isfinite(rho) ? rho : 1.0;
}

std::string fixed17(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// mech

struct MechArgs {
    Common c;
    double q_max = 5.0;
    int points = 41;
};

int cmd_mech(const MechArgs& a, std::ostream& out)
{
    auto m = read_spec(a.c.spec);
    if (!(a.q_max > 0.0) || a.points < 2)
        throw std::invalid_argument("mech: needs --q-max > 0 and --points >= 2");
    auto cls = classify(m);
    double rho = largest_root(m);
    double mu = argmin_location(m);
    Artifacts art("mech", m, {{"q_max", a.q_max}, {"points", a.points}}, std::nullopt);
    ojson rep;
    rep["rho"] = json_number(rho);
    rep["mu"] = json_number(mu);
    rep["psi_prime_0"] = json_number(psi_prime_at_zero(m));
    rep["criticality"] = to_string(cls.criticality);
    rep["immortal"] = cls.immortal;
    rep["nonexplosive"] = cls.nonexplosive;
    std::ostringstream csv;
    csv << "q,psi\n" << std::setprecision(17);
    for (int i = 0; i < a.points; ++i) {
        double q = a.q_max * i / (a.points - 1);
        csv << q << ',' << (q > 0.0 ? eval_psi(m, q) : 0.0 - m.kappa) << '\n';
    }
    art.json("mech.json", rep);
    art.csv("psi.csv", csv.str());
    art.write(out_dir(a.c), out);
    return Pass;
}

// flow

struct FlowArgs {
    Common c;
    std::optional<double> q, r, lam;
    double T = 1.0;
    int points = 0;
};

int cmd_flow(const FlowArgs& a, std::ostream& out)
{
    auto m = read_spec(a.c.spec);
    ojson params;
    CumulantFlow flow;
    if (a.q && !a.r && !a.lam) {
        flow = solve_u(m, *a.q, a.T, a.c.tol);
        params["q"] = *a.q;
    } else if (a.q && a.r && a.lam) {
        flow = solve_joint(make_joint(m, *a.lam), *a.q, *a.r, a.T, a.c.tol);
        params = {{"q", *a.q}, {"r", *a.r}, {"lambda", *a.lam}};
    } else if (!a.q && a.r && a.lam) {
        flow = solve_skeleton(make_joint(m, *a.lam), *a.r, a.T, a.c.tol);
        params = {{"r", *a.r}, {"lambda", *a.lam}};
    } else {
        throw std::invalid_argument("flow: give --q, or --q --r --lambda, or --r --lambda");
    }
    params["T"] = a.T;
    params["tol"] = a.c.tol;
    params["points"] = a.points;
    Artifacts art("flow", m, params, std::nullopt);
    std::vector<double> grid;
    if (a.points >= 2)
        for (int i = 0; i < a.points; ++i)
            grid.push_back(flow.t_end() * i / (a.points - 1));
    std::ostringstream csv;
    write_flow_csv(csv, flow, grid);
    double te = flow.t_end();
    ojson rep;
    rep["kind"] = to_string(flow.kind);
    rep["t_end"] = te;
    rep["boundary"] = flow.boundary;
    rep["boundary_reason"] = flow.boundary_reason;
    if (flow.kind != FlowKind::Skeleton)
        rep["u_end"] = json_number(flow.u(te));
    if (flow.kind != FlowKind::OneDim)
        rep["f_end"] = json_number(flow.f(te));
    rep["steps"] = flow.grid().size() - 1;
    rep["guard_events"] = flow.guard_log.size();
    art.json("flow.json", rep);
    art.csv("flow.csv", csv.str());
    art.write(out_dir(a.c), out);
    return Pass;
}

// simulate

struct SimArgs {
    Common c;
    SimConfig sim;
    double lam = 0.0;
    double x0 = 1.0;
    std::string l0 = "poisson";
    double T = 1.0;
    std::size_t n = 1000;
    std::size_t dump = 10;
    bool record_steps = false;
    double q = 1.0;
    double r = 0.5;
};

int cmd_simulate(const SimArgs& a, std::ostream& out)
{
    auto m = read_spec(a.c.spec);
    a.sim.validate();
    bool poisson = a.l0 == "poisson";
    std::int64_t l0 = 0;
    if (!poisson) {
        std::size_t used = 0;
        try {
            l0 = std::stoll(a.l0, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != a.l0.size() || l0 < 0)
            throw std::invalid_argument("simulate: --l0 must be a nonnegative integer or 'poisson'");
    }
    if (a.n == 0)
        throw std::invalid_argument("simulate: --n-paths must be positive");
    auto j = make_joint(m, a.lam);
    ojson params = {{"lambda", a.lam}, {"x0", a.x0}, {"l0", poisson ? ojson("poisson") : ojson(l0)},
                    {"T", a.T},        {"N", a.n},   {"dump", a.dump},
                    {"record_steps", a.record_steps}, {"q", a.q}, {"r", a.r}, {"sim", sim_json(a.sim)}};
    Artifacts art("simulate", m, params, a.c.seed);
    TwoTypeSimulator sim(j, a.sim);
    auto start = [&](Stream& s) { return poisson ? s.poisson(a.lam * a.x0) : l0; };
    auto paths = run_replicates(a.n, a.c.threads, [&](std::size_t i) {
        Stream s(a.c.seed, i);
        auto p = sim.run(a.x0, start(s), a.T, s);
        return std::make_tuple(p.x_T, p.l_T, p.status, p.killed);
    });
    std::vector<double> lap, xs, ls, expl, ext;
    for (const auto& [x, l, st, killed] : paths) {
        bool dead = st == PathStatus::Exploded;
        lap.push_back(dead ? 0.0 : std::exp(-a.q * x) * std::pow(a.r, static_cast<double>(l)));
        expl.push_back(dead ? 1.0 : 0.0);
        ext.push_back(st == PathStatus::Extinct ? 1.0 : 0.0);
        if (!dead) {
            xs.push_back(x);
            ls.push_back(static_cast<double>(l));
        }
    }
    auto est = [](const std::vector<double>& v) {
        auto e = estimate_mean(v);
        ojson o;
        o["estimate"] = v.empty() ? ojson(nullptr) : json_number(e.mean);
        o["stderr"] = v.empty() ? ojson(nullptr) : json_number(e.se);
        o["n"] = e.n;
        return o;
    };
    ojson rep;
    rep["N"] = a.n;
    rep["laplace"] = est(lap);
    try {
        auto f = solve_joint(j, a.q, a.r, a.T);
        double u = f.u(a.T), g = f.f(a.T);
        double ref = poisson ? std::exp(-a.x0 * (u + a.lam * (1.0 - g)))
                             : std::exp(-a.x0 * u) * std::pow(g, static_cast<double>(l0));
        rep["laplace"]["reference"] = f.boundary ? ojson(nullptr) : json_number(ref);
    } catch (const std::exception&) {
        rep["laplace"]["reference"] = nullptr;
    }
    rep["x_T_alive"] = est(xs);
    rep["l_T_alive"] = est(ls);
    rep["explosion_frequency"] = est(expl);
    rep["extinction_frequency"] = est(ext);
    art.json("summary.json", rep);

    SimConfig rec = a.sim;
    rec.record_events = true;
    rec.record_steps = a.record_steps;
    TwoTypeSimulator recorder(j, rec);
    for (std::size_t i = 0; i < std::min(a.dump, a.n); ++i) {
        Stream s(a.c.seed, i);
        auto p = recorder.run(a.x0, start(s), a.T, s);
        std::ostringstream csv;
        write_path_csv(csv, p);
        std::ostringstream name;
        name << "path_" << std::setw(5) << std::setfill('0') << i << ".csv";
        art.csv(name.str(), csv.str());
    }
    art.write(out_dir(a.c), out);
    return Pass;
}

// verify

struct VerifyArgs {
    Common c;
    SimConfig sim;
    std::string suite;
    std::optional<double> lam;
    double x0 = 1.0;
    double t = 1.0;
    double q = 1.0;
    double r = 0.5;
    std::size_t n = 10000;
    double level = 3.0;
};

const std::vector<std::string> suite_names = {"intertwining", "laplace",     "marginal", "conditional",
                                              "thinning",     "explosion",   "convergence", "power"};

std::vector<std::string> parse_suite(const std::string& sel)
{
    std::vector<std::string> out;
    std::stringstream ss(sel);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        if (item == "all") {
            for (const auto& s : suite_names)
                if (s != "power")
                    out.push_back(s);
            continue;
        }
        if (std::find(suite_names.begin(), suite_names.end(), item) == suite_names.end())
            throw std::invalid_argument("verify: unknown suite '" + item + "'");
        out.push_back(item);
    }
    if (out.empty())
        throw std::invalid_argument("verify: empty suite selector");
    return out;
}

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err)
{
    auto m = read_spec(a.c.spec);
    auto suites = parse_suite(a.suite);
    a.sim.validate();
    auto has = [&](const char* s) { return std::find(suites.begin(), suites.end(), s) != suites.end(); };
    double rho = largest_root(m);
    double lam = a.lam ? *a.lam : default_lambda(m);
    auto j = make_joint(m, lam);
    McOptions mc;
    mc.sim = a.sim;
    mc.n_paths = a.n;
    mc.threads = a.c.threads;
    mc.seed = a.c.seed;
    mc.level = a.level;
    ojson params = {{"suite", suites}, {"lambda", lam}, {"x0", a.x0}, {"t", a.t}, {"q", a.q},
                    {"r", a.r},        {"N", a.n},      {"level", a.level}, {"tol", a.c.tol},
                    {"sim", sim_json(a.sim)}};
    Artifacts art("verify", m, params, a.c.seed);
    std::vector<TestReport> reports;
    auto sub = [&](std::uint64_t k) {
        McOptions o = mc;
        o.seed = a.c.seed * 1000003ull + k;
        return o;
    };
    if (has("intertwining")) {
        Stream s(a.c.seed, 0);
        reports.push_back(check_generator_intertwining(j, random_core_combination(50, s), a.x0, 1e-9));
    }
    if (has("laplace")) {
        reports.push_back(mc_laplace_joint(j, a.x0, InitLaw::Poisson, 0, a.q, a.r, a.t, sub(1)));
        auto n0 = static_cast<std::int64_t>(std::llround(lam * a.x0));
        reports.push_back(mc_laplace_joint(j, a.x0, InitLaw::Fixed, n0, a.q, a.r, a.t, sub(2)));
    }
    std::optional<TerminalSample> sample;
    auto terminal = [&]() -> const TerminalSample& {
        if (!sample)
            sample = simulate_terminal(j, a.x0, a.t, sub(3));
        return *sample;
    };
    std::vector<double> grid = {0.5 * a.q, a.q, 2.0 * a.q};
    std::vector<double> rgrid = {0.5 * a.r, a.r, 0.5 * (1.0 + a.r)};
    if (has("marginal")) {
        auto rep = marginal_law_test(j, terminal(), grid, a.level);
        rep.inputs.update({{"N", a.n}, {"seed", sub(3).seed}});
        reports.push_back(std::move(rep));
    }
    if (has("conditional")) {
        auto rep = poisson_conditional_test(terminal(), rgrid, a.level);
        rep.inputs.update({{"N", a.n}, {"seed", sub(3).seed}});
        reports.push_back(std::move(rep));
    }
    if (has("power")) {
        auto rep = poisson_conditional_test(terminal(), {a.r}, a.level, 1.1 * lam);
        rep.name = "power_check";
        rep.notes.push_back("reference uses 1.1 lambda; a fail verdict is the expected outcome");
        reports.push_back(std::move(rep));
    }
    if (has("thinning")) {
        if (std::isfinite(rho)) {
            double l1 = std::max(lam, rho);
            if (l1 <= 0.0)
                l1 = 1.0;
            reports.push_back(binomial_thinning_test(m, l1, 2.0 * l1, {0.0, 0.25, 0.5, 0.75, 1.0}, a.t, 1e-8));
        } else {
            err << "verify: thinning skipped, rho is infinite\n";
        }
    }
    if (has("explosion")) {
        if (m.kappa == 0.0) {
            McOptions o = sub(4);
            if (o.sim.x_max == SimConfig{}.x_max)
                o.sim.x_max = 1e6;
            if (o.sim.l_max == SimConfig{}.l_max)
                o.sim.l_max = std::max(1.0, lam) * o.sim.x_max;
            reports.push_back(explosion_coupling_test(j, a.x0, a.t, o));
        } else {
            err << "verify: explosion skipped, kappa > 0\n";
        }
    }
    if (has("convergence")) {
        if (std::isfinite(rho)) {
            double base = std::max(rho, 1.0);
            std::vector<double> lams = {5.0 * base, 10.0 * base, 20.0 * base, 40.0 * base, 80.0 * base};
            ConvergenceOptions co;
            co.mc_lam = lams[1];
            co.mc_opt = sub(5);
            reports.push_back(convergence_scan(m, a.x0, a.q, a.t, lams, co));
        } else {
            err << "verify: convergence skipped, rho is infinite\n";
        }
    }
    std::ostringstream csv;
    write_suite_csv(csv, reports);
    ojson body;
    body["reports"] = ojson::array();
    bool all = true;
    for (const auto& r : reports) {
        body["reports"].push_back(to_json(r));
        all = all && r.pass;
        err << r.name << ": " << (r.pass ? "pass" : "fail") << "\n";
    }
    body["verdict"] = all ? "pass" : "fail";
    art.json("reports.json", body);
    art.csv("suite.csv", csv.str());
    art.write(out_dir(a.c), out);
    return all ? Pass : Failure;
}

// converge

struct ConvergeArgs {
    Common c;
    SimConfig sim;
    double x0 = 1.0;
    double q = 1.0;
    double t = 1.0;
    std::vector<double> lams = {5, 10, 20, 40, 80};
    std::optional<double> mc_lam;
    std::size_t n = 10000;
    bool no_mc = false;
};

int cmd_converge(const ConvergeArgs& a, std::ostream& out)
{
    auto m = read_spec(a.c.spec);
    a.sim.validate();
    ConvergenceOptions co;
    co.mc = !a.no_mc;
    co.mc_lam = a.mc_lam ? *a.mc_lam : a.lams.back();
    co.mc_opt.sim = a.sim;
    co.mc_opt.n_paths = a.n;
    co.mc_opt.threads = a.c.threads;
    co.mc_opt.seed = a.c.seed;
    ojson params = {{"x0", a.x0}, {"q", a.q}, {"t", a.t}, {"lambdas", a.lams}, {"mc", co.mc},
                    {"mc_lambda", co.mc_lam}, {"N", a.n}, {"sim", sim_json(a.sim)}};
    Artifacts art("converge", m, params, a.c.seed);
    auto rep = convergence_scan(m, a.x0, a.q, a.t, a.lams, co);
    std::ostringstream csv;
    csv << "lambda,error,lambda_error\n";
    for (const auto& row : rep.details["rows"])
        csv << fixed17(row["lambda"].get<double>()) << ',' << fixed17(row["error"].get<double>()) << ','
            << fixed17(row["lambda_error"].get<double>()) << '\n';
    art.json("converge.json", {{"report", to_json(rep)}});
    art.csv("converge.csv", csv.str());
    art.write(out_dir(a.c), out);
    return rep.pass ? Pass : Failure;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Skeletal decomposition of continuous-state branching processes"};
    app.name("csbp");
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    MechArgs mech;
    auto* s_mech = app.add_subcommand("mech", "classify a mechanism and tabulate psi");
    add_common(s_mech, mech.c, false);
    s_mech->add_option("--q-max", mech.q_max, "right end of the psi table");
    s_mech->add_option("--points", mech.points, "points in the psi table");

    FlowArgs flow;
    auto* s_flow = app.add_subcommand("flow", "solve a cumulant flow");
    add_common(s_flow, flow.c, false);
    s_flow->add_option("--q", flow.q, "Laplace argument");
    s_flow->add_option("--r", flow.r, "generating-function argument");
    s_flow->add_option("--lambda", flow.lam, "skeleton parameter");
    s_flow->add_option("--T", flow.T, "horizon");
    s_flow->add_option("--tol", flow.c.tol, "solver tolerance");
    s_flow->add_option("--points", flow.points, "uniform output grid (default: solver steps)");

    SimArgs sim;
    auto* s_sim = app.add_subcommand("simulate", "simulate two-type paths");
    add_common(s_sim, sim.c, true);
    add_sim(s_sim, sim.sim);
    s_sim->add_option("--lambda", sim.lam, "skeleton parameter")->required();
    s_sim->add_option("--x0", sim.x0, "initial mass");
    s_sim->add_option("--l0", sim.l0, "initial skeleton size or 'poisson'");
    s_sim->add_option("--T", sim.T, "horizon");
    s_sim->add_option("--n-paths", sim.n, "number of paths");
    s_sim->add_option("--dump", sim.dump, "paths written as CSV");
    s_sim->add_flag("--record-steps", sim.record_steps, "add a row per time step to path CSVs");
    s_sim->add_option("--q", sim.q, "Laplace argument of the summary estimate");
    s_sim->add_option("--r", sim.r, "generating-function argument of the summary estimate");

    VerifyArgs ver;
    ver.sim.h = 0.01;
    ver.sim.delta = 1e-2;
    auto* s_ver = app.add_subcommand("verify", "run verification suites");
    add_common(s_ver, ver.c, true);
    add_sim(s_ver, ver.sim);
    s_ver->add_option("--suite", ver.suite,
                      "comma-separated: all, intertwining, laplace, marginal, conditional, thinning, "
                      "explosion, convergence, power")
        ->required();
    s_ver->add_option("--lambda", ver.lam, "skeleton parameter (default rho, or 1)");
    s_ver->add_option("--x0", ver.x0, "initial mass");
    s_ver->add_option("--t", ver.t, "time");
    s_ver->add_option("--q", ver.q, "Laplace argument");
    s_ver->add_option("--r", ver.r, "generating-function argument");
    s_ver->add_option("--n-paths", ver.n, "paths per statistical test");
    s_ver->add_option("--level", ver.level, "z level");

    ConvergeArgs conv;
    conv.sim.h = 0.01;
    conv.sim.delta = 1e-2;
    auto* s_conv = app.add_subcommand("converge", "skeleton convergence scan");
    add_common(s_conv, conv.c, true);
    add_sim(s_conv, conv.sim);
    s_conv->add_option("--x0", conv.x0, "initial mass");
    s_conv->add_option("--q", conv.q, "Laplace argument");
    s_conv->add_option("--t", conv.t, "time");
    s_conv->add_option("--lambda", conv.lams, "lambda list, increasing")->delimiter(',');
    s_conv->add_option("--mc-lambda", conv.mc_lam, "lambda of the MC spot check (default largest)");
    s_conv->add_option("--n-paths", conv.n, "paths of the MC spot check");
    s_conv->add_flag("--no-mc", conv.no_mc, "skip the MC spot check");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Pass;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return Pass;
    } catch (const CLI::CallForVersion&) {
        out << tool_version << "\n";
        return Pass;
    } catch (const CLI::ParseError& e) {
        err << "csbp: " << e.what() << "\n";
        return Usage;
    }

    try {
        if (s_mech->parsed())
            return cmd_mech(mech, out);
        if (s_flow->parsed())
            return cmd_flow(flow, out);
        if (s_sim->parsed())
            return cmd_simulate(sim, out);
        if (s_ver->parsed())
            return cmd_verify(ver, out, err);
        if (s_conv->parsed())
            return cmd_converge(conv, out);
    } catch (const InconclusiveError& e) {
        err << "csbp: inconclusive: " << e.what() << "\n";
        return Inconclusive;
    } catch (const NumericalError& e) {
        err << "csbp: numerical failure: " << e.what() << "\n";
        return Failure;
    } catch (const std::invalid_argument& e) {
        err << "csbp: " << e.what() << "\n";
        return Usage;
    } catch (const std::exception& e) {
        err << "csbp: " << e.what() << "\n";
        return Failure;
    }
    return Usage;
}

} // namespace csbp::cli
