#include "csbp/flow.hpp"

#include "csbp/error.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace csbp {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string escape_reason(double u)
{
    if (u > 1e250)
        return "u escaped to infinity";
    if (u < 1e-280)
        return "u reached 0";
    return {};
}

void check_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string("flow: ") + what + " must be positive and finite");
}

struct ComparisonBound {
    double gamma;
    double c;

    explicit ComparisonBound(const JointMechanism& j)
    {
        gamma = unit_truncation_drift(j.esscher_mech);
        c = 0.5 * j.base.sigma2 + 0.5 * levy_moment(j.esscher_mech.levy, 2, 0.0, 1.0);
    }

    double operator()(double q, double t) const
    {
        if (gamma == 0.0)
            return nan;
        double e = std::exp(gamma * t);
        if (c == 0.0)
            return q * e;
        return q * gamma * e / (gamma + q * c * std::expm1(gamma * t));
    }
};

} // namespace

std::string to_string(FlowKind k)
{
    switch (k) {
    case FlowKind::OneDim:
        return "one_dim";
    case FlowKind::TwoDim:
        return "two_dim";
    case FlowKind::Skeleton:
        return "skeleton";
    }
    return "?";
}

double CumulantFlow::value(double t, std::size_t i) const
{
    if (t < 0.0 || t > t_end())
        throw std::out_of_range("flow: time outside the solved range");
    return sol_.at(t)[i];
}

double CumulantFlow::u(double t) const
{
    if (kind == FlowKind::Skeleton)
        throw std::logic_error("flow: skeleton flows carry no u component");
    return value(t, 0);
}

double CumulantFlow::f(double t) const
{
    if (kind == FlowKind::OneDim)
        throw std::logic_error("flow: one-dimensional flows carry no f component");
    return 1.0 - value(t, 1);
}

CumulantFlow solve_u(const BranchingMechanism& m, double q, double T, double tol)
{
    check_positive(q, "q");
    check_positive(T, "T");
    check_positive(tol, "tol");
    CumulantFlow flow;
    flow.kind = FlowKind::OneDim;
    flow.q = q;
    flow.T = T;
    flow.tol = tol;
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol * std::min(1.0, q);
    auto rhs = [&](double, const OdeState<2>& y, OdeState<2>& dy) {
        dy[0] = !(y[0] >= 0.0) ? nan : m.kappa - eval_psi_unkilled(m, y[0]);
        dy[1] = 0.0;
    };
    auto accept = [](double, const OdeState<2>& y) {
        return escape_reason(y[0]).empty() ? StepVerdict::Continue : StepVerdict::Stop;
    };
    flow.sol_ = dopri5<2>(rhs, {q, 0.0}, 0.0, T, opt, accept,
                          [](const OdeState<2>& y) { return escape_reason(y[0]); });
    if (!flow.sol_.boundary && flow.sol_.t_end() < T) {
        flow.sol_.boundary = true;
        flow.sol_.boundary_reason = escape_reason(flow.sol_.y.back()[0]);
    }
    flow.boundary = flow.sol_.boundary;
    flow.boundary_reason = flow.sol_.boundary_reason;
    return flow;
}

double comparison_lower_bound(const JointMechanism& j, double q, double t)
{
    return ComparisonBound(j)(q, t);
}

CumulantFlow solve_joint(const JointMechanism& j, double q, double r, double T, double tol)
{
    check_positive(q, "q");
    check_positive(T, "T");
    check_positive(tol, "tol");
    if (!(r > 0.0 && r < 1.0))
        throw std::invalid_argument("flow: r must lie in (0,1)");
    CumulantFlow flow;
    flow.kind = FlowKind::TwoDim;
    flow.q = q;
    flow.r = r;
    flow.T = T;
    flow.tol = tol;
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol * std::min({1.0, q, 1.0 - r});

    ComparisonBound bound(j);

    auto rhs = [&](double, const OdeState<2>& y, OdeState<2>& dy) {
        if (!(y[0] >= 0.0 && y[1] >= 0.0 && y[1] <= 1.0)) {
            dy = {nan, nan};
            return;
        }
        dy[0] = -psi_c_g(j, y[0], y[1]);
        dy[1] = -psi_d_closed_g(j, y[0], y[1]);
    };
    double slack = 10.0 * tol;
    auto accept = [&](double t, const OdeState<2>& y) {
        double u = y[0], g = y[1];
        if (u <= -slack || g <= -slack || g >= 1.0 + slack)
            throw NumericalError("flow: state left the box (0,inf)x(0,1) at t=" + std::to_string(t));
        if (u <= 0.0 || g <= 0.0 || g >= 1.0)
            flow.guard_log.push_back({t, "box boundary touched within tolerance", u, 1.0 - g});
        if (bound.gamma != 0.0) {
            double lb = bound(q, t);
            if (u < lb * (1.0 - 1e-8) - slack)
                flow.guard_log.push_back({t, "comparison lower bound violated", u, 1.0 - g});
        }
        return escape_reason(u).empty() ? StepVerdict::Continue : StepVerdict::Stop;
    };
    flow.sol_ = dopri5<2>(rhs, {q, 1.0 - r}, 0.0, T, opt, accept,
                          [](const OdeState<2>& y) { return escape_reason(y[0]); });
    if (!flow.sol_.boundary && flow.sol_.t_end() < T) {
        flow.sol_.boundary = true;
        flow.sol_.boundary_reason = escape_reason(flow.sol_.y.back()[0]);
    }
    flow.boundary = flow.sol_.boundary;
    flow.boundary_reason = flow.sol_.boundary_reason;
    return flow;
}

CumulantFlow solve_skeleton(const JointMechanism& j, double r, double T, double tol)
{
    check_positive(T, "T");
    check_positive(tol, "tol");
    if (!(r >= 0.0 && r <= 1.0))
        throw std::invalid_argument("flow: r must lie in [0,1]");
    CumulantFlow flow;
    flow.kind = FlowKind::Skeleton;
    flow.r = r;
    flow.T = T;
    flow.tol = tol;
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol * std::min(1.0, std::max(1.0 - r, 1e-300));
    auto rhs = [&](double, const OdeState<2>& y, OdeState<2>& dy) {
        dy[0] = 0.0;
        dy[1] = !(y[1] >= 0.0 && y[1] <= 1.0) ? nan : -psi_d_closed_g(j, 0.0, y[1]);
    };
    double slack = 10.0 * tol;
    auto accept = [&](double t, const OdeState<2>& y) {
        if (y[1] <= -slack || y[1] >= 1.0 + slack)
            throw NumericalError("flow: skeleton generating function left [0,1] at t=" + std::to_string(t));
        return StepVerdict::Continue;
    };
    flow.sol_ = dopri5<2>(rhs, {0.0, 1.0 - r}, 0.0, T, opt, accept,
                          [](const OdeState<2>&) { return std::string(); });
    return flow;
}

double u_at_zero(const BranchingMechanism& m, double T, double tol)
{
    const double q1 = 1e-12, q2 = 4e-12;
    double beta = small_q_exponent(m);
    double p = std::isnan(beta) ? 1.0 : 1.0 - beta;
    auto end_value = [&](double q) {
        auto fl = solve_u(m, q, T, tol);
        if (fl.t_end() < T)
            return fl.u(fl.t_end()) > 1.0 ? infinity : 0.0;
        return fl.u(T);
    };
    double u1 = end_value(q1), u2 = end_value(q2);
    if (!std::isfinite(u1) || !std::isfinite(u2))
        return infinity;
    double w = std::pow(q2 / q1, p);
    return std::max(0.0, (w * u1 - u2) / (w - 1.0));
}

double feller_u_oracle(double sigma2, double gamma, double q, double t)
{
    if (gamma == 0.0)
        return q / (1.0 + q * sigma2 * t / 2.0);
    return gamma / (sigma2 / 2.0 + (gamma / q - sigma2 / 2.0) * std::exp(-gamma * t));
}

void write_flow_csv(std::ostream& os, const CumulantFlow& flow, const std::vector<double>& grid)
{
    const auto& ts = grid.empty() ? flow.grid() : grid;
    switch (flow.kind) {
    case FlowKind::OneDim:
        os << "t,u\n";
        break;
    case FlowKind::TwoDim:
        os << "t,u,f\n";
        break;
    case FlowKind::Skeleton:
        os << "t,f\n";
        break;
    }
    os << std::setprecision(17);
    for (double t : ts) {
        if (t > flow.t_end())
            break;
        os << t;
        if (flow.kind != FlowKind::Skeleton)
            os << ',' << flow.u(t);
        if (flow.kind != FlowKind::OneDim)
            os << ',' << flow.f(t);
        os << '\n';
    }
}

} // namespace csbp
