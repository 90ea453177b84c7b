#pragma once

#include "csbp/joint.hpp"
#include "csbp/ode.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace csbp {

// Skeleton: the scalar flow f' = Psi_d(0, f), reported through f().
enum class FlowKind { OneDim, TwoDim, Skeleton };

std::string to_string(FlowKind k);

struct GuardEvent {
    double t;
    std::string what;
    double u;
    double f;
};

class CumulantFlow {
public:
    FlowKind kind = FlowKind::OneDim;
    double q = 0.0;
    double r = 0.0;
    double T = 0.0;
    double tol = 0.0;
    bool boundary = false;
    std::string boundary_reason;
    std::vector<GuardEvent> guard_log;

    // Solved range is [0, t_end()]; t_end() < T only when boundary is set.
    double t_end() const { return sol_.t_end(); }
    const std::vector<double>& grid() const { return sol_.t; }

    double u(double t) const;
    double f(double t) const;

private:
    friend CumulantFlow solve_u(const BranchingMechanism&, double, double, double);
    friend CumulantFlow solve_joint(const JointMechanism&, double, double, double, double);
    friend CumulantFlow solve_skeleton(const JointMechanism&, double, double, double);
    // Components: (u, 1 - f); one-dimensional flows store g = 0.
    OdeSolution<2> sol_;
    double value(double t, std::size_t i) const;
};

inline constexpr double default_flow_tol = 1e-10;

CumulantFlow solve_u(const BranchingMechanism& m, double q, double T, double tol = default_flow_tol);
CumulantFlow solve_joint(const JointMechanism& j, double q, double r, double T,
                         double tol = default_flow_tol);
CumulantFlow solve_skeleton(const JointMechanism& j, double r, double T,
                            double tol = default_flow_tol);

// u_T(0+) by extrapolating u_T(q) from q = 1e-12 and 4e-12.
double u_at_zero(const BranchingMechanism& m, double T, double tol = default_flow_tol);

double feller_u_oracle(double sigma2, double gamma, double q, double t);

// Lower comparison bound for u_t(q, r) under the joint flow; NaN when gamma = 0.
double comparison_lower_bound(const JointMechanism& j, double q, double t);

// Columns t,u (one-dimensional), t,u,f (two-dimensional) or t,f (skeleton).
// An empty grid means the solver's own grid.
void write_flow_csv(std::ostream& os, const CumulantFlow& flow, const std::vector<double>& grid = {});

} // namespace csbp
