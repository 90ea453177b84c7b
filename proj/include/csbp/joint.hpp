#pragma once

#include "csbp/mechanism.hpp"
#include "csbp/random.hpp"

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace csbp {

enum class Regime { AtOrAbove, Below };

std::string to_string(Regime r);

struct JointMechanism {
    BranchingMechanism base;
    double lam = 0.0;
    double rho = 0.0;
    Regime regime = Regime::AtOrAbove;
    BranchingMechanism esscher_mech;
    double psi_at_lam = 0.0;
    double psi_prime_at_lam = 0.0;

    // Per-individual skeleton death rate: (psi(lam)+ + kappa) / lam.
    double death_rate() const;
    // Per-unit-mass skeleton birth rate: -psi(lam) below rho, 0 otherwise.
    double birth_rate() const;
    // Binary branching atom sigma^2 lam / 2 (graft of zero mass, k = 1).
    double diffusion_atom() const { return 0.5 * base.sigma2 * lam; }
};

JointMechanism make_joint(const BranchingMechanism& m, double lam);

// (q, r) forms; r in (0, 1).
double psi_c(const JointMechanism& j, double q, double r);
double psi_d(const JointMechanism& j, double q, double r); // both forms, cross-checked
double psi_d_closed(const JointMechanism& j, double q, double r);
double psi_d_series(const JointMechanism& j, double q, double r);
double joint_identity_residual(const JointMechanism& j, double q, double r);

// Same mechanisms in the variable g = 1 - r, which keeps precision as r -> 1.
// q = 0 is allowed.
double psi_c_g(const JointMechanism& j, double q, double g);
double psi_d_closed_g(const JointMechanism& j, double q, double g);
double psi_d_series_g(const JointMechanism& j, double q, double g);

// k-slice s(dy, {k}) = y e^{-lam y} (lam y)^k / (k+1)! nu(dy).
struct GraftSlice {
    std::int64_t k = 0;
    double mass = 0.0;           // may be infinite (k = 0, infinite activity)
    double diffusion_atom = 0.0; // sigma^2 lam / 2 at y = 0 when k = 1
    std::function<double(Stream&)> sampler;

    bool empty() const { return !(mass >= 1e-300); }
    double sample(Stream& s) const;
};

GraftSlice graft_kernel(const JointMechanism& j, std::int64_t k);

// Sum over k >= 1 of the slice masses: (1/lam) int (1 - e^{-lam y}(1 + lam y)) nu(dy).
double graft_branch_mass(const JointMechanism& j);
// Sum over all k >= 0: (1/lam) int (1 - e^{-lam y}) nu(dy); infinite if nu is.
double graft_total_mass(const JointMechanism& j);

struct OffspringDistribution {
    double p_minus1 = 0.0;
    std::vector<double> p; // p[i] is p_{i+1}
    std::int64_t cutoff = 0;
    double tail_mass = 0.0;
    double total_rate = 0.0;

    // Probability of k offspring, k = -1 or k >= 1 (0 otherwise).
    double prob(std::int64_t k) const;
    // Generating-function side psi'(lam) sum_k (r^{k+1} - r) p_k.
    double skeleton_mechanism(double r) const;
};

OffspringDistribution offspring_distribution(const JointMechanism& j, double tail_tol = 1e-12);

void write_offspring_csv(std::ostream& os, const OffspringDistribution& d);

enum class Autonomy { DiscreteAutonomous, ContinuousAutonomous, Coupled };

std::string to_string(Autonomy a);

// Generic two-type description, as far as the autonomy criterion needs it.
struct TwoTypeDescription {
    bool pi_only_k0 = false;  // pi(dy, dk) concentrated on k = 0
    bool rho_only_y0 = false; // rho(dy, dk) concentrated on y = 0
    double b = 0.0;
    std::function<double(double)> psi_c_at_r1; // q -> Psi_c(q, 1)
    std::function<double(double)> psi_d_at_q0; // r -> Psi_d(0, r)
};

Autonomy autonomy_check(const TwoTypeDescription& d);
Autonomy autonomy_check(const JointMechanism& j);

} // namespace csbp
