#pragma once

#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace csbp {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

struct ZeroMeasure {};

struct Atom {
    double y;
    double mass;
};

struct AtomMeasure {
    std::vector<Atom> atoms;
};

// Contribution to psi is exactly -c q^alpha (alpha < 1) or +c q^alpha (alpha > 1),
// whatever the compensation convention of the enclosing mechanism. The Levy
// density is C y^{-1-alpha} with C = c / |Gamma(-alpha)|.
struct StableMeasure {
    double alpha;
    double c;
};

// Density c y^{-1-alpha} e^{-theta y}.
struct TemperedMeasure {
    double alpha;
    double theta;
    double c;
};

// Near 0 the density is O(y^{-1-small_index}); at infinity it is
// O(y^{-1-tail_index} e^{-tail_rate y}). NaN means "not declared".
struct DensityHint {
    double small_index = std::numeric_limits<double>::quiet_NaN();
    double tail_index = std::numeric_limits<double>::quiet_NaN();
    double tail_rate = 0.0;
};

// One power-law-exponential term c y^{-1-alpha} e^{-theta y}; used to build
// serialisable generic densities.
struct PowerTerm {
    double c;
    double alpha;
    double theta;
};

struct DensityMeasure {
    std::function<double(double)> density;
    DensityHint hint;
    std::vector<PowerTerm> terms; // empty when built from an opaque function
    double tilt = 0.0;            // density(y) is multiplied by e^{-tilt y}
};

using LevyMeasure =
    std::variant<ZeroMeasure, AtomMeasure, StableMeasure, TemperedMeasure, DensityMeasure>;

enum class Compensation { UnitTruncation, FullCompensation };

struct BranchingMechanism {
    double sigma2 = 0.0;
    double gamma = 0.0;
    double kappa = 0.0;
    LevyMeasure levy = ZeroMeasure{};
    Compensation compensation = Compensation::UnitTruncation;
};

enum class Criticality { Supercritical, Critical, Subcritical };

struct Classification {
    Criticality criticality;
    bool immortal;
    bool nonexplosive;
};

std::string to_string(Criticality c);

// Builders.
BranchingMechanism feller(double sigma2, double gamma, double kappa = 0.0);
BranchingMechanism stable_mechanism(double alpha, double c, double sigma2 = 0.0,
                                    double gamma = 0.0);
DensityMeasure density_from_terms(std::vector<PowerTerm> terms);
DensityMeasure density_from_function(std::function<double(double)> g, DensityHint hint);

// Throws std::invalid_argument when an invariant is violated.
void validate(const BranchingMechanism& m);

bool has_jumps(const LevyMeasure& nu);
double stable_density_constant(double alpha, double c);

// Levy density (or 0 for atoms/zero) at y > 0, including any tilt.
double levy_density(const LevyMeasure& nu, double y);

// Integral of y^j nu(dy) over [lo, hi) (hi may be infinity). May be infinite.
double levy_moment(const LevyMeasure& nu, int j, double lo, double hi);

// Mass nu([lo, infinity)), lo > 0.
double levy_tail_mass(const LevyMeasure& nu, double lo);

double eval_psi(const BranchingMechanism& m, double q);
double eval_psi_prime(const BranchingMechanism& m, double lam);

// psi without the killing term: psi(q) + kappa. Defined for q >= 0.
double eval_psi_unkilled(const BranchingMechanism& m, double q);

// psi'(0+), possibly -infinity.
double psi_prime_at_zero(const BranchingMechanism& m);

BranchingMechanism esscher(const BranchingMechanism& m, double lam);

// Throws std::invalid_argument when the target convention is not defined
// (FullCompensation with an infinite first moment on [1, infinity)).
BranchingMechanism convert_compensation(const BranchingMechanism& m, Compensation target);

// Drift gamma of psi written with the unit-truncated compensator
// y 1_{(0,1)}(y), whatever the stored convention (stable parts included).
double unit_truncation_drift(const BranchingMechanism& m);

// Sign of psi(q) (derivative = false) or psi'(q) (derivative = true) as q -> infinity:
// +1, -1, or 0 when no analytic certificate is available.
int asymptotic_sign(const BranchingMechanism& m, bool derivative);

double largest_root(const BranchingMechanism& m);
double argmin_location(const BranchingMechanism& m);

// Exponent beta with psi(q) ~ c q^beta near 0 when psi'(0+) = -infinity; NaN if unknown.
double small_q_exponent(const BranchingMechanism& m);

Classification classify(const BranchingMechanism& m);

enum class Divergence { Diverges, Converges, Inconclusive };

// Decides whether the integral of h over (0, x0] diverges at 0, h > 0.
Divergence divergence_probe(const std::function<double(double)>& h, double x0);

} // namespace csbp
