#pragma once

#include "blindctl/rational.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace blindctl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Load-time tolerance for stochasticity / normalization checks. Violations
/// beyond this are reported as errors; nothing is ever silently renormalized.
inline constexpr double kStochasticTol = 1e-9;

/// Exact-rational mirror of an Mdp, attached when an instance was parsed from
/// text or produced by a reduction generator. Serialization prefers it so
/// generated instances round-trip bit-exactly.
struct MdpExact {
    Rational gamma;
    std::vector<Rational> mu;                            // n
    std::vector<std::vector<Rational>> cost;             // n rows x k
    std::vector<std::vector<std::vector<Rational>>> trans;  // k, each n x n, [sbar][s]
};

/**
Discounted MDP with n states and k actions.

Conventions:
  - states and actions are 0-based in this API (file formats are 1-based);
  - cost(s, a) is a cost, i.e. a negative reward;
  - trans[a](sbar, s) = p(sbar | s, a), so each column of trans[a] is a
    probability distribution and trans[a] is column-stochastic.
*/
struct Mdp {
    int n = 0;
    int k = 0;
    double gamma = 0.0;
    Vector mu;                  // n
    Matrix cost;                // n x k
    std::vector<Matrix> trans;  // k matrices, each n x n

    std::optional<MdpExact> exact;
};

/// Blind controller: one distribution over actions, applied at every step.
struct BlindController {
    Vector pi;  // k, nonnegative, sums to 1
};

/// Discounted state-visitation frequencies under the (1-gamma) normalization;
/// sums to 1.
struct OccupancyVector {
    Vector x;  // n
};

struct Violation {
    std::string path;     // e.g. "mu", "trans[2].col[3]"
    std::string message;
    double magnitude = 0.0;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;
};

/// Builds the double-precision Mdp from its exact description and attaches
/// the exact data as the serialization sidecar.
Mdp realize(MdpExact exact);

/** Checks every Mdp invariant (normalization, stochasticity, gamma range,
    finiteness) and reports all violations with their magnitudes. Never throws. */
ValidationReport validate_mdp(const Mdp& m, double tol = kStochasticTol);

/// Like validate_mdp but for a controller against a given action count.
ValidationReport validate_controller(const BlindController& pi, int k,
                                     double tol = kStochasticTol);

/// Throws std::invalid_argument with the first violation if the report is bad.
void require_valid(const ValidationReport& report, const std::string& what);

/** Mixture transition matrix T = sum_a pi_a P_a with T(sbar, s) =
    sum_a pi_a p(sbar|s,a); column-stochastic. */
Matrix policy_transition(const Mdp& m, const BlindController& pi);

/**
Solves the occupancy system x = (1-gamma) mu + gamma T x for the blind
controller pi. The system matrix I - gamma T is nonsingular for every valid
input (spectral radius of gamma T is below 1); a pivot under 1e-14 signals
corrupted input and raises std::runtime_error.
*/
OccupancyVector occupancy(const Mdp& m, const BlindController& pi);

/**
Cost J(pi) = x^T C pi of a blind controller, where x = occupancy(m, pi).

This is the (1-gamma)-normalized discounted cost: multiply by 1/(1-gamma)
to recover the raw expected discounted sum.
*/
double blind_cost(const Mdp& m, const BlindController& pi);

/** Cost of the deterministic blind controller that always plays action a,
    computed by a single Markov-chain solve. Agrees with blind_cost at the
    simplex vertex e_a. */
double evaluate_deterministic_blind(const Mdp& m, int a);

/**
Optimal (1-gamma)-normalized discounted cost over unrestricted stationary
policies, a lower bound on blind_cost for every controller. Computed by exact
policy iteration; improvement steps are strict, so the sweep is deterministic.
*/
double unrestricted_optimum(const Mdp& m);

/// Convenience constructors.
BlindController uniform_controller(int k);
BlindController vertex_controller(int k, int a);

}  // namespace blindctl
