#pragma once

#include "blindctl/graph.hpp"
#include "blindctl/mdp.hpp"
#include "blindctl/optimize.hpp"
#include "blindctl/rational.hpp"
#include "blindctl/reductions.hpp"

#include <string>
#include <vector>

namespace blindctl {

struct MisResult {
    int alpha = 0;
    std::vector<int> witness;  // ascending; lexicographically smallest maximum set
};

/**
Exact maximum independent set by branch and bound over vertex inclusion with
a remaining-count bound and max-degree branching. A second pass canonicalizes
the witness to the lexicographically smallest maximum set. Budgeted to
n <= 40 vertices.
*/
MisResult max_independent_set(const Graph& g);

struct SqrtSumOptimum {
    BlindController pi_star;  // interior optimum of the reduction MDP
    double j_star = 0.0;      // (sum sqrt(c))^2 / (n (n + epsilon))
    /// Total controller mass obtained by exact rational algebra (the sqrt
    /// terms cancel); equals 1 whenever epsilon is defined consistently.
    Rational mass_exact;
};

/**
Closed-form optimum of the SQRT-SUM reduction:
pi*_i = ((n+eps) sqrt(c_i)/sum_j sqrt(c_j) - 1)/eps, with optimal cost
(sum sqrt(c))^2/(n(n+eps)). Every coordinate is strictly positive.
Requires sum(c) > 1.
*/
SqrtSumOptimum sqrtsum_optimum(const SqrtSumInstance& inst);

/** Sign of sum_i sqrt(c_i) - d, decided exactly: perfect squares compare as
    integers; otherwise dyadic rational enclosures of each root are refined
    until the comparison resolves (the sum is irrational then, so it does). */
int compare_sqrt_sum(const std::vector<long long>& c, const BigInt& d);

/** Sign of (sum_i sqrt(c_i))^2 - q, decided exactly. The square is rational
    iff all pairwise products c_i*c_j are perfect squares, in which case it is
    computed exactly; otherwise enclosure refinement resolves the comparison. */
int compare_sqrt_sum_squared(const std::vector<long long>& c, const Rational& q);

/// Exact answer to "sum_i sqrt(c_i) <= d"; never trusts floating point.
bool decide_sqrtsum(const SqrtSumInstance& inst);

struct TractableForm {
    bool is_tractable = false;
    double kappa = 0.0;    // scale in cost = -kappa * mu, when cost_ok
    bool symmetric_ok = false;
    bool cost_ok = false;
};

/**
Detects the convex special case: all transition matrices symmetric (hence
doubly stochastic) and costs state-only with common column equal to
-kappa * mu for some kappa > 0 (least-squares fit, residual under 1e-10).
*/
TractableForm is_tractable_case(const Mdp& m);

struct TractableSolution {
    int a_star = 0;
    double value = 0.0;  // blind_cost(m, e_{a_star}); global over all controllers
};

/** Exact global solution of the tractable case: evaluates the k deterministic
    controllers (k Markov-chain solves) and picks the best, which convexity
    guarantees is globally optimal over all stochastic blind controllers. */
TractableSolution solve_tractable(const Mdp& m);

/** True iff I - gamma * sum_a pi_a P_a admits a Cholesky factorization (all
    pivots positive). Always true for symmetric transition matrices; used as a
    property check, not a runtime branch. */
bool psd_check(const Mdp& m, const BlindController& pi);

struct ConvexityReport {
    int trials = 0;
    int violations = 0;
    double max_violation = 0.0;  // worst midpoint excess observed
};

/** Samples controller pairs and checks midpoint convexity of
    f(pi) = mu^T (I - gamma M_pi)^{-1} mu with 1e-10 slack. */
ConvexityReport convexity_probe(const Mdp& m, int trials, std::uint64_t seed);

/// The matrix-fractional objective of the tractable case.
double matrix_fractional_value(const Mdp& m, const BlindController& pi);

enum class Verdict { match, optimizer_suboptimal, inconsistent };

struct VerificationReport {
    std::string instance_id;
    double oracle_value = 0.0;
    double optimizer_value = 0.0;
    BlindController witness_pi;   // optimizer's best controller
    double gap = 0.0;             // |oracle - optimizer|
    Verdict verdict = Verdict::match;
    bool decision_yes = false;    // exact answer to "exists pi with J(pi) <= r"
    bool ill_conditioned = false; // sqrt-sum epsilon beyond 1e6
    std::vector<std::string> notes;
};

/**
Checks a reduction bundle end to end: re-derives the instance from its
metadata (rejecting tampered bundles), computes the exact oracle optimum
(brute-force stability number for stable-set bundles, the closed form for
sqrt-sum ones), runs the local optimizer against it, and decides the target
question exactly. Verdict is `match` when |oracle - optimizer| <= tol,
`inconsistent` when the optimizer beats the proven optimum or the bundle
fails its structural checks, `optimizer_suboptimal` otherwise.
*/
VerificationReport verify_reduction(const ReductionInstance& inst,
                                    const OptimizeConfig& cfg, double tol = 1e-6);

}  // namespace blindctl
