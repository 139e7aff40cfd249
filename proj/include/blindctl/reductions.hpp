#pragma once

#include "blindctl/graph.hpp"
#include "blindctl/mdp.hpp"
#include "blindctl/rational.hpp"

#include <variant>
#include <vector>

namespace blindctl {

/// Input to the SQRT-SUM decision problem: is sum_i sqrt(c_i) <= d?
struct SqrtSumInstance {
    std::vector<long long> c;  // nonnegative, nonempty
    long long d = 0;           // nonnegative
};

struct StableSetMeta {
    int j = 0;
    Rational gamma;
};

struct SqrtSumMeta {
    std::vector<long long> c;
    long long d = 0;
    Rational epsilon;
    Rational gamma;
};

enum class ReductionKind { stable_set, sqrt_sum };

/// An MDP produced by one of the hardness reductions, bundled with its exact
/// rational target cost and the parameters that generated it.
struct ReductionInstance {
    Mdp mdp;
    Rational target;
    ReductionKind kind = ReductionKind::stable_set;
    std::variant<StableSetMeta, SqrtSumMeta> meta;
};

/**
Reduction from maximum independent set on a cubic graph to blind-controller
optimization. The MDP has n states and n actions, uniform start, cost matrix
(1/gamma)(G + I), and transitions p(sbar|s,a) = [sbar == a]; the target is
r = 1/j + 4(1-gamma)/(n gamma), exact. A controller achieving cost <= r
exists iff the graph has an independent set of size >= j.
*/
ReductionInstance stableset_to_blind(const Graph& g, int j, const Rational& gamma);

/** Closed form of the cost on the stable-set reduction MDP:
    4(1-gamma)/(n gamma) + pi^T (G + I) pi. Must agree with blind_cost on the
    constructed MDP. */
double reduced_cost_quadratic(const Graph& g, const Rational& gamma,
                              const BlindController& pi);

/**
Reduction from SQRT-SUM to blind-controller optimization. The MDP has n+1
states (the last absorbing and free) and n actions; action i escapes state i
to the absorbing state, every other action self-loops. With
epsilon = n*sum(c) - n, gamma = epsilon/(1+epsilon) and target
r = d^2/(n(n+epsilon)), the optimal blind cost is at most r iff
sum_i sqrt(c_i) <= d. Requires sum(c) > 1 (so epsilon > 0); instances failing
that are trivial and belong to the direct decider.
*/
ReductionInstance sqrtsum_to_blind(const SqrtSumInstance& inst);

/** Closed form of the cost on the SQRT-SUM reduction MDP:
    (1/n) sum_i c_i / (1 + epsilon pi_i). Must agree with blind_cost on the
    constructed MDP. */
double sqrtsum_cost_direct(const SqrtSumInstance& inst, const BlindController& pi);

/// epsilon = n*sum(c) - n as an exact rational; throws unless sum(c) > 1.
Rational sqrtsum_epsilon(const SqrtSumInstance& inst);

}  // namespace blindctl
