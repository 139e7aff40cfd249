#include "blindctl/reductions.hpp"

#include <stdexcept>
#include <string>

namespace blindctl {

namespace {

void check_gamma(const Rational& gamma) {
    if (!(gamma > Rational(0) && gamma < Rational(1)))
        throw std::invalid_argument("gamma must lie strictly in (0,1), got " + gamma.str());
}

void check_sqrtsum(const SqrtSumInstance& inst) {
    if (inst.c.empty()) throw std::invalid_argument("SQRT-SUM instance: empty c list");
    if (inst.d < 0) throw std::invalid_argument("SQRT-SUM instance: d must be nonnegative");
    for (long long ci : inst.c)
        if (ci < 0) throw std::invalid_argument("SQRT-SUM instance: c entries must be nonnegative");
}

}  // namespace

ReductionInstance stableset_to_blind(const Graph& g, int j, const Rational& gamma) {
    const int n = g.num_vertices();
    if (!g.is_cubic())
        throw std::invalid_argument("stable-set reduction requires a cubic graph");
    if (j < 1 || j > n)
        throw std::invalid_argument("stable-set reduction: j out of range [1, n]");
    if (n > 256)
        throw std::invalid_argument(
            "stable-set reduction: graphs beyond 256 vertices produce impractically "
            "large dense instances");
    check_gamma(gamma);

    MdpExact ex;
    ex.gamma = gamma;
    ex.mu.assign(n, Rational(1) / Rational(n));
    Rational inv_gamma = Rational(1) / gamma;
    ex.cost.assign(n, std::vector<Rational>(n, Rational(0)));
    for (int s = 0; s < n; ++s) ex.cost[s][s] = inv_gamma;  // identity part
    for (auto [u, v] : g.edges()) {
        ex.cost[u][v] = inv_gamma;
        ex.cost[v][u] = inv_gamma;
    }
    // p(sbar|s,a) = [sbar == a]: row a of trans[a] is all ones.
    ex.trans.assign(n, std::vector<std::vector<Rational>>(
                           n, std::vector<Rational>(n, Rational(0))));
    for (int a = 0; a < n; ++a)
        for (int s = 0; s < n; ++s) ex.trans[a][a][s] = Rational(1);

    ReductionInstance inst;
    inst.mdp = realize(std::move(ex));
    inst.target = Rational(1) / Rational(j) +
                  Rational(4) * (Rational(1) - gamma) / (Rational(n) * gamma);
    inst.kind = ReductionKind::stable_set;
    inst.meta = StableSetMeta{j, gamma};
    return inst;
}

double reduced_cost_quadratic(const Graph& g, const Rational& gamma,
                              const BlindController& pi) {
    const int n = g.num_vertices();
    if (!g.is_cubic())
        throw std::invalid_argument("reduced_cost_quadratic requires a cubic graph");
    check_gamma(gamma);
    if (pi.pi.size() != n)
        throw std::invalid_argument("reduced_cost_quadratic: controller length mismatch");
    double gd = gamma.to_double();
    Matrix A = g.adjacency() + Matrix::Identity(n, n);
    return 4.0 * (1.0 - gd) / (n * gd) + pi.pi.dot(A * pi.pi);
}

Rational sqrtsum_epsilon(const SqrtSumInstance& inst) {
    check_sqrtsum(inst);
    BigInt total = 0;
    for (long long ci : inst.c) total += ci;
    if (total <= 1)
        throw std::invalid_argument("instance trivial, decide directly (sum of c is <= 1)");
    BigInt n(inst.c.size());
    return Rational(n * total - n, 1);
}

ReductionInstance sqrtsum_to_blind(const SqrtSumInstance& inst) {
    Rational eps = sqrtsum_epsilon(inst);  // validates the instance
    const int n = static_cast<int>(inst.c.size());
    if (n > 256)
        throw std::invalid_argument(
            "sqrt-sum reduction: lists beyond 256 entries produce impractically "
            "large dense instances");
    Rational gamma = eps / (Rational(1) + eps);

    MdpExact ex;
    ex.gamma = gamma;
    ex.mu.assign(n + 1, Rational(1) / Rational(n));
    ex.mu[n] = Rational(0);
    // State-only costs, replicated across all actions; the absorbing state is free.
    ex.cost.assign(n + 1, std::vector<Rational>(n, Rational(0)));
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < n; ++a) ex.cost[s][a] = Rational(inst.c[s]);
    ex.trans.assign(n, std::vector<std::vector<Rational>>(
                           n + 1, std::vector<Rational>(n + 1, Rational(0))));
    for (int a = 0; a < n; ++a) {
        for (int s = 0; s < n; ++s) {
            if (s == a)
                ex.trans[a][n][s] = Rational(1);  // escape to the absorbing state
            else
                ex.trans[a][s][s] = Rational(1);  // self-loop
        }
        ex.trans[a][n][n] = Rational(1);  // absorbing under every action
    }

    Rational n_plus_eps = Rational(n) + eps;
    ReductionInstance out;
    out.mdp = realize(std::move(ex));
    out.target = Rational(inst.d) * Rational(inst.d) / (Rational(n) * n_plus_eps);
    out.kind = ReductionKind::sqrt_sum;
    out.meta = SqrtSumMeta{inst.c, inst.d, eps, gamma};
    return out;
}

double sqrtsum_cost_direct(const SqrtSumInstance& inst, const BlindController& pi) {
    double eps = sqrtsum_epsilon(inst).to_double();
    const int n = static_cast<int>(inst.c.size());
    if (pi.pi.size() != n)
        throw std::invalid_argument("sqrtsum_cost_direct: controller length mismatch");
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        total += static_cast<double>(inst.c[i]) / (1.0 + eps * pi.pi[i]);
    return total / n;
}

}  // namespace blindctl
