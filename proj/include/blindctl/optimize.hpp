#pragma once

#include "blindctl/graph.hpp"
#include "blindctl/mdp.hpp"

#include <cstdint>
#include <functional>

namespace blindctl {

enum class Method { frank_wolfe, projected_gradient };

struct OptimizeConfig {
    int restarts = 32;
    int max_iters = 5000;   // per restart
    double tol = 1e-9;      // Frank-Wolfe gap / projected-gradient step norm
    std::uint64_t seed = 0;
    Method method = Method::frank_wolfe;
};

struct OptimizeResult {
    BlindController pi;
    double value = 0.0;
    int iterations_used = 0;
    int restart_index = 0;
    bool converged = false;
};

/// Called once per accepted iterate; used by tests to check monotone descent
/// and feasibility of every iterate.
using IterateObserver =
    std::function<void(int restart, int iter, const Vector& pi, double value)>;

/**
Euclidean gradient of J(pi) = x(pi)^T C pi through the occupancy system:
g_a = (C^T x)_a + gamma (P_a x)^T w, with w the adjoint solve
(I - gamma T)^T w = C pi. Costs two linear solves.

Off the simplex tangent space the raw gradient carries an arbitrary constant
offset (the normalization multiplier): compare only differences g_a - g_b.
*/
Vector blind_gradient(const Mdp& m, const BlindController& pi);

/** Euclidean projection onto the probability simplex via sort-and-threshold;
    the result is renormalized exactly so its entries sum to 1. */
BlindController project_simplex(const Vector& v);

/**
Multistart local minimization of blind_cost over the simplex. Start points are
the k vertices first (as restarts allow), then uniform Dirichlet samples;
restart r is seeded deterministically from (cfg.seed, r), so identical configs
give bitwise-identical results. Restarts may run in parallel (capped by the
BLINDCTL_THREADS environment variable); the best-of reduction is
order-independent with lower restart_index winning ties.

The returned value is a local optimum only; finding the global optimum of this
bilinear program is NP-hard.
*/
OptimizeResult optimize_blind(const Mdp& m, const OptimizeConfig& cfg,
                              const IterateObserver& observer = nullptr);

struct MsQuadraticResult {
    Vector y;
    double value = 0.0;
};

/**
Multistart minimization of y^T (G + I) y over the simplex by the normalized
inverse-payoff replicator update y_i <- y_i / ((G+I)y)_i, plus vertex starts.
The global minimum equals 1/alpha(G) (Motzkin-Straus); the returned value can
only lie above it.
*/
MsQuadraticResult minimize_ms_quadratic(const Graph& g, const OptimizeConfig& cfg);

/// splitmix64-based derivation of per-stream seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Deterministic RNG helpers (explicit constructions; no std::*_distribution,
/// whose output is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    double uniform01();              // [0, 1)
    double exponential();            // Exp(1)
    Vector dirichlet_uniform(int k); // uniform on the simplex
    int uniform_int(int lo, int hi); // inclusive bounds

private:
    std::uint64_t s_[4];
    std::uint64_t next();
};

/// Thread budget from BLINDCTL_THREADS (0 or unset = hardware concurrency).
int thread_budget();

}  // namespace blindctl
