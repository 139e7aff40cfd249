#pragma once

#include "blindctl/graph.hpp"
#include "blindctl/mdp.hpp"
#include "blindctl/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace blindctl::testing {

// ---- graph corpus (all cubic) ----

inline Graph k4() {
    return Graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
}

inline Graph k33() {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < 3; ++u)
        for (int v = 3; v < 6; ++v) e.emplace_back(u, v);
    return Graph(6, e);
}

inline Graph triangular_prism() {
    return Graph(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {0, 3}, {1, 4}, {2, 5}});
}

inline Graph cube_q3() {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < 8; ++u)
        for (int b = 0; b < 3; ++b) {
            int v = u ^ (1 << b);
            if (u < v) e.emplace_back(u, v);
        }
    return Graph(8, e);
}

inline Graph petersen() {
    return Graph(10, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0},
                      {5, 7}, {7, 9}, {9, 6}, {6, 8}, {8, 5},
                      {0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9}});
}

inline std::vector<std::pair<std::string, Graph>> graph_corpus() {
    return {{"K4", k4()},
            {"K33", k33()},
            {"prism", triangular_prism()},
            {"Q3", cube_q3()},
            {"petersen", petersen()}};
}

// ---- brute-force stability number (raw enumeration, n <= 20) ----

inline std::pair<int, std::vector<int>> brute_max_independent_set(const Graph& g) {
    const int n = g.num_vertices();
    auto nbr = g.neighbor_masks();
    int best = 0;
    std::vector<int> witness;
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
        bool ok = true;
        int size = 0;
        for (int v = 0; v < n && ok; ++v) {
            if (!(mask >> v & 1)) continue;
            ++size;
            if (nbr[v] & mask) ok = false;
        }
        if (!ok || size < best) continue;
        std::vector<int> vs;
        for (int v = 0; v < n; ++v)
            if (mask >> v & 1) vs.push_back(v);
        if (size > best || vs < witness) {
            best = size;
            witness = std::move(vs);
        }
    }
    return {best, witness};
}

// ---- random instances ----

inline BlindController random_controller(Rng& rng, int k) {
    return {rng.dirichlet_uniform(k)};
}

/// Controller bounded away from the simplex boundary (every entry >= floor_frac/k).
inline BlindController random_interior_controller(Rng& rng, int k, double floor_frac = 0.1) {
    Vector v = rng.dirichlet_uniform(k);
    Vector u = Vector::Constant(k, 1.0 / k);
    return {(1.0 - floor_frac) * v + floor_frac * u};
}

inline Mdp random_mdp(Rng& rng, int n, int k) {
    Mdp m;
    m.n = n;
    m.k = k;
    m.gamma = 0.1 + 0.85 * rng.uniform01();
    m.mu = rng.dirichlet_uniform(n);
    m.cost.resize(n, k);
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < k; ++a) m.cost(s, a) = 2.0 * rng.uniform01() - 1.0;
    m.trans.assign(k, Matrix(n, n));
    for (int a = 0; a < k; ++a)
        for (int s = 0; s < n; ++s) m.trans[a].col(s) = rng.dirichlet_uniform(n);
    return m;
}

inline std::vector<int> random_permutation(Rng& rng, int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng.uniform_int(0, i)]);
    return p;
}

/// Symmetric doubly stochastic matrix: a mixture of I and symmetrized
/// permutation matrices.
inline Matrix random_symmetric_stochastic(Rng& rng, int n) {
    Vector w = rng.dirichlet_uniform(4);
    Matrix P = w[0] * Matrix::Identity(n, n);
    for (int j = 1; j < 4; ++j) {
        auto perm = random_permutation(rng, n);
        Matrix Q = Matrix::Zero(n, n);
        for (int s = 0; s < n; ++s) Q(perm[s], s) = 1.0;
        P += w[j] * 0.5 * (Q + Q.transpose());
    }
    return P;
}

/// Instance of the convex special case: symmetric transitions, state-only
/// costs proportional to -mu.
inline Mdp random_tractable_mdp(Rng& rng, int n, int k) {
    Mdp m;
    m.n = n;
    m.k = k;
    m.gamma = 0.2 + 0.75 * rng.uniform01();
    m.mu = rng.dirichlet_uniform(n);
    for (int s = 0; s < n; ++s) m.mu[s] = std::max(m.mu[s], 1e-3);
    m.mu /= m.mu.sum();
    double kappa = 0.5 + 2.5 * rng.uniform01();
    m.cost.resize(n, k);
    for (int a = 0; a < k; ++a) m.cost.col(a) = -kappa * m.mu;
    m.trans.assign(k, Matrix(n, n));
    for (int a = 0; a < k; ++a) m.trans[a] = random_symmetric_stochastic(rng, n);
    return m;
}

/// The two-state instance with identity and swap transitions, mu = (0.8, 0.2),
/// cost = -mu in both actions, gamma = 1/2.
inline Mdp two_state_tractable() {
    Mdp m;
    m.n = 2;
    m.k = 2;
    m.gamma = 0.5;
    m.mu.resize(2);
    m.mu << 0.8, 0.2;
    m.cost.resize(2, 2);
    m.cost << -0.8, -0.8, -0.2, -0.2;
    m.trans.assign(2, Matrix(2, 2));
    m.trans[0] << 1, 0, 0, 1;
    m.trans[1] << 0, 1, 1, 0;
    return m;
}

// ---- independent oracles ----

/// Central difference of blind_cost along e_a - e_b; the controller must sit
/// at least h away from the boundary in those coordinates.
inline double fd_directional(const Mdp& m, const BlindController& pi, int a, int b,
                             double h = 1e-6) {
    Vector up = pi.pi, dn = pi.pi;
    up[a] += h;
    up[b] -= h;
    dn[a] -= h;
    dn[b] += h;
    return (blind_cost(m, {up}) - blind_cost(m, {dn})) / (2.0 * h);
}

/// Value iteration with the conservative stopping rule
/// ||V_{t+1} - V_t||_inf < tol (1-gamma)/(2 gamma); returns the
/// (1-gamma)-normalized optimum.
inline double value_iteration_optimum(const Mdp& m, double tol = 1e-10) {
    Vector V = Vector::Zero(m.n);
    double threshold = tol * (1.0 - m.gamma) / (2.0 * m.gamma);
    for (long iter = 0; iter < 100000000; ++iter) {
        Vector W(m.n);
        for (int s = 0; s < m.n; ++s) {
            double best = std::numeric_limits<double>::infinity();
            for (int a = 0; a < m.k; ++a)
                best = std::min(best, m.cost(s, a) + m.gamma * m.trans[a].col(s).dot(V));
            W[s] = best;
        }
        double delta = (W - V).cwiseAbs().maxCoeff();
        V = std::move(W);
        if (delta < threshold) break;
    }
    return (1.0 - m.gamma) * m.mu.dot(V);
}

/// Visits every point of the resolution-1/m simplex grid in k dimensions.
inline void for_each_grid_point(int k, int m, const std::function<void(const Vector&)>& fn) {
    std::vector<int> counts(k, 0);
    std::function<void(int, int)> rec = [&](int idx, int remaining) {
        if (idx == k - 1) {
            counts[idx] = remaining;
            Vector p(k);
            for (int i = 0; i < k; ++i) p[i] = static_cast<double>(counts[i]) / m;
            fn(p);
            return;
        }
        for (int c = 0; c <= remaining; ++c) {
            counts[idx] = c;
            rec(idx + 1, remaining - c);
        }
    };
    rec(0, m);
}

/// Relative error with a unit floor, the usual gradient-check metric.
inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace blindctl::testing
