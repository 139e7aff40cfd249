#include "blindctl/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace blindctl {

namespace {

constexpr double kGolden = 0.6180339887498949;  // (sqrt(5)-1)/2

struct LinePoint {
    double t = 0.0;
    double value = 0.0;
};

/// Golden-section minimization on [a, b], shrinking to width 1e-12.
/// Returns the best point actually evaluated.
LinePoint golden_min(const std::function<double(double)>& f, double a, double b) {
    LinePoint best{a, f(a)};
    auto consider = [&best](double t, double v) {
        if (v < best.value) best = {t, v};
    };
    {
        double fb = f(b);
        consider(b, fb);
    }
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double fc = f(c), fd = f(d);
    consider(c, fc);
    consider(d, fd);
    while (b - a > 1e-12) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = f(c);
            consider(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = f(d);
            consider(d, fd);
        }
    }
    double mid = 0.5 * (a + b);
    consider(mid, f(mid));
    return best;
}

struct RestartOutcome {
    Vector pi;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

Vector clean_point(Vector p) {
    for (int i = 0; i < p.size(); ++i) p[i] = std::max(p[i], 0.0);
    double s = p.sum();
    if (s <= 0.0) throw std::runtime_error("optimizer produced an empty point");
    return p / s;
}

RestartOutcome run_frank_wolfe(const Mdp& m, const OptimizeConfig& cfg, Vector pi,
                               int restart, const IterateObserver& observer) {
    auto eval = [&m](const Vector& p) { return blind_cost(m, {p}); };
    double value = eval(pi);
    if (observer) observer(restart, 0, pi, value);

    RestartOutcome out;
    int stall = 0;
    int iter = 0;
    for (iter = 1; iter <= cfg.max_iters; ++iter) {
        Vector g = blind_gradient(m, {pi});
        int target = 0;
        for (int a = 1; a < m.k; ++a)
            if (g[a] < g[target]) target = a;
        double gap = g.dot(pi) - g[target];
        if (gap < cfg.tol) {
            out.converged = true;
            break;
        }

        Vector dir = -pi;
        dir[target] += 1.0;
        auto line = [&](double t) { return eval(clean_point(pi + t * dir)); };

        // Coarse bracket, then golden-section; the restriction need not be
        // unimodal on all of [0,1].
        LinePoint coarse{0.0, value};
        const double grid[4] = {0.25, 0.5, 0.75, 1.0};
        double vals[5] = {value, line(0.25), line(0.5), line(0.75), line(1.0)};
        int best_i = 0;
        for (int i = 1; i < 5; ++i)
            if (vals[i] < vals[best_i]) best_i = i;
        if (best_i > 0) coarse = {grid[best_i - 1], vals[best_i]};
        double lo = best_i == 0 ? 0.0 : (best_i == 1 ? 0.0 : grid[best_i - 2]);
        double hi = best_i == 4 ? 1.0 : grid[best_i];
        LinePoint pick = golden_min(line, lo, hi);
        if (coarse.value < pick.value) pick = coarse;

        double progress = value - pick.value;
        if (pick.value <= value && pick.t > 0.0) {
            pi = clean_point(pi + pick.t * dir);
            value = eval(pi);
            if (observer) observer(restart, iter, pi, value);
        }
        if (progress <= 1e-15 * std::max(1.0, std::abs(value))) {
            if (++stall >= 5) break;
        } else {
            stall = 0;
        }
    }
    out.pi = std::move(pi);
    out.value = value;
    out.iterations = std::min(iter, cfg.max_iters);
    return out;
}

RestartOutcome run_projected_gradient(const Mdp& m, const OptimizeConfig& cfg, Vector pi,
                                      int restart, const IterateObserver& observer) {
    constexpr double beta = 0.5;
    constexpr double armijo = 1e-4;
    auto eval = [&m](const Vector& p) { return blind_cost(m, {p}); };
    double value = eval(pi);
    if (observer) observer(restart, 0, pi, value);

    RestartOutcome out;
    int stall = 0;
    int iter = 0;
    for (iter = 1; iter <= cfg.max_iters; ++iter) {
        Vector g = blind_gradient(m, {pi});
        double step = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt, step *= beta) {
            Vector cand = project_simplex(pi - step * g).pi;
            Vector d = cand - pi;
            double vcand = eval(cand);
            if (vcand <= value + armijo * g.dot(d)) {
                double move = d.lpNorm<2>();
                pi = std::move(cand);
                value = vcand;
                accepted = true;
                if (observer) observer(restart, iter, pi, value);
                if (move < cfg.tol) out.converged = true;
                break;
            }
        }
        if (out.converged) break;
        if (!accepted) {
            if (++stall >= 3) break;
        } else {
            stall = 0;
        }
    }
    out.pi = std::move(pi);
    out.value = value;
    out.iterations = std::min(iter, cfg.max_iters);
    return out;
}

Vector start_point(int k, int restart, std::uint64_t seed) {
    if (restart < k) {
        Vector v = Vector::Zero(k);
        v[restart] = 1.0;
        return v;
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
    return rng.dirichlet_uniform(k);
}

/// Runs fn(r) for r in [0, count) with at most thread_budget() workers and
/// collects results by index, so the outcome is independent of scheduling.
template <typename F>
std::vector<RestartOutcome> run_restarts(int count, int threads, F&& fn) {
    std::vector<RestartOutcome> results(count);
    if (threads <= 1 || count <= 1) {
        for (int r = 0; r < count; ++r) results[r] = fn(r);
        return results;
    }
    int workers = std::min(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (int r = w; r < count; r += workers) results[r] = fn(r);
        });
    }
    for (auto& t : pool) t.join();
    return results;
}

}  // namespace

Vector blind_gradient(const Mdp& m, const BlindController& pi) {
    Matrix T = policy_transition(m, pi);
    Matrix M = Matrix::Identity(m.n, m.n) - m.gamma * T;
    Eigen::PartialPivLU<Matrix> lu(M);
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() < 1e-14)
        throw std::runtime_error("gradient solve: pivot below 1e-14");
    Vector x = lu.solve((1.0 - m.gamma) * m.mu);
    Vector w = lu.transpose().solve(m.cost * pi.pi);
    Vector g = m.cost.transpose() * x;
    for (int a = 0; a < m.k; ++a) g[a] += m.gamma * (m.trans[a] * x).dot(w);
    return g;
}

BlindController project_simplex(const Vector& v) {
    if (!v.allFinite()) throw std::invalid_argument("project_simplex: input not finite");
    const int k = static_cast<int>(v.size());
    std::vector<double> u(v.data(), v.data() + k);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, tau = 0.0;
    for (int j = 0; j < k; ++j) {
        cum += u[j];
        double candidate = (cum - 1.0) / (j + 1);
        if (u[j] - candidate > 0.0) tau = candidate;
    }
    Vector p(k);
    for (int i = 0; i < k; ++i) p[i] = std::max(v[i] - tau, 0.0);
    double s = p.sum();
    return {p / s};
}

OptimizeResult optimize_blind(const Mdp& m, const OptimizeConfig& cfg,
                              const IterateObserver& observer) {
    if (cfg.restarts < 1 || cfg.max_iters < 1 || !(cfg.tol > 0.0))
        throw std::invalid_argument("optimize_blind: bad config");
    require_valid(validate_mdp(m), "optimize_blind");

    // Observers see iterates from all restarts; keep them single-threaded.
    int threads = observer ? 1 : thread_budget();
    auto results = run_restarts(cfg.restarts, threads, [&](int r) {
        Vector start = start_point(m.k, r, cfg.seed);
        return cfg.method == Method::frank_wolfe
                   ? run_frank_wolfe(m, cfg, std::move(start), r, observer)
                   : run_projected_gradient(m, cfg, std::move(start), r, observer);
    });

    int best = 0;
    for (int r = 1; r < cfg.restarts; ++r)
        if (results[r].value < results[best].value - 1e-15) best = r;

    OptimizeResult out;
    out.pi = {results[best].pi};
    out.value = results[best].value;
    out.iterations_used = results[best].iterations;
    out.restart_index = best;
    out.converged = results[best].converged;
    return out;
}

MsQuadraticResult minimize_ms_quadratic(const Graph& g, const OptimizeConfig& cfg) {
    if (cfg.restarts < 1 || cfg.max_iters < 1 || !(cfg.tol > 0.0))
        throw std::invalid_argument("minimize_ms_quadratic: bad config");
    const int n = g.num_vertices();
    Matrix A = g.adjacency() + Matrix::Identity(n, n);

    auto replicate = [&](int r) {
        Vector y = start_point(n, r, cfg.seed);
        RestartOutcome out;
        int iter = 0;
        for (iter = 1; iter <= cfg.max_iters; ++iter) {
            Vector Ay = A * y;
            Vector next(n);
            for (int i = 0; i < n; ++i) next[i] = y[i] > 0.0 ? y[i] / Ay[i] : 0.0;
            next /= next.sum();
            double moved = (next - y).lpNorm<1>();
            y = std::move(next);
            if (moved < cfg.tol) {
                out.converged = true;
                break;
            }
        }
        out.value = y.dot(A * y);
        out.pi = std::move(y);
        out.iterations = std::min(iter, cfg.max_iters);
        return out;
    };

    auto results = run_restarts(cfg.restarts, thread_budget(), replicate);
    int best = 0;
    for (int r = 1; r < cfg.restarts; ++r)
        if (results[r].value < results[best].value - 1e-15) best = r;
    return {results[best].pi, results[best].value};
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {
inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
}  // namespace

Rng::Rng(std::uint64_t seed) {
    // xoshiro256++ seeded through splitmix64.
    for (int i = 0; i < 4; ++i) {
        seed += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = seed;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        s_[i] = z ^ (z >> 31);
    }
}

std::uint64_t Rng::next() {
    std::uint64_t result = rotl64(s_[0] + s_[3], 23) + s_[0];
    std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl64(s_[3], 45);
    return result;
}

double Rng::uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::exponential() {
    return -std::log1p(-uniform01());
}

Vector Rng::dirichlet_uniform(int k) {
    Vector v(k);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        v[i] = exponential();
        total += v[i];
    }
    if (total < 1e-300) return Vector::Constant(k, 1.0 / k);
    return v / total;
}

int Rng::uniform_int(int lo, int hi) {
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                          std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t r;
    do {
        r = next();
    } while (r >= limit);
    return lo + static_cast<int>(r % span);
}

int thread_budget() {
    const char* env = std::getenv("BLINDCTL_THREADS");
    if (env != nullptr) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace blindctl
