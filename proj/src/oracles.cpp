#include "blindctl/oracles.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace blindctl {

namespace {

constexpr std::uint64_t bit(int v) { return std::uint64_t(1) << v; }

struct MisSearch {
    int n;
    std::vector<std::uint64_t> nbr;
    int best = 0;

    explicit MisSearch(const Graph& g) : n(g.num_vertices()), nbr(g.neighbor_masks()) {}

    int pick_branch_vertex(std::uint64_t cands) const {
        int v = -1, vdeg = -1;
        for (std::uint64_t rest = cands; rest;) {
            int u = std::countr_zero(rest);
            rest &= rest - 1;
            int deg = std::popcount(nbr[u] & cands);
            if (deg > vdeg) {
                vdeg = deg;
                v = u;
            }
        }
        return v;
    }

    // Pull in vertices with no remaining neighbors; they are always safe.
    void absorb_isolated(std::uint64_t& cands, int& count) const {
        bool again = true;
        while (again) {
            again = false;
            for (std::uint64_t rest = cands; rest;) {
                int u = std::countr_zero(rest);
                rest &= rest - 1;
                if ((nbr[u] & cands) == 0) {
                    cands &= ~bit(u);
                    ++count;
                    again = true;
                }
            }
        }
    }

    void search(std::uint64_t cands, int count) {
        absorb_isolated(cands, count);
        if (count > best) best = count;
        if (!cands || count + std::popcount(cands) <= best) return;
        int v = pick_branch_vertex(cands);
        search(cands & ~(nbr[v] | bit(v)), count + 1);
        search(cands & ~bit(v), count);
    }

    // Is there an independent set of size >= need inside cands?
    bool feasible(std::uint64_t cands, int need) const {
        if (need <= 0) return true;
        int free_count = 0;
        bool again = true;
        while (again) {
            again = false;
            for (std::uint64_t rest = cands; rest;) {
                int u = std::countr_zero(rest);
                rest &= rest - 1;
                if ((nbr[u] & cands) == 0) {
                    cands &= ~bit(u);
                    ++free_count;
                    again = true;
                }
            }
        }
        need -= free_count;
        if (need <= 0) return true;
        if (std::popcount(cands) < need) return false;
        int v = pick_branch_vertex(cands);
        return feasible(cands & ~(nbr[v] | bit(v)), need - 1) ||
               feasible(cands & ~bit(v), need);
    }
};

int greedy_independent_size(const Graph& g) {
    auto nbr = g.neighbor_masks();
    const int n = g.num_vertices();
    std::uint64_t cands = n == 64 ? ~std::uint64_t(0) : (bit(n) - 1);
    int size = 0;
    while (cands) {
        int v = -1, vdeg = n + 1;
        for (std::uint64_t rest = cands; rest;) {
            int u = std::countr_zero(rest);
            rest &= rest - 1;
            int deg = std::popcount(nbr[u] & cands);
            if (deg < vdeg) {
                vdeg = deg;
                v = u;
            }
        }
        cands &= ~(nbr[v] | bit(v));
        ++size;
    }
    return size;
}

std::string join_longs(const std::vector<long long>& v) {
    std::ostringstream os;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",";
        os << v[i];
    }
    return os.str();
}

/// Dyadic enclosures lo/2^t <= sqrt(c) < (lo+1)/2^t, exact for perfect squares.
struct RootEnclosures {
    std::vector<BigInt> lo;
    std::vector<bool> is_square;
    std::vector<BigInt> scaled_c;  // c * 4^t
    int nonsquare = 0;
    long t = 0;

    explicit RootEnclosures(const std::vector<long long>& c) {
        for (long long ci : c) {
            if (ci < 0) throw std::invalid_argument("sqrt-sum: negative entry");
            BigInt b(ci);
            BigInt r = boost::multiprecision::sqrt(b);
            lo.push_back(r);
            bool sq = r * r == b;
            is_square.push_back(sq);
            if (!sq) ++nonsquare;
            scaled_c.push_back(b);
        }
    }

    BigInt lo_sum() const {
        BigInt s = 0;
        for (const BigInt& v : lo) s += v;
        return s;
    }

    void refine() {
        ++t;
        for (size_t i = 0; i < lo.size(); ++i) {
            scaled_c[i] <<= 2;
            lo[i] <<= 1;
            if (!is_square[i]) {
                BigInt cand = lo[i] + 1;
                if (cand * cand <= scaled_c[i]) lo[i] = cand;
            }
        }
        if (t > 4096) throw std::logic_error("sqrt-sum enclosure refinement did not terminate");
    }
};

bool mdp_exact_equal(const MdpExact& a, const MdpExact& b) {
    if (a.gamma != b.gamma || a.mu != b.mu) return false;
    if (a.cost != b.cost || a.trans != b.trans) return false;
    return true;
}

}  // namespace

MisResult max_independent_set(const Graph& g) {
    const int n = g.num_vertices();
    if (n > 40)
        throw std::invalid_argument("max_independent_set is budgeted to n <= 40 vertices");
    MisSearch search(g);
    search.best = std::max(0, greedy_independent_size(g) - 1);
    std::uint64_t all = n == 64 ? ~std::uint64_t(0) : (bit(n) - 1);
    search.search(all, 0);

    MisResult out;
    out.alpha = search.best;
    // Lexicographically smallest maximum set, built greedily with exact
    // feasibility checks.
    std::uint64_t cands = all;
    int need = out.alpha;
    for (int v = 0; v < n && need > 0; ++v) {
        if (!(cands & bit(v))) continue;
        if (search.feasible(cands & ~(search.nbr[v] | bit(v)), need - 1)) {
            out.witness.push_back(v);
            cands &= ~(search.nbr[v] | bit(v));
            --need;
        } else {
            cands &= ~bit(v);
        }
    }
    return out;
}

SqrtSumOptimum sqrtsum_optimum(const SqrtSumInstance& inst) {
    Rational eps = sqrtsum_epsilon(inst);
    const int n = static_cast<int>(inst.c.size());
    double epsd = eps.to_double();
    double root_sum = 0.0;
    for (long long ci : inst.c) root_sum += std::sqrt(static_cast<double>(ci));

    SqrtSumOptimum out;
    out.pi_star.pi.resize(n);
    double scale = (n + epsd) / root_sum;
    for (int i = 0; i < n; ++i)
        out.pi_star.pi[i] = (scale * std::sqrt(static_cast<double>(inst.c[i])) - 1.0) / epsd;
    out.j_star = root_sum * root_sum / (n * (n + epsd));
    // sum_i pi*_i = ((n+eps) * sum_i sqrt(c_i)/sum_j sqrt(c_j) - n)/eps; the
    // root ratio sums to exactly 1, leaving pure rational arithmetic.
    out.mass_exact = ((Rational(n) + eps) - Rational(n)) / eps;
    return out;
}

int compare_sqrt_sum(const std::vector<long long>& c, const BigInt& d) {
    RootEnclosures enc(c);
    if (enc.nonsquare == 0) {
        BigInt total = enc.lo_sum();
        if (total < d) return -1;
        if (total > d) return 1;
        return 0;
    }
    if (d < 0) return 1;  // the sum is nonnegative
    for (;;) {
        BigInt L = enc.lo_sum();
        BigInt U = L + enc.nonsquare;
        BigInt D = d << enc.t;
        if (U <= D) return -1;  // sum < U/2^t <= d
        if (L >= D) return 1;   // sum > L/2^t >= d
        enc.refine();
    }
}

int compare_sqrt_sum_squared(const std::vector<long long>& c, const Rational& q) {
    // (sum sqrt(c_i))^2 = sum c_i + 2 sum_{i<j} sqrt(c_i c_j): rational iff
    // every pairwise product is a perfect square.
    bool products_square = true;
    BigInt cross = 0;
    for (size_t i = 0; i < c.size() && products_square; ++i) {
        for (size_t j = i + 1; j < c.size(); ++j) {
            BigInt prod = BigInt(c[i]) * BigInt(c[j]);
            BigInt r = boost::multiprecision::sqrt(prod);
            if (r * r != prod) {
                products_square = false;
                break;
            }
            cross += r;
        }
    }
    if (products_square) {
        BigInt diag = 0;
        for (long long ci : c) diag += ci;
        Rational exact(diag + 2 * cross, 1);
        if (exact < q) return -1;
        if (exact > q) return 1;
        return 0;
    }

    if (q < Rational(0)) return 1;
    BigInt num = q.numerator(), den = q.denominator();
    RootEnclosures enc(c);
    for (;;) {
        BigInt L = enc.lo_sum();
        BigInt U = L + enc.nonsquare;
        // Compare (U/2^t)^2 and (L/2^t)^2 against num/den.
        BigInt scale = BigInt(1) << (2 * enc.t);
        if (U * U * den <= num * scale) return -1;
        if (L * L * den >= num * scale) return 1;
        enc.refine();
    }
}

bool decide_sqrtsum(const SqrtSumInstance& inst) {
    if (inst.c.empty()) throw std::invalid_argument("SQRT-SUM instance: empty c list");
    if (inst.d < 0) throw std::invalid_argument("SQRT-SUM instance: d must be nonnegative");
    return compare_sqrt_sum(inst.c, BigInt(inst.d)) <= 0;
}

TractableForm is_tractable_case(const Mdp& m) {
    require_valid(validate_mdp(m), "is_tractable_case");
    TractableForm form;

    form.symmetric_ok = true;
    for (const Matrix& P : m.trans) {
        if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            form.symmetric_ok = false;
            break;
        }
    }

    bool columns_identical = true;
    for (int a = 1; a < m.k && columns_identical; ++a)
        if ((m.cost.col(a) - m.cost.col(0)).cwiseAbs().maxCoeff() > 1e-12)
            columns_identical = false;

    if (columns_identical) {
        Vector c = m.cost.col(0);
        double kappa = -c.dot(m.mu) / m.mu.squaredNorm();
        double residual = (c + kappa * m.mu).cwiseAbs().maxCoeff();
        if (kappa > 0.0 && residual < 1e-10) {
            form.cost_ok = true;
            form.kappa = kappa;
        }
    }
    form.is_tractable = form.symmetric_ok && form.cost_ok;
    return form;
}

TractableSolution solve_tractable(const Mdp& m) {
    TractableForm form = is_tractable_case(m);
    if (!form.is_tractable)
        throw std::invalid_argument("solve_tractable: instance is not of the tractable form");
    TractableSolution sol;
    sol.a_star = 0;
    sol.value = evaluate_deterministic_blind(m, 0);
    for (int a = 1; a < m.k; ++a) {
        double v = evaluate_deterministic_blind(m, a);
        if (v < sol.value) {
            sol.a_star = a;
            sol.value = v;
        }
    }
    return sol;
}

bool psd_check(const Mdp& m, const BlindController& pi) {
    TractableForm form = is_tractable_case(m);
    if (!form.symmetric_ok)
        throw std::invalid_argument("psd_check: transition matrices are not symmetric");
    Matrix M = Matrix::Identity(m.n, m.n) - m.gamma * policy_transition(m, pi);
    Eigen::LLT<Matrix> llt(M);
    return llt.info() == Eigen::Success;
}

double matrix_fractional_value(const Mdp& m, const BlindController& pi) {
    Matrix M = Matrix::Identity(m.n, m.n) - m.gamma * policy_transition(m, pi);
    Eigen::PartialPivLU<Matrix> lu(M);
    return m.mu.dot(lu.solve(m.mu));
}

ConvexityReport convexity_probe(const Mdp& m, int trials, std::uint64_t seed) {
    TractableForm form = is_tractable_case(m);
    if (!form.is_tractable)
        throw std::invalid_argument("convexity_probe: instance is not of the tractable form");
    Rng rng(derive_seed(seed, 0x636f6e76));
    ConvexityReport rep;
    rep.trials = trials;
    for (int i = 0; i < trials; ++i) {
        BlindController p1{rng.dirichlet_uniform(m.k)};
        BlindController p2{rng.dirichlet_uniform(m.k)};
        BlindController mid{0.5 * (p1.pi + p2.pi)};
        double excess = matrix_fractional_value(m, mid) -
                        0.5 * (matrix_fractional_value(m, p1) + matrix_fractional_value(m, p2));
        rep.max_violation = std::max(rep.max_violation, excess);
        if (excess > 1e-10) ++rep.violations;
    }
    return rep;
}

namespace {

/// Rebuilds the graph of a stable-set bundle from its exact cost matrix
/// (gamma * cost - I must be a 0-1 cubic adjacency) and checks every other
/// structural property of the reduction. Returns nullopt with a note on any
/// mismatch.
std::optional<Graph> reconstruct_stableset_graph(const ReductionInstance& inst,
                                                 std::vector<std::string>& notes) {
    const auto& meta = std::get<StableSetMeta>(inst.meta);
    const Mdp& m = inst.mdp;
    if (!m.exact) {
        notes.push_back("bundle carries no exact data");
        return std::nullopt;
    }
    const MdpExact& ex = *m.exact;
    if (m.n != m.k) {
        notes.push_back("stable-set bundle must have k == n");
        return std::nullopt;
    }
    if (ex.gamma != meta.gamma) {
        notes.push_back("gamma differs between MDP and metadata");
        return std::nullopt;
    }
    Rational unif = Rational(1) / Rational(m.n);
    for (const Rational& mus : ex.mu)
        if (mus != unif) {
            notes.push_back("starting distribution is not uniform");
            return std::nullopt;
        }
    for (int a = 0; a < m.k; ++a)
        for (int sb = 0; sb < m.n; ++sb)
            for (int s = 0; s < m.n; ++s)
                if (ex.trans[a][sb][s] != (sb == a ? Rational(1) : Rational(0))) {
                    notes.push_back("transitions are not of the [sbar == a] form");
                    return std::nullopt;
                }

    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < m.n; ++u) {
        for (int v = 0; v < m.n; ++v) {
            Rational entry = meta.gamma * ex.cost[u][v] - (u == v ? Rational(1) : Rational(0));
            if (entry == Rational(1)) {
                if (u == v) {
                    notes.push_back("cost diagonal is inconsistent");
                    return std::nullopt;
                }
                if (u < v) edges.emplace_back(u, v);
            } else if (entry != Rational(0)) {
                notes.push_back("gamma * cost - I is not a 0-1 matrix");
                return std::nullopt;
            }
        }
    }
    for (int u = 0; u < m.n; ++u)
        for (int v = u + 1; v < m.n; ++v)
            if (ex.cost[u][v] != ex.cost[v][u]) {
                notes.push_back("cost matrix is not symmetric");
                return std::nullopt;
            }
    try {
        Graph g(m.n, std::move(edges));
        if (!g.is_cubic()) {
            notes.push_back("reconstructed graph is not cubic");
            return std::nullopt;
        }
        Rational expect = Rational(1) / Rational(meta.j) +
                          Rational(4) * (Rational(1) - meta.gamma) /
                              (Rational(m.n) * meta.gamma);
        if (inst.target != expect) {
            notes.push_back("target does not match reduction metadata (expected " +
                            expect.str() + ", got " + inst.target.str() + ")");
            return std::nullopt;
        }
        return g;
    } catch (const std::exception& e) {
        notes.push_back(std::string("graph reconstruction failed: ") + e.what());
        return std::nullopt;
    }
}

}  // namespace

VerificationReport verify_reduction(const ReductionInstance& inst,
                                    const OptimizeConfig& cfg, double tol) {
    VerificationReport rep;
    std::ostringstream id;

    if (inst.kind == ReductionKind::stable_set) {
        const auto& meta = std::get<StableSetMeta>(inst.meta);
        id << "stable_set n=" << inst.mdp.n << " j=" << meta.j
           << " gamma=" << meta.gamma.str();
        rep.instance_id = id.str();

        std::optional<Graph> g = reconstruct_stableset_graph(inst, rep.notes);
        if (!g) {
            rep.verdict = Verdict::inconsistent;
            return rep;
        }
        MisResult mis = max_independent_set(*g);
        double gd = meta.gamma.to_double();
        rep.oracle_value = 4.0 * (1.0 - gd) / (inst.mdp.n * gd) + 1.0 / mis.alpha;
        rep.decision_yes = meta.j <= mis.alpha;
        rep.notes.push_back("stability number alpha = " + std::to_string(mis.alpha));
    } else {
        const auto& meta = std::get<SqrtSumMeta>(inst.meta);
        id << "sqrt_sum n=" << meta.c.size() << " d=" << meta.d << " c=" << join_longs(meta.c);
        rep.instance_id = id.str();

        SqrtSumInstance raw{meta.c, meta.d};
        ReductionInstance expect;
        try {
            expect = sqrtsum_to_blind(raw);
        } catch (const std::exception& e) {
            rep.notes.push_back(std::string("metadata does not form a valid reduction: ") + e.what());
            rep.verdict = Verdict::inconsistent;
            return rep;
        }
        if (!inst.mdp.exact || !mdp_exact_equal(*inst.mdp.exact, *expect.mdp.exact) ||
            inst.target != expect.target || meta.epsilon != std::get<SqrtSumMeta>(expect.meta).epsilon ||
            meta.gamma != std::get<SqrtSumMeta>(expect.meta).gamma) {
            rep.notes.push_back("bundle does not match the reduction of its metadata");
            rep.verdict = Verdict::inconsistent;
            return rep;
        }
        SqrtSumOptimum opt = sqrtsum_optimum(raw);
        rep.oracle_value = opt.j_star;
        rep.decision_yes = decide_sqrtsum(raw);
        if (std::get<SqrtSumMeta>(inst.meta).epsilon > Rational(1000000)) {
            rep.ill_conditioned = true;
            rep.notes.push_back(
                "epsilon exceeds 1e6: occupancy solves are ill-conditioned, closed forms used");
        }
    }

    OptimizeResult best = optimize_blind(inst.mdp, cfg);
    rep.optimizer_value = best.value;
    rep.witness_pi = best.pi;
    rep.gap = std::abs(rep.oracle_value - rep.optimizer_value);
    if (rep.gap <= tol)
        rep.verdict = Verdict::match;
    else if (rep.optimizer_value < rep.oracle_value - tol)
        rep.verdict = Verdict::inconsistent;  // beat a proven global optimum
    else
        rep.verdict = Verdict::optimizer_suboptimal;
    return rep;
}

}  // namespace blindctl
