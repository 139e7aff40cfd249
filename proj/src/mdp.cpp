#include "blindctl/mdp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace blindctl {

namespace {

bool finite(const Matrix& m) { return m.allFinite(); }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

/// LU solve of (I - gamma T) x = b with an explicit pivot floor.
Vector solve_discounted(const Matrix& T, double gamma, const Vector& b) {
    const auto n = T.rows();
    Matrix M = Matrix::Identity(n, n) - gamma * T;
    Eigen::PartialPivLU<Matrix> lu(M);
    if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() < 1e-14)
        throw std::runtime_error("occupancy solve: pivot below 1e-14, input is corrupted");
    return lu.solve(b);
}

}  // namespace

Mdp realize(MdpExact exact) {
    Mdp m;
    m.n = static_cast<int>(exact.mu.size());
    m.k = static_cast<int>(exact.trans.size());
    m.gamma = exact.gamma.to_double();
    m.mu.resize(m.n);
    for (int s = 0; s < m.n; ++s) m.mu[s] = exact.mu[s].to_double();
    m.cost.resize(m.n, m.k);
    for (int s = 0; s < m.n; ++s)
        for (int a = 0; a < m.k; ++a) m.cost(s, a) = exact.cost[s][a].to_double();
    m.trans.resize(m.k);
    for (int a = 0; a < m.k; ++a) {
        m.trans[a].resize(m.n, m.n);
        for (int sb = 0; sb < m.n; ++sb)
            for (int s = 0; s < m.n; ++s) m.trans[a](sb, s) = exact.trans[a][sb][s].to_double();
    }
    m.exact = std::move(exact);
    return m;
}

ValidationReport validate_mdp(const Mdp& m, double tol) {
    ValidationReport rep;
    auto add = [&rep](std::string path, std::string msg, double mag) {
        rep.violations.push_back({std::move(path), std::move(msg), mag});
    };

    if (m.n <= 0) add("n", "must be positive", static_cast<double>(-m.n));
    if (m.k <= 0) add("k", "must be positive", static_cast<double>(-m.k));
    if (!(m.gamma > 0.0 && m.gamma < 1.0) || !std::isfinite(m.gamma))
        add("gamma", "must lie strictly in (0,1), got " + fmt(m.gamma), std::abs(m.gamma - 0.5));

    if (m.mu.size() != m.n) {
        add("mu", "length mismatch", std::abs(double(m.mu.size()) - m.n));
    } else if (!m.mu.allFinite()) {
        add("mu", "contains NaN/Inf", 0.0);
    } else {
        if (m.mu.minCoeff() < -tol)
            add("mu", "has negative entries", -m.mu.minCoeff());
        double s = m.mu.sum();
        if (std::abs(s - 1.0) > tol)
            add("mu", "sums to " + fmt(s) + " (expected 1)", std::abs(s - 1.0));
    }

    if (m.cost.rows() != m.n || m.cost.cols() != m.k)
        add("cost", "shape mismatch", 0.0);
    else if (!finite(m.cost))
        add("cost", "contains NaN/Inf", 0.0);

    if (static_cast<int>(m.trans.size()) != m.k) {
        add("trans", "expected one matrix per action", 0.0);
    } else {
        for (int a = 0; a < m.k; ++a) {
            const Matrix& T = m.trans[a];
            std::string base = "trans[" + std::to_string(a + 1) + "]";
            if (T.rows() != m.n || T.cols() != m.n) {
                add(base, "shape mismatch", 0.0);
                continue;
            }
            if (!finite(T)) {
                add(base, "contains NaN/Inf", 0.0);
                continue;
            }
            for (int s = 0; s < m.n; ++s) {
                double cmin = T.col(s).minCoeff();
                if (cmin < -tol)
                    add(base + ".col[" + std::to_string(s + 1) + "]",
                        "has negative entries", -cmin);
                double csum = T.col(s).sum();
                if (std::abs(csum - 1.0) > tol)
                    add(base + ".col[" + std::to_string(s + 1) + "]",
                        "column sums to " + fmt(csum) + " (action " + std::to_string(a + 1) +
                            ", column " + std::to_string(s + 1) + ")",
                        std::abs(csum - 1.0));
            }
        }
    }

    rep.ok = rep.violations.empty();
    return rep;
}

ValidationReport validate_controller(const BlindController& pi, int k, double tol) {
    ValidationReport rep;
    auto add = [&rep](std::string msg, double mag) {
        rep.violations.push_back({"pi", std::move(msg), mag});
    };
    if (pi.pi.size() != k) {
        add("length " + std::to_string(pi.pi.size()) + " does not match k=" + std::to_string(k),
            std::abs(double(pi.pi.size()) - k));
    } else if (!pi.pi.allFinite()) {
        add("contains NaN/Inf", 0.0);
    } else {
        if (pi.pi.minCoeff() < -tol) add("has negative entries", -pi.pi.minCoeff());
        double s = pi.pi.sum();
        if (std::abs(s - 1.0) > tol) add("sums to " + fmt(s) + " (expected 1)", std::abs(s - 1.0));
    }
    rep.ok = rep.violations.empty();
    return rep;
}

void require_valid(const ValidationReport& report, const std::string& what) {
    if (report.ok) return;
    const Violation& v = report.violations.front();
    throw std::invalid_argument(what + ": " + v.path + " " + v.message);
}

Matrix policy_transition(const Mdp& m, const BlindController& pi) {
    if (pi.pi.size() != m.k)
        throw std::invalid_argument("policy_transition: controller length does not match k");
    Matrix T = Matrix::Zero(m.n, m.n);
    for (int a = 0; a < m.k; ++a) T += pi.pi[a] * m.trans[a];
    return T;
}

OccupancyVector occupancy(const Mdp& m, const BlindController& pi) {
    Matrix T = policy_transition(m, pi);
    Vector x = solve_discounted(T, m.gamma, (1.0 - m.gamma) * m.mu);
    // Exact solutions are nonnegative; clamp sub-1e-12 rounding noise only.
    for (int s = 0; s < m.n; ++s) {
        if (x[s] < 0.0) {
            if (x[s] < -1e-12)
                throw std::runtime_error("occupancy solve: negative occupancy, input is corrupted");
            x[s] = 0.0;
        }
    }
    return {std::move(x)};
}

double blind_cost(const Mdp& m, const BlindController& pi) {
    OccupancyVector occ = occupancy(m, pi);
    return occ.x.dot(m.cost * pi.pi);
}

double evaluate_deterministic_blind(const Mdp& m, int a) {
    if (a < 0 || a >= m.k)
        throw std::out_of_range("evaluate_deterministic_blind: action index out of range");
    Vector x = solve_discounted(m.trans[a], m.gamma, (1.0 - m.gamma) * m.mu);
    return x.dot(m.cost.col(a));
}

double unrestricted_optimum(const Mdp& m) {
    // Howard policy iteration with lowest-index tie-breaking; terminates in a
    // finite number of sweeps since each policy is evaluated exactly.
    std::vector<int> policy(m.n, 0);
    Vector V = Vector::Zero(m.n);
    const int max_sweeps = 64 * m.n * m.k + 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        // Evaluate: V(s) = c(s, a_s) + gamma sum_sbar p(sbar|s,a_s) V(sbar).
        Matrix P(m.n, m.n);
        Vector c(m.n);
        for (int s = 0; s < m.n; ++s) {
            P.row(s) = m.trans[policy[s]].col(s).transpose();
            c[s] = m.cost(s, policy[s]);
        }
        Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(m.n, m.n) - m.gamma * P);
        if (lu.matrixLU().diagonal().cwiseAbs().minCoeff() < 1e-14)
            throw std::runtime_error("policy evaluation: pivot below 1e-14");
        V = lu.solve(c);

        // Improve. Switching demands strictly better Q beyond rounding noise,
        // otherwise evaluation jitter could make two policies trade places
        // forever.
        bool changed = false;
        for (int s = 0; s < m.n; ++s) {
            int best = policy[s];
            double bestq = m.cost(s, best) + m.gamma * m.trans[best].col(s).dot(V);
            for (int a = 0; a < m.k; ++a) {
                double q = m.cost(s, a) + m.gamma * m.trans[a].col(s).dot(V);
                if (q < bestq - 1e-12 * (1.0 + std::abs(bestq))) {
                    best = a;
                    bestq = q;
                }
            }
            if (best != policy[s]) {
                policy[s] = best;
                changed = true;
            }
        }
        if (!changed) return (1.0 - m.gamma) * m.mu.dot(V);
    }
    throw std::runtime_error("policy iteration did not terminate");
}

BlindController uniform_controller(int k) {
    return {Vector::Constant(k, 1.0 / k)};
}

BlindController vertex_controller(int k, int a) {
    Vector pi = Vector::Zero(k);
    pi[a] = 1.0;
    return {std::move(pi)};
}

}  // namespace blindctl
