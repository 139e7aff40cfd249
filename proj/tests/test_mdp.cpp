#include "blindctl/mdp.hpp"
#include "blindctl/reductions.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>

using namespace blindctl;
namespace bt = blindctl::testing;

namespace {

Mdp one_state_mdp(double cost_value = 0.0, double gamma = 0.5) {
    Mdp m;
    m.n = 1;
    m.k = 1;
    m.gamma = gamma;
    m.mu = Vector::Constant(1, 1.0);
    m.cost = Matrix::Constant(1, 1, cost_value);
    m.trans = {Matrix::Constant(1, 1, 1.0)};
    return m;
}

}  // namespace

TEST_CASE("validate_mdp accepts the smallest legal MDP") {
    CHECK(validate_mdp(one_state_mdp()).ok);
}

TEST_CASE("validate_mdp reports a broken starting distribution") {
    Mdp m = one_state_mdp();
    m.mu[0] = 0.9;
    auto rep = validate_mdp(m);
    REQUIRE_FALSE(rep.ok);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].path == "mu");
    CHECK(rep.violations[0].message.find("0.9") != std::string::npos);
    CHECK(rep.violations[0].magnitude == doctest::Approx(0.1));
}

TEST_CASE("validate_mdp names the action and column of a bad transition") {
    Rng rng(7);
    Mdp m = bt::random_mdp(rng, 3, 2);
    m.trans[1](0, 2) += 0.2;  // column 3 of action 2 now sums to 1.2
    auto rep = validate_mdp(m);
    REQUIRE_FALSE(rep.ok);
    CHECK(rep.violations[0].path == "trans[2].col[3]");
    CHECK(rep.violations[0].message.find("action 2") != std::string::npos);
    CHECK(rep.violations[0].message.find("column 3") != std::string::npos);
    CHECK(rep.violations[0].magnitude == doctest::Approx(0.2));
}

TEST_CASE("validate_mdp reports every violation, not just the first") {
    Rng rng(8);
    Mdp m = bt::random_mdp(rng, 3, 2);
    m.mu[0] += 0.2;              // mu now sums to 1.2
    m.trans[0](1, 1) -= 0.1;     // column 2 of action 1 sums to 0.9
    m.gamma = -0.5;
    auto rep = validate_mdp(m);
    REQUIRE_FALSE(rep.ok);
    CHECK(rep.violations.size() >= 3);
    bool saw_mu = false, saw_trans = false, saw_gamma = false;
    for (const auto& v : rep.violations) {
        saw_mu |= v.path == "mu";
        saw_trans |= v.path.rfind("trans[1]", 0) == 0;
        saw_gamma |= v.path == "gamma";
    }
    CHECK(saw_mu);
    CHECK(saw_trans);
    CHECK(saw_gamma);
}

TEST_CASE("validate_mdp rejects gamma outside (0,1) and non-finite data") {
    Mdp m = one_state_mdp();
    m.gamma = 1.0;
    CHECK_FALSE(validate_mdp(m).ok);
    m = one_state_mdp();
    m.cost(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(validate_mdp(m).ok);
}

TEST_CASE("policy_transition: single action always returns that matrix") {
    Rng rng(1);
    Mdp m = bt::random_mdp(rng, 4, 1);
    Matrix T = policy_transition(m, {Vector::Constant(1, 1.0)});
    CHECK((T - m.trans[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("policy_transition: simplex vertex picks one action") {
    Rng rng(2);
    Mdp m = bt::random_mdp(rng, 4, 3);
    for (int a = 0; a < m.k; ++a) {
        Matrix T = policy_transition(m, vertex_controller(m.k, a));
        CHECK((T - m.trans[a]).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("policy_transition: even mixture of identity and swap is flat") {
    Mdp m = bt::two_state_tractable();
    Matrix T = policy_transition(m, uniform_controller(2));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(T(i, j) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("policy_transition rejects a controller of the wrong length") {
    Mdp m = bt::two_state_tractable();
    CHECK_THROWS_AS(policy_transition(m, uniform_controller(3)), std::invalid_argument);
}

TEST_CASE("occupancy: one state means occupancy one") {
    for (double gamma : {0.1, 0.5, 0.99}) {
        Mdp m = one_state_mdp(2.0, gamma);
        CHECK(occupancy(m, {Vector::Constant(1, 1.0)}).x[0] == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("occupancy on state-independent transitions reduces to (1-g)mu + g pi") {
    // In the stable-set reduction the next state equals the action, so the
    // occupancy has the closed form (1-gamma) mu + gamma pi.
    auto inst = stableset_to_blind(bt::k33(), 3, Rational(9) / Rational(10));
    Rng rng(11);
    for (int t = 0; t < 20; ++t) {
        BlindController pi = bt::random_controller(rng, 6);
        Vector x = occupancy(inst.mdp, pi).x;
        Vector expect = (1.0 - inst.mdp.gamma) * inst.mdp.mu + inst.mdp.gamma * pi.pi;
        CHECK((x - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("occupancy on the escape-chain construction matches its closed form") {
    // x_i = (1-gamma) mu_i + gamma (1-pi_i) x_i state by state.
    SqrtSumInstance ss{{4, 9}, 5};
    auto inst = sqrtsum_to_blind(ss);
    const Mdp& m = inst.mdp;
    Rng rng(12);
    for (int t = 0; t < 20; ++t) {
        BlindController pi = bt::random_controller(rng, 2);
        Vector x = occupancy(m, pi).x;
        for (int i = 0; i < 2; ++i) {
            double expect = (1.0 - m.gamma) / (2.0 * (1.0 - m.gamma * (1.0 - pi.pi[i])));
            CHECK(x[i] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("blind_cost: single state and action returns its cost for any gamma") {
    for (double gamma : {0.2, 0.9}) {
        Mdp m = one_state_mdp(3.25, gamma);
        CHECK(blind_cost(m, {Vector::Constant(1, 1.0)}) == doctest::Approx(3.25).epsilon(1e-14));
    }
}

TEST_CASE("blind_cost on the K4 instance at the uniform controller") {
    auto inst = stableset_to_blind(bt::k4(), 1, Rational(9) / Rational(10));
    double j = blind_cost(inst.mdp, uniform_controller(4));
    CHECK(j == doctest::Approx(1.0 / 9.0 + 1.0).epsilon(1e-12));
}

TEST_CASE("blind_cost attains 25/52 at the interior optimum of c=(4,9)") {
    auto inst = sqrtsum_to_blind({{4, 9}, 5});
    Vector pi(2);
    pi << 47.0 / 120.0, 73.0 / 120.0;
    CHECK(blind_cost(inst.mdp, {pi}) == doctest::Approx(25.0 / 52.0).epsilon(1e-12));
}

TEST_CASE("deterministic blind evaluation matches the vertex blind cost") {
    Mdp m = bt::two_state_tractable();
    // mu^T (I - gamma P_a)^{-1} mu is 1.36 and 1.12 for the two actions;
    // scaling by -kappa (1-gamma) = -1/2 gives the blind costs.
    CHECK(evaluate_deterministic_blind(m, 0) == doctest::Approx(-0.68).epsilon(1e-14));
    CHECK(evaluate_deterministic_blind(m, 1) == doctest::Approx(-0.56).epsilon(1e-14));
    for (int a = 0; a < 2; ++a)
        CHECK(std::abs(evaluate_deterministic_blind(m, a) -
                       blind_cost(m, vertex_controller(2, a))) < 1e-12);
}

TEST_CASE("deterministic blind evaluation is total for k=1 and rejects bad indices") {
    Mdp m = one_state_mdp(1.5);
    CHECK(evaluate_deterministic_blind(m, 0) ==
          doctest::Approx(blind_cost(m, {Vector::Constant(1, 1.0)})));
    CHECK_THROWS_AS(evaluate_deterministic_blind(m, 1), std::out_of_range);
    CHECK_THROWS_AS(evaluate_deterministic_blind(m, -1), std::out_of_range);
}

TEST_CASE("unrestricted_optimum picks the cheaper action in a one-state MDP") {
    Mdp m;
    m.n = 1;
    m.k = 2;
    m.gamma = 0.7;
    m.mu = Vector::Constant(1, 1.0);
    m.cost.resize(1, 2);
    m.cost << 3.0, 5.0;
    m.trans = {Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0)};
    CHECK(unrestricted_optimum(m) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("unrestricted_optimum with one action equals the deterministic evaluation") {
    Rng rng(21);
    for (int t = 0; t < 10; ++t) {
        Mdp m = bt::random_mdp(rng, 5, 1);
        CHECK(unrestricted_optimum(m) ==
              doctest::Approx(evaluate_deterministic_blind(m, 0)).epsilon(1e-10));
    }
}

TEST_CASE("policy iteration agrees with the value-iteration oracle") {
    auto inst = stableset_to_blind(bt::k4(), 1, Rational(9) / Rational(10));
    CHECK(unrestricted_optimum(inst.mdp) ==
          doctest::Approx(bt::value_iteration_optimum(inst.mdp)).epsilon(1e-8));
    Rng rng(22);
    for (int t = 0; t < 25; ++t) {
        Mdp m = bt::random_mdp(rng, 2 + rng.uniform_int(0, 4), 1 + rng.uniform_int(0, 3));
        double pi_value = unrestricted_optimum(m);
        double vi_value = bt::value_iteration_optimum(m);
        CHECK(std::abs(pi_value - vi_value) < 1e-8);
    }
}

TEST_CASE("occupancy normalization, residual, and dominance over random instances") {
    Rng rng(23);
    for (int t = 0; t < 200; ++t) {
        Mdp m = bt::random_mdp(rng, 1 + rng.uniform_int(0, 7), 1 + rng.uniform_int(0, 4));
        BlindController pi = bt::random_controller(rng, m.k);
        Vector x = occupancy(m, pi).x;
        CHECK(std::abs(x.sum() - 1.0) < 1e-9);
        CHECK(x.minCoeff() >= 0.0);
        Matrix T = policy_transition(m, pi);
        double residual = (x - (1.0 - m.gamma) * m.mu - m.gamma * (T * x)).cwiseAbs().maxCoeff();
        CHECK(residual < 1e-10);
        CHECK(blind_cost(m, pi) >= unrestricted_optimum(m) - 1e-8);
    }
}

TEST_CASE("vertex consistency between blind_cost and the chain evaluation") {
    Rng rng(24);
    for (int t = 0; t < 50; ++t) {
        Mdp m = bt::random_mdp(rng, 1 + rng.uniform_int(0, 5), 1 + rng.uniform_int(0, 4));
        for (int a = 0; a < m.k; ++a)
            CHECK(std::abs(blind_cost(m, vertex_controller(m.k, a)) -
                           evaluate_deterministic_blind(m, a)) < 1e-12);
    }
}

TEST_CASE("blind_cost is invariant under state relabeling") {
    Rng rng(25);
    for (int t = 0; t < 40; ++t) {
        int n = 2 + rng.uniform_int(0, 5);
        int k = 1 + rng.uniform_int(0, 3);
        Mdp m = bt::random_mdp(rng, n, k);
        BlindController pi = bt::random_controller(rng, k);
        auto perm = bt::random_permutation(rng, n);

        Mdp pm = m;
        for (int s = 0; s < n; ++s) {
            pm.mu[perm[s]] = m.mu[s];
            pm.cost.row(perm[s]) = m.cost.row(s);
        }
        for (int a = 0; a < k; ++a)
            for (int sb = 0; sb < n; ++sb)
                for (int s = 0; s < n; ++s)
                    pm.trans[a](perm[sb], perm[s]) = m.trans[a](sb, s);

        CHECK(std::abs(blind_cost(m, pi) - blind_cost(pm, pi)) < 1e-12);
    }
}

TEST_CASE("occupancy flags corrupted inputs through the pivot floor") {
    Mdp m = one_state_mdp();
    m.gamma = 1.0;  // invalid: makes I - gamma T exactly singular
    CHECK_THROWS_AS(occupancy(m, {Vector::Constant(1, 1.0)}), std::runtime_error);
}
