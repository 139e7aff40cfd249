#include "blindctl/io.hpp"
#include "blindctl/mdp.hpp"
#include "blindctl/optimize.hpp"
#include "blindctl/oracles.hpp"
#include "blindctl/reductions.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <functional>
#include <iostream>
#include <string>

namespace {

using blindctl::format_double_sig;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitNo = 1;
constexpr int kExitInput = 2;
constexpr int kExitReduction = 3;
constexpr int kExitVerification = 4;
constexpr int kExitUsage = 64;

/// Accepts either a plain MDP file or a reduction bundle.
blindctl::Mdp load_mdp(const std::string& path) {
    std::string text = blindctl::read_file(path);
    if (text.find("\ntarget:") != std::string::npos || text.rfind("target:", 0) == 0)
        return blindctl::parse_bundle(text).mdp;
    return blindctl::parse_mdp(text);
}

std::string method_name(blindctl::Method m) {
    return m == blindctl::Method::frank_wolfe ? "frank_wolfe" : "projected_gradient";
}

struct OptimizeFlags {
    int restarts = 32;
    int max_iters = 5000;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    std::string method = "frank_wolfe";

    blindctl::OptimizeConfig config() const {
        blindctl::OptimizeConfig cfg;
        cfg.restarts = restarts;
        cfg.max_iters = max_iters;
        cfg.tol = tol;
        cfg.seed = seed;
        cfg.method = method == "projected_gradient" ? blindctl::Method::projected_gradient
                                                    : blindctl::Method::frank_wolfe;
        return cfg;
    }
};

int cmd_evaluate(const std::string& mdp_path, const std::string& pi_path, bool json) {
    blindctl::Mdp m = load_mdp(mdp_path);
    blindctl::BlindController pi = blindctl::parse_controller(blindctl::read_file(pi_path));
    blindctl::require_valid(blindctl::validate_controller(pi, m.k), "controller");

    blindctl::OccupancyVector occ = blindctl::occupancy(m, pi);
    double cost = occ.x.dot(m.cost * pi.pi);
    blindctl::Matrix T = blindctl::policy_transition(m, pi);
    double residual =
        (occ.x - (1.0 - m.gamma) * m.mu - m.gamma * (T * occ.x)).cwiseAbs().maxCoeff();

    if (json) {
        ordered_json j;
        j["cost"] = cost;
        j["occupancy"] = std::vector<double>(occ.x.data(), occ.x.data() + occ.x.size());
        j["residual"] = residual;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "cost: " << format_double_sig(cost, 15) << "\n";
        std::cout << "occupancy:";
        for (int s = 0; s < m.n; ++s) std::cout << " " << format_double_sig(occ.x[s], 15);
        std::cout << "\n";
        std::cout << "residual: " << format_double_sig(residual, 6) << "\n";
    }
    return kExitOk;
}

int cmd_optimize(const std::string& mdp_path, const OptimizeFlags& flags, bool json) {
    blindctl::Mdp m = load_mdp(mdp_path);
    blindctl::OptimizeResult res = blindctl::optimize_blind(m, flags.config());

    if (json) {
        ordered_json j;
        j["value"] = res.value;
        j["pi"] = std::vector<double>(res.pi.pi.data(), res.pi.pi.data() + res.pi.pi.size());
        j["converged"] = res.converged;
        j["iterations"] = res.iterations_used;
        j["restart"] = res.restart_index;
        j["method"] = method_name(flags.config().method);
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "value: " << format_double_sig(res.value, 15) << "\n";
        std::cout << "pi:";
        for (int a = 0; a < res.pi.pi.size(); ++a)
            std::cout << " " << format_double_sig(res.pi.pi[a], 15);
        std::cout << "\n";
        std::cout << "converged: " << (res.converged ? "true" : "false") << "\n";
        std::cout << "iterations: " << res.iterations_used << "\n";
        std::cout << "restart: " << res.restart_index << "\n";
    }
    return kExitOk;
}

int emit_bundle(const blindctl::ReductionInstance& inst, const std::string& out_path,
                bool json, const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::string bundle = blindctl::serialize_bundle(inst);
    std::string gamma = inst.mdp.exact ? inst.mdp.exact->gamma.str() : "";
    if (!out_path.empty()) blindctl::write_file(out_path, bundle);

    if (json) {
        ordered_json j;
        j["target"] = inst.target.str();
        j["gamma"] = gamma;
        j["n"] = inst.mdp.n;
        j["k"] = inst.mdp.k;
        if (!out_path.empty()) j["output"] = out_path;
        std::cout << j.dump() << "\n";
    } else if (!out_path.empty()) {
        std::cout << "target: " << inst.target.str() << "\n";
        std::cout << "gamma: " << gamma << "\n";
        std::cout << "written: " << out_path << "\n";
    } else {
        std::cout << bundle;
    }
    return kExitOk;
}

int cmd_reduce_stableset(const std::string& graph_path, int j, const std::string& gamma_text,
                         const std::string& out_path, bool json) {
    std::vector<std::string> warnings;
    blindctl::Graph g = blindctl::parse_graph(blindctl::read_file(graph_path), &warnings);
    auto gamma = blindctl::Rational::parse(gamma_text);
    if (!gamma) {
        std::cerr << "error: bad gamma '" << gamma_text << "'\n";
        return kExitUsage;
    }
    try {
        blindctl::ReductionInstance inst = blindctl::stableset_to_blind(g, j, *gamma);
        return emit_bundle(inst, out_path, json, warnings);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitReduction;
    }
}

int cmd_reduce_sqrtsum(const std::string& inst_path, const std::string& out_path, bool json) {
    blindctl::SqrtSumInstance raw = blindctl::parse_sqrtsum(blindctl::read_file(inst_path));
    try {
        blindctl::ReductionInstance inst = blindctl::sqrtsum_to_blind(raw);
        return emit_bundle(inst, out_path, json, {});
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << " (try `blindctl decide-sqrtsum`)\n";
        return kExitReduction;
    }
}

int cmd_verify(const std::string& bundle_path, const OptimizeFlags& flags, double tol,
               bool json) {
    blindctl::ReductionInstance inst = blindctl::parse_bundle(blindctl::read_file(bundle_path));
    blindctl::VerificationReport rep = blindctl::verify_reduction(inst, flags.config(), tol);

    if (json) {
        ordered_json j;
        j["instance"] = rep.instance_id;
        j["oracle"] = rep.oracle_value;
        j["optimizer"] = rep.optimizer_value;
        j["witness_pi"] = std::vector<double>(rep.witness_pi.pi.data(),
                                              rep.witness_pi.pi.data() + rep.witness_pi.pi.size());
        j["gap"] = rep.gap;
        j["decision"] = rep.decision_yes ? "YES" : "NO";
        j["verdict"] = rep.verdict == blindctl::Verdict::match ? "match"
                       : rep.verdict == blindctl::Verdict::optimizer_suboptimal
                           ? "optimizer_suboptimal"
                           : "inconsistent";
        j["ill_conditioned"] = rep.ill_conditioned;
        j["notes"] = rep.notes;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << blindctl::serialize_report(rep);
    }
    return rep.verdict == blindctl::Verdict::match ? kExitOk : kExitVerification;
}

int cmd_tractable(const std::string& mdp_path, std::uint64_t seed, bool json) {
    blindctl::Mdp m = load_mdp(mdp_path);
    blindctl::TractableForm form = blindctl::is_tractable_case(m);

    ordered_json j;
    j["symmetric_ok"] = form.symmetric_ok;
    j["cost_ok"] = form.cost_ok;
    j["is_tractable"] = form.is_tractable;

    if (!json) {
        std::cout << "symmetric_ok: " << (form.symmetric_ok ? "true" : "false") << "\n";
        std::cout << "cost_ok: " << (form.cost_ok ? "true" : "false") << "\n";
        std::cout << "is_tractable: " << (form.is_tractable ? "true" : "false") << "\n";
    }
    if (!form.is_tractable) {
        std::string reason = !form.symmetric_ok ? "transitions not symmetric"
                                                : "costs not proportional to -mu";
        if (json) {
            j["reason"] = reason;
            std::cout << j.dump() << "\n";
        } else {
            std::cout << "not tractable: " << reason << "\n";
        }
        return kExitOk;
    }

    blindctl::TractableSolution sol = blindctl::solve_tractable(m);
    blindctl::ConvexityReport probe = blindctl::convexity_probe(m, 100, seed);
    if (json) {
        j["kappa"] = form.kappa;
        j["a_star"] = sol.a_star + 1;
        j["value"] = sol.value;
        j["convexity_trials"] = probe.trials;
        j["convexity_violations"] = probe.violations;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "kappa: " << format_double_sig(form.kappa, 15) << "\n";
        std::cout << "a_star: " << sol.a_star + 1 << "\n";
        std::cout << "value: " << format_double_sig(sol.value, 15) << "\n";
        std::cout << "convexity_probe: " << probe.violations << " violations in " << probe.trials
                  << " trials\n";
    }
    return kExitOk;
}

int cmd_decide_sqrtsum(const std::string& inst_path, bool json) {
    blindctl::SqrtSumInstance raw = blindctl::parse_sqrtsum(blindctl::read_file(inst_path));
    bool yes = blindctl::decide_sqrtsum(raw);
    if (json) {
        ordered_json j;
        j["decision"] = yes ? "YES" : "NO";
        std::cout << j.dump() << "\n";
    } else {
        std::cout << (yes ? "YES" : "NO") << "\n";
    }
    return yes ? kExitOk : kExitNo;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"blindctl: stochastic blind controllers in discounted MDPs — evaluation,\n"
                 "local optimization, hardness-reduction generators with verification\n"
                 "oracles, and an exact solver for the symmetric tractable case."};
    app.require_subcommand(1);
    std::function<int()> run;

    // evaluate
    {
        auto* sub = app.add_subcommand("evaluate", "Evaluate a controller on an MDP");
        auto mdp = std::make_shared<std::string>();
        auto ctl = std::make_shared<std::string>();
        auto json = std::make_shared<bool>(false);
        sub->add_option("mdp-file", *mdp, "MDP or bundle file")->required();
        sub->add_option("controller-file", *ctl, "controller file ('pi: ...')")->required();
        sub->add_flag("--json", *json, "machine-readable output");
        sub->callback([=, &run]() { run = [=]() { return cmd_evaluate(*mdp, *ctl, *json); }; });
    }

    // optimize
    {
        auto* sub = app.add_subcommand("optimize", "Multistart local optimization of blind cost");
        auto mdp = std::make_shared<std::string>();
        auto flags = std::make_shared<OptimizeFlags>();
        auto json = std::make_shared<bool>(false);
        sub->add_option("mdp-file", *mdp, "MDP or bundle file")->required();
        sub->add_option("--restarts", flags->restarts, "number of restarts (default 32)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--max-iters", flags->max_iters, "iterations per restart (default 5000)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--tol", flags->tol, "stationarity tolerance (default 1e-9)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", flags->seed, "RNG seed (default 0)");
        sub->add_option("--method", flags->method, "frank_wolfe | projected_gradient")
            ->check(CLI::IsMember({"frank_wolfe", "projected_gradient"}));
        sub->add_flag("--json", *json, "machine-readable output");
        sub->callback([=, &run]() { run = [=]() { return cmd_optimize(*mdp, *flags, *json); }; });
    }

    // reduce-stableset
    {
        auto* sub = app.add_subcommand(
            "reduce-stableset", "Build the blind-controller MDP of a cubic-graph stable-set instance");
        auto graph = std::make_shared<std::string>();
        auto j = std::make_shared<int>(0);
        auto gamma = std::make_shared<std::string>("9/10");
        auto out = std::make_shared<std::string>();
        auto json = std::make_shared<bool>(false);
        sub->add_option("graph-file", *graph, "DIMACS-like graph file")->required();
        sub->add_option("--j", *j, "independent-set size to test")->required()
            ->check(CLI::PositiveNumber);
        sub->add_option("--gamma", *gamma, "discount factor as a rational (default 9/10)");
        sub->add_option("-o,--output", *out, "bundle output path (default: stdout)");
        sub->add_flag("--json", *json, "machine-readable output");
        sub->callback([=, &run]() {
            run = [=]() { return cmd_reduce_stableset(*graph, *j, *gamma, *out, *json); };
        });
    }

    // reduce-sqrtsum
    {
        auto* sub = app.add_subcommand("reduce-sqrtsum",
                                       "Build the blind-controller MDP of a SQRT-SUM instance");
        auto inst = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto json = std::make_shared<bool>(false);
        sub->add_option("instance-file", *inst, "file with 'c:' and 'd:' lines")->required();
        sub->add_option("-o,--output", *out, "bundle output path (default: stdout)");
        sub->add_flag("--json", *json, "machine-readable output");
        sub->callback([=, &run]() { run = [=]() { return cmd_reduce_sqrtsum(*inst, *out, *json); }; });
    }

    // verify
    {
        auto* sub = app.add_subcommand(
            "verify", "Check a reduction bundle: exact oracle vs local optimizer");
        auto bundle = std::make_shared<std::string>();
        auto flags = std::make_shared<OptimizeFlags>();
        auto tol = std::make_shared<double>(1e-6);
        auto json = std::make_shared<bool>(false);
        sub->add_option("bundle-file", *bundle, "reduction bundle")->required();
        sub->add_option("--restarts", flags->restarts, "optimizer restarts (default 32)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", flags->seed, "RNG seed (default 0)");
        sub->add_option("--tol", *tol, "match tolerance (default 1e-6)")
            ->check(CLI::PositiveNumber);
        sub->add_flag("--json", *json, "machine-readable output");
        sub->callback([=, &run]() {
            run = [=]() { return cmd_verify(*bundle, *flags, *tol, *json); };
        });
    }

    // tractable
    {
        auto* sub = app.add_subcommand(
            "tractable", "Detect the symmetric tractable case and solve it exactly");
        auto mdp = std::make_shared<std::string>();
        auto seed = std::make_shared<std::uint64_t>(0);
        auto json = std::make_shared<bool>(false);
        sub->add_option("mdp-file", *mdp, "MDP or bundle file")->required();
        sub->add_option("--seed", *seed, "RNG seed for the convexity probe (default 0)");
        sub->add_flag("--json", *json, "machine-readable output");
        sub->callback([=, &run]() { run = [=]() { return cmd_tractable(*mdp, *seed, *json); }; });
    }

    // decide-sqrtsum
    {
        auto* sub = app.add_subcommand("decide-sqrtsum",
                                       "Exactly decide whether sum(sqrt(c_i)) <= d");
        auto inst = std::make_shared<std::string>();
        auto json = std::make_shared<bool>(false);
        sub->add_option("instance-file", *inst, "file with 'c:' and 'd:' lines")->required();
        sub->add_flag("--json", *json, "machine-readable output");
        sub->callback([=, &run]() { run = [=]() { return cmd_decide_sqrtsum(*inst, *json); }; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        return run();
    } catch (const blindctl::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}
