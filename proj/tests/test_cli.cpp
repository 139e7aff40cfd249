#include "blindctl/io.hpp"
#include "blindctl/reductions.hpp"

#include "support/fixtures.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

using namespace blindctl;
namespace bt = blindctl::testing;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(BLINDCTL_BIN) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult res;
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) res.out.append(buf, got);
    int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

/// Fixture files shared by the CLI tests, created once per process.
const fs::path& fixture_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("blindctl_cli_test_" + std::to_string(getpid()));
        fs::create_directories(d);

        write_file((d / "k4.col").string(),
                   "p edge 4 6\ne 1 2\ne 1 3\ne 1 4\ne 2 3\ne 2 4\ne 3 4\n");
        write_file((d / "path3.col").string(), "p edge 3 2\ne 1 2\ne 2 3\n");
        write_file((d / "uniform4.txt").string(), "pi: 1/4 1/4 1/4 1/4\n");
        write_file((d / "uniform2.txt").string(), "pi: 0.5 0.5\n");
        write_file((d / "bad_controller.txt").string(), "pi: 0.5 0.6\n");
        write_file((d / "ss49.txt").string(), "c: 4 9\nd: 5\n");
        write_file((d / "ss2.txt").string(), "c: 2\nd: 1\n");
        write_file((d / "ss23.txt").string(), "c: 2 3\nd: 4\n");
        write_file((d / "trivial.txt").string(), "c: 1\nd: 1\n");
        write_file((d / "garbage.txt").string(), "this is not a valid file\n");

        write_file((d / "k4.bundle").string(),
                   serialize_bundle(stableset_to_blind(bt::k4(), 1, Rational(9, 10))));
        write_file((d / "k33_j3.bundle").string(),
                   serialize_bundle(stableset_to_blind(bt::k33(), 3, Rational(9, 10))));
        write_file((d / "petersen_j5.bundle").string(),
                   serialize_bundle(stableset_to_blind(bt::petersen(), 5, Rational(9, 10))));
        write_file((d / "ss49.bundle").string(),
                   serialize_bundle(sqrtsum_to_blind({{4, 9}, 5})));

        // Tampered bundle: the target no longer matches the metadata.
        auto tampered = stableset_to_blind(bt::k4(), 1, Rational(9, 10));
        tampered.target = Rational(1, 2);
        write_file((d / "tampered.bundle").string(), serialize_bundle(tampered));

        write_file((d / "twostate.mdp").string(), serialize_mdp(bt::two_state_tractable()));
        return d;
    }();
    return dir;
}

std::string fx(const std::string& name) { return (fixture_dir() / name).string(); }

}  // namespace

TEST_CASE("cli: evaluate prints the K4 cost to 15 significant digits") {
    auto res = run_cli("evaluate " + fx("k4.bundle") + " " + fx("uniform4.txt"));
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("cost: 1.11111111111111\n") == 0);
    CHECK(res.out.find("occupancy: 0.25 0.25 0.25 0.25\n") != std::string::npos);
    CHECK(res.out.find("residual:") != std::string::npos);
}

TEST_CASE("cli: evaluate exits 2 on controller/MDP mismatch and parse failures") {
    CHECK(run_cli("evaluate " + fx("k4.bundle") + " " + fx("uniform2.txt")).exit_code == 2);
    CHECK(run_cli("evaluate " + fx("garbage.txt") + " " + fx("uniform4.txt")).exit_code == 2);
    CHECK(run_cli("evaluate " + fx("k4.bundle") + " " + fx("bad_controller.txt")).exit_code == 2);
    CHECK(run_cli("evaluate /nonexistent/file " + fx("uniform4.txt")).exit_code == 2);
}

TEST_CASE("cli: optimize finds the sqrt-sum optimum") {
    auto res = run_cli("optimize " + fx("ss49.bundle") + " --restarts 8 --json");
    CHECK(res.exit_code == 0);
    auto j = nlohmann::json::parse(res.out);
    CHECK(std::abs(j["value"].get<double>() - 25.0 / 52.0) < 1e-8);
    CHECK(j["pi"].size() == 2);
}

TEST_CASE("cli: optimize accepts the projected-gradient method") {
    auto res = run_cli("optimize " + fx("ss49.bundle") +
                       " --method projected_gradient --restarts 4 --json");
    CHECK(res.exit_code == 0);
    auto j = nlohmann::json::parse(res.out);
    CHECK(j["method"] == "projected_gradient");
    CHECK(std::abs(j["value"].get<double>() - 25.0 / 52.0) < 1e-7);
    CHECK(run_cli("optimize " + fx("ss49.bundle") + " --method nonsense").exit_code == 64);
}

TEST_CASE("cli: usage errors exit 64") {
    CHECK(run_cli("optimize " + fx("ss49.bundle") + " --restarts 0").exit_code == 64);
    CHECK(run_cli("optimize " + fx("ss49.bundle") + " --no-such-flag").exit_code == 64);
    CHECK(run_cli("").exit_code == 64);
    CHECK(run_cli("frobnicate x").exit_code == 64);
}

TEST_CASE("cli: reduce-stableset emits the exact target") {
    auto out = fx("k4_out.bundle");
    auto res = run_cli("reduce-stableset " + fx("k4.col") + " --j 1 -o " + out);
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("target: 10/9\n") == 0);
    CHECK(parse_bundle(read_file(out)).target == Rational(10, 9));
}

TEST_CASE("cli: reduce-stableset rejects non-cubic graphs with exit 3") {
    CHECK(run_cli("reduce-stableset " + fx("path3.col") + " --j 1").exit_code == 3);
}

TEST_CASE("cli: reduce-sqrtsum emits exact target and gamma") {
    auto res = run_cli("reduce-sqrtsum " + fx("ss49.txt") + " --json -o " + fx("ss49_out.bundle"));
    CHECK(res.exit_code == 0);
    auto j = nlohmann::json::parse(res.out);
    CHECK(j["target"] == "25/52");
    CHECK(j["gamma"] == "24/25");
}

TEST_CASE("cli: reduce-sqrtsum routes trivial instances to the decider with exit 3") {
    auto res = run_cli("reduce-sqrtsum " + fx("trivial.txt"));
    CHECK(res.exit_code == 3);
}

TEST_CASE("cli: verify matches oracle on bundles and decides the target question") {
    auto res = run_cli("verify " + fx("k33_j3.bundle") + " --restarts 12 --seed 1");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("verdict: match") != std::string::npos);
    CHECK(res.out.find("decision: YES") != std::string::npos);
    CHECK(res.out.find("oracle: 0.407407407407407") != std::string::npos);

    auto no = run_cli("verify " + fx("petersen_j5.bundle") + " --restarts 12 --seed 1");
    CHECK(no.exit_code == 0);
    CHECK(no.out.find("decision: NO") != std::string::npos);
}

TEST_CASE("cli: verify exits 4 on tampered bundles") {
    auto res = run_cli("verify " + fx("tampered.bundle"));
    CHECK(res.exit_code == 4);
    CHECK(res.out.find("verdict: inconsistent") != std::string::npos);
}

TEST_CASE("cli: tractable solves the two-state instance") {
    auto res = run_cli("tractable " + fx("twostate.mdp"));
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("is_tractable: true") != std::string::npos);
    CHECK(res.out.find("a_star: 1") != std::string::npos);
    CHECK(res.out.find("value: -0.68") != std::string::npos);
    CHECK(res.out.find("convexity_probe: 0 violations in 100 trials") != std::string::npos);
}

TEST_CASE("cli: tractable explains non-tractable instances") {
    auto res = run_cli("tractable " + fx("k4.bundle"));
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("not tractable: transitions not symmetric") != std::string::npos);
}

TEST_CASE("cli: decide-sqrtsum exit codes are YES=0, NO=1") {
    auto yes = run_cli("decide-sqrtsum " + fx("ss49.txt"));
    CHECK(yes.exit_code == 0);
    CHECK(yes.out == "YES\n");
    auto no = run_cli("decide-sqrtsum " + fx("ss2.txt"));
    CHECK(no.exit_code == 1);
    CHECK(no.out == "NO\n");
    CHECK(run_cli("decide-sqrtsum " + fx("ss23.txt")).exit_code == 0);
}

TEST_CASE("cli: identical invocations are byte-identical") {
    std::string cmds[] = {
        "verify " + fx("k33_j3.bundle") + " --restarts 8 --seed 7 --json",
        "optimize " + fx("ss49.bundle") + " --restarts 6 --seed 3 --json",
        "evaluate " + fx("k4.bundle") + " " + fx("uniform4.txt") + " --json",
        "tractable " + fx("twostate.mdp") + " --json",
    };
    for (const auto& cmd : cmds) {
        auto a = run_cli(cmd);
        auto b = run_cli(cmd);
        CAPTURE(cmd);
        CHECK(a.exit_code == b.exit_code);
        CHECK(a.out == b.out);
        CHECK_FALSE(a.out.empty());
    }
}

TEST_CASE("cli: results do not depend on the thread budget") {
    std::string base = BLINDCTL_BIN + std::string(" verify ") + fx("k33_j3.bundle") +
                       " --restarts 8 --seed 11 --json 2>/dev/null";
    auto run_with = [&](const std::string& env) {
        FILE* pipe = popen((env + " " + base).c_str(), "r");
        REQUIRE(pipe != nullptr);
        std::string out;
        char buf[4096];
        size_t got;
        while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
        pclose(pipe);
        return out;
    };
    std::string serial = run_with("BLINDCTL_THREADS=1");
    std::string parallel = run_with("BLINDCTL_THREADS=4");
    std::string automatic = run_with("BLINDCTL_THREADS=0");
    CHECK(serial == parallel);
    CHECK(serial == automatic);
    CHECK_FALSE(serial.empty());
}

TEST_CASE("cli: every subcommand accepts --json and emits valid JSON") {
    std::string cmds[] = {
        "evaluate " + fx("k4.bundle") + " " + fx("uniform4.txt") + " --json",
        "optimize " + fx("ss49.bundle") + " --restarts 2 --json",
        "reduce-stableset " + fx("k4.col") + " --j 2 --json -o " + fx("tmp1.bundle"),
        "reduce-sqrtsum " + fx("ss49.txt") + " --json -o " + fx("tmp2.bundle"),
        "verify " + fx("k4.bundle") + " --json",
        "tractable " + fx("twostate.mdp") + " --json",
        "decide-sqrtsum " + fx("ss49.txt") + " --json",
    };
    for (const auto& cmd : cmds) {
        auto res = run_cli(cmd);
        CAPTURE(cmd);
        CHECK_NOTHROW(nlohmann::json::parse(res.out));
    }
}
