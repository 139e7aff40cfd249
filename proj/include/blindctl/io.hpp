#pragma once

#include "blindctl/graph.hpp"
#include "blindctl/mdp.hpp"
#include "blindctl/oracles.hpp"
#include "blindctl/reductions.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace blindctl {

/// Thrown on malformed input; always carries the 1-based source line.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/**
DIMACS-like graph file: header "p edge <n> <m>", then "e <u> <v>" lines with
1-based endpoints. Lines starting with '#' or 'c' are comments. Duplicate
edges collapse with a warning; self-loops are errors.
*/
Graph parse_graph(const std::string& text, std::vector<std::string>* warnings = nullptr);
std::string serialize_graph(const Graph& g);

/**
MDP file with sections gamma:, n:, k:, mu: (one line), cost: (n lines of k
numbers) and trans a=<i>: (n lines of n numbers, entry [sbar][s]) for
i = 1..k. Numbers are decimals or p/q rationals, parsed exactly; every
validation violation is a parse error. parse(serialize(m)) reproduces all
fields bit-exactly.
*/
Mdp parse_mdp(const std::string& text);
std::string serialize_mdp(const Mdp& m);

/// "c: <ints>" and "d: <int>" lines.
SqrtSumInstance parse_sqrtsum(const std::string& text);
std::string serialize_sqrtsum(const SqrtSumInstance& inst);

/// "pi: <numbers>"; the sum must already be within 1e-9 of 1 — nothing is
/// renormalized on load.
BlindController parse_controller(const std::string& text);
std::string serialize_controller(const BlindController& pi);

/// An MDP file followed by the trailer target:, kind:, meta: lines.
ReductionInstance parse_bundle(const std::string& text);
std::string serialize_bundle(const ReductionInstance& inst);

std::string serialize_report(const VerificationReport& report);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);
/// Fixed significant-digit form (printf %.<digits>g).
std::string format_double_sig(double v, int digits);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace blindctl
