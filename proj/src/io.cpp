#include "blindctl/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace blindctl {

namespace {

struct Line {
    int number = 0;
    std::string text;
};

/// Splits into significant lines: comments ('#' to end of line) stripped,
/// blanks dropped, original line numbers kept.
std::vector<Line> significant_lines(const std::string& text) {
    std::vector<Line> lines;
    std::istringstream in(text);
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        size_t b = raw.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t e = raw.find_last_not_of(" \t\r");
        lines.push_back({number, raw.substr(b, e - b + 1)});
    }
    return lines;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

struct Token {
    double value = 0.0;
    Rational exact;
};

Token parse_number(const std::string& tok, int line) {
    auto exact = Rational::parse(tok);
    if (!exact) throw ParseError(line, "bad number '" + tok + "'");
    Token t;
    t.exact = *exact;
    if (tok.find('/') == std::string::npos) {
        // Plain decimals go through strtod so shortest-form doubles
        // round-trip bit-exactly.
        t.value = std::strtod(tok.c_str(), nullptr);
    } else {
        t.value = exact->to_double();
    }
    return t;
}

long long parse_integer(const std::string& tok, int line) {
    long long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw ParseError(line, "bad integer '" + tok + "'");
    return v;
}

/// Sequential reader over significant lines.
class Cursor {
public:
    explicit Cursor(const std::vector<Line>& lines) : lines_(lines) {}

    bool done() const { return pos_ >= lines_.size(); }
    const Line& peek() const { return lines_[pos_]; }
    const Line& take() { return lines_[pos_++]; }
    int last_line() const {
        return lines_.empty() ? 1 : lines_.back().number;
    }

    /// Takes a "key: rest" line; errors if the key does not match.
    std::pair<int, std::string> expect_key(const std::string& key) {
        if (done())
            throw ParseError(last_line(), "missing section '" + key + "'");
        const Line& l = take();
        if (l.text.rfind(key, 0) != 0)
            throw ParseError(l.number, "expected section '" + key + "', found '" + l.text + "'");
        return {l.number, l.text.substr(key.size())};
    }

private:
    const std::vector<Line>& lines_;
    size_t pos_ = 0;
};

std::vector<Token> expect_numbers(const std::string& content, size_t count, int line,
                                  const std::string& what) {
    auto toks = split_ws(content);
    if (toks.size() != count)
        throw ParseError(line, what + ": expected " + std::to_string(count) + " numbers, found " +
                                   std::to_string(toks.size()));
    std::vector<Token> out;
    out.reserve(count);
    for (const auto& t : toks) out.push_back(parse_number(t, line));
    return out;
}

int section_line_for(const std::string& path, int gamma_line, int mu_line, int cost_line,
                     const std::vector<int>& trans_lines) {
    if (path.rfind("gamma", 0) == 0) return gamma_line;
    if (path.rfind("mu", 0) == 0) return mu_line;
    if (path.rfind("cost", 0) == 0) return cost_line;
    if (path.rfind("trans[", 0) == 0) {
        int a = std::atoi(path.c_str() + 6);
        if (a >= 1 && a <= static_cast<int>(trans_lines.size())) return trans_lines[a - 1];
    }
    return gamma_line;
}

std::string meta_value(const std::string& rest, const std::string& key, int line) {
    auto toks = split_ws(rest);
    for (const auto& t : toks) {
        if (t.rfind(key + "=", 0) == 0) return t.substr(key.size() + 1);
    }
    throw ParseError(line, "meta: missing '" + key + "='");
}

Rational parse_rational_or_throw(const std::string& tok, int line) {
    auto r = Rational::parse(tok);
    if (!r) throw ParseError(line, "bad rational '" + tok + "'");
    return *r;
}

}  // namespace

Graph parse_graph(const std::string& text, std::vector<std::string>* warnings) {
    auto all = significant_lines(text);
    // DIMACS comment lines start with 'c'.
    std::vector<Line> lines;
    for (auto& l : all)
        if (!(l.text.size() >= 1 && l.text[0] == 'c' &&
              (l.text.size() == 1 || l.text[1] == ' ' || l.text[1] == '\t')))
            lines.push_back(std::move(l));
    if (lines.empty()) throw ParseError(1, "empty graph file");

    auto head = split_ws(lines[0].text);
    if (head.size() != 4 || head[0] != "p" || head[1] != "edge")
        throw ParseError(lines[0].number, "malformed header, expected 'p edge <n> <m>'");
    int n = static_cast<int>(parse_integer(head[2], lines[0].number));
    long long m = parse_integer(head[3], lines[0].number);
    if (n <= 0) throw ParseError(lines[0].number, "vertex count must be positive");

    std::vector<std::pair<int, int>> edges;
    std::set<std::pair<int, int>> seen;
    for (size_t i = 1; i < lines.size(); ++i) {
        auto toks = split_ws(lines[i].text);
        if (toks.size() != 3 || toks[0] != "e")
            throw ParseError(lines[i].number, "expected edge line 'e <u> <v>'");
        int u = static_cast<int>(parse_integer(toks[1], lines[i].number));
        int v = static_cast<int>(parse_integer(toks[2], lines[i].number));
        if (u < 1 || u > n || v < 1 || v > n)
            throw ParseError(lines[i].number, "vertex index out of range 1.." + std::to_string(n));
        if (u == v)
            throw ParseError(lines[i].number, "self-loop at vertex " + std::to_string(u));
        std::pair<int, int> e{std::min(u, v) - 1, std::max(u, v) - 1};
        if (!seen.insert(e).second) {
            if (warnings)
                warnings->push_back("line " + std::to_string(lines[i].number) +
                                    ": duplicate edge (" + std::to_string(u) + "," +
                                    std::to_string(v) + ") collapsed");
            continue;
        }
        edges.push_back(e);
    }
    if (static_cast<long long>(edges.size()) != m && warnings)
        warnings->push_back("header declares " + std::to_string(m) + " edges, file has " +
                            std::to_string(edges.size()));
    return Graph(n, std::move(edges));
}

std::string serialize_graph(const Graph& g) {
    std::ostringstream os;
    os << "p edge " << g.num_vertices() << " " << g.num_edges() << "\n";
    for (auto [u, v] : g.edges()) os << "e " << u + 1 << " " << v + 1 << "\n";
    return os.str();
}

Mdp parse_mdp(const std::string& text) {
    auto lines = significant_lines(text);
    Cursor cur(lines);

    auto [gamma_line, gamma_rest] = cur.expect_key("gamma:");
    Token gamma = expect_numbers(gamma_rest, 1, gamma_line, "gamma")[0];
    auto [n_line, n_rest] = cur.expect_key("n:");
    auto n_toks = split_ws(n_rest);
    if (n_toks.size() != 1) throw ParseError(n_line, "n: expected one integer");
    int n = static_cast<int>(parse_integer(n_toks[0], n_line));
    auto [k_line, k_rest] = cur.expect_key("k:");
    auto k_toks = split_ws(k_rest);
    if (k_toks.size() != 1) throw ParseError(k_line, "k: expected one integer");
    int k = static_cast<int>(parse_integer(k_toks[0], k_line));
    if (n <= 0) throw ParseError(n_line, "n must be positive");
    if (k <= 0) throw ParseError(k_line, "k must be positive");
    // Everything is dense; refuse sizes that could not have been intended.
    if (n > 4096) throw ParseError(n_line, "n exceeds the dense-format limit of 4096");
    if (k > 4096) throw ParseError(k_line, "k exceeds the dense-format limit of 4096");
    if (static_cast<long long>(n) * n * k > 50000000)
        throw ParseError(k_line, "n*n*k exceeds the dense-format limit of 5e7 entries");

    MdpExact ex;
    Mdp m;
    m.n = n;
    m.k = k;
    m.gamma = gamma.value;
    ex.gamma = gamma.exact;

    auto [mu_line, mu_rest] = cur.expect_key("mu:");
    auto mu_toks = expect_numbers(mu_rest, n, mu_line, "mu");
    m.mu.resize(n);
    for (int s = 0; s < n; ++s) {
        m.mu[s] = mu_toks[s].value;
        ex.mu.push_back(mu_toks[s].exact);
    }

    auto [cost_line, cost_rest] = cur.expect_key("cost:");
    if (!split_ws(cost_rest).empty())
        throw ParseError(cost_line, "cost: matrix rows start on the following lines");
    m.cost.resize(n, k);
    ex.cost.assign(n, {});
    for (int s = 0; s < n; ++s) {
        if (cur.done()) throw ParseError(cur.last_line(), "cost: missing row " + std::to_string(s + 1));
        const Line& l = cur.take();
        auto row = expect_numbers(l.text, k, l.number, "cost row " + std::to_string(s + 1));
        for (int a = 0; a < k; ++a) {
            m.cost(s, a) = row[a].value;
            ex.cost[s].push_back(row[a].exact);
        }
    }

    m.trans.assign(k, Matrix(n, n));
    ex.trans.assign(k, std::vector<std::vector<Rational>>(n));
    std::vector<int> trans_lines(k, cost_line);
    for (int a = 0; a < k; ++a) {
        std::string key = "trans a=" + std::to_string(a + 1) + ":";
        auto [t_line, t_rest] = cur.expect_key(key);
        trans_lines[a] = t_line;
        if (!split_ws(t_rest).empty())
            throw ParseError(t_line, "trans: matrix rows start on the following lines");
        for (int sb = 0; sb < n; ++sb) {
            if (cur.done())
                throw ParseError(cur.last_line(), key + " missing row " + std::to_string(sb + 1));
            const Line& l = cur.take();
            auto row = expect_numbers(l.text, n, l.number,
                                      key + " row " + std::to_string(sb + 1));
            ex.trans[a][sb].clear();
            for (int s = 0; s < n; ++s) {
                m.trans[a](sb, s) = row[s].value;
                ex.trans[a][sb].push_back(row[s].exact);
            }
        }
    }
    if (!cur.done())
        throw ParseError(cur.peek().number, "unexpected content after last transition matrix");

    m.exact = std::move(ex);
    ValidationReport rep = validate_mdp(m);
    if (!rep.ok) {
        const Violation& v = rep.violations.front();
        throw ParseError(section_line_for(v.path, gamma_line, mu_line, cost_line, trans_lines),
                         v.path + " " + v.message);
    }
    return m;
}

std::string serialize_mdp(const Mdp& m) {
    const bool ex = m.exact.has_value();
    std::ostringstream os;
    os << "gamma: " << (ex ? m.exact->gamma.str() : format_double(m.gamma)) << "\n";
    os << "n: " << m.n << "\n";
    os << "k: " << m.k << "\n";
    os << "mu:";
    for (int s = 0; s < m.n; ++s)
        os << " " << (ex ? m.exact->mu[s].str() : format_double(m.mu[s]));
    os << "\n";
    os << "cost:\n";
    for (int s = 0; s < m.n; ++s) {
        for (int a = 0; a < m.k; ++a) {
            if (a) os << " ";
            os << (ex ? m.exact->cost[s][a].str() : format_double(m.cost(s, a)));
        }
        os << "\n";
    }
    for (int a = 0; a < m.k; ++a) {
        os << "trans a=" << a + 1 << ":\n";
        for (int sb = 0; sb < m.n; ++sb) {
            for (int s = 0; s < m.n; ++s) {
                if (s) os << " ";
                os << (ex ? m.exact->trans[a][sb][s].str() : format_double(m.trans[a](sb, s)));
            }
            os << "\n";
        }
    }
    return os.str();
}

SqrtSumInstance parse_sqrtsum(const std::string& text) {
    auto lines = significant_lines(text);
    SqrtSumInstance inst;
    bool have_c = false, have_d = false;
    for (const Line& l : lines) {
        if (l.text.rfind("c:", 0) == 0) {
            auto toks = split_ws(l.text.substr(2));
            if (toks.empty()) throw ParseError(l.number, "c: empty list");
            for (const auto& t : toks) {
                long long v = parse_integer(t, l.number);
                if (v < 0) throw ParseError(l.number, "c: negative entry " + t);
                inst.c.push_back(v);
            }
            have_c = true;
        } else if (l.text.rfind("d:", 0) == 0) {
            auto toks = split_ws(l.text.substr(2));
            if (toks.size() != 1) throw ParseError(l.number, "d: expected one integer");
            inst.d = parse_integer(toks[0], l.number);
            if (inst.d < 0) throw ParseError(l.number, "d: must be nonnegative");
            have_d = true;
        } else {
            throw ParseError(l.number, "expected 'c:' or 'd:' line");
        }
    }
    int last = lines.empty() ? 1 : lines.back().number;
    if (!have_c) throw ParseError(last, "missing 'c:' line");
    if (!have_d) throw ParseError(last, "missing 'd:' line");
    return inst;
}

std::string serialize_sqrtsum(const SqrtSumInstance& inst) {
    std::ostringstream os;
    os << "c:";
    for (long long v : inst.c) os << " " << v;
    os << "\nd: " << inst.d << "\n";
    return os.str();
}

BlindController parse_controller(const std::string& text) {
    auto lines = significant_lines(text);
    if (lines.empty()) throw ParseError(1, "empty controller file");
    if (lines.size() > 1) throw ParseError(lines[1].number, "expected a single 'pi:' line");
    const Line& l = lines[0];
    if (l.text.rfind("pi:", 0) != 0) throw ParseError(l.number, "expected 'pi:' line");
    auto toks = split_ws(l.text.substr(3));
    if (toks.empty()) throw ParseError(l.number, "pi: empty list");
    Vector pi(toks.size());
    for (size_t i = 0; i < toks.size(); ++i) {
        Token t = parse_number(toks[i], l.number);
        if (t.value < 0.0)
            throw ParseError(l.number, "pi: negative entry " + toks[i]);
        pi[static_cast<int>(i)] = t.value;
    }
    double sum = pi.sum();
    if (std::abs(sum - 1.0) > kStochasticTol)
        throw ParseError(l.number, "pi: sums to " + format_double_sig(sum, 15) +
                                       " (expected 1; not renormalized)");
    return {std::move(pi)};
}

std::string serialize_controller(const BlindController& pi) {
    std::ostringstream os;
    os << "pi:";
    for (int i = 0; i < pi.pi.size(); ++i) os << " " << format_double(pi.pi[i]);
    os << "\n";
    return os.str();
}

ReductionInstance parse_bundle(const std::string& text) {
    // The trailer starts at the first 'target:' line; everything before is the MDP.
    std::istringstream in(text);
    std::string raw, mdp_part, trailer_part;
    bool in_trailer = false;
    int line_no = 0, target_line = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string stripped = raw;
        if (auto hash = stripped.find('#'); hash != std::string::npos) stripped.erase(hash);
        size_t b = stripped.find_first_not_of(" \t\r");
        if (!in_trailer && b != std::string::npos && stripped.compare(b, 7, "target:") == 0) {
            in_trailer = true;
            target_line = line_no;
        }
        (in_trailer ? trailer_part : mdp_part) += raw + "\n";
    }
    if (!in_trailer) throw ParseError(line_no == 0 ? 1 : line_no, "missing 'target:' trailer");

    ReductionInstance inst;
    inst.mdp = parse_mdp(mdp_part);

    auto lines = significant_lines(trailer_part);
    std::optional<Rational> target;
    std::optional<std::string> kind;
    std::optional<std::pair<int, std::string>> meta;
    for (Line& l : lines) l.number += target_line - 1;  // offset into the full file
    for (const Line& l : lines) {
        if (l.text.rfind("target:", 0) == 0) {
            auto toks = split_ws(l.text.substr(7));
            if (toks.size() != 1) throw ParseError(l.number, "target: expected one rational");
            target = parse_rational_or_throw(toks[0], l.number);
        } else if (l.text.rfind("kind:", 0) == 0) {
            auto toks = split_ws(l.text.substr(5));
            if (toks.size() != 1) throw ParseError(l.number, "kind: expected one word");
            kind = toks[0];
        } else if (l.text.rfind("meta:", 0) == 0) {
            meta = {l.number, l.text.substr(5)};
        } else {
            throw ParseError(l.number, "unexpected trailer line '" + l.text + "'");
        }
    }
    int last = lines.back().number;
    if (!target) throw ParseError(last, "missing 'target:' line");
    if (!kind) throw ParseError(last, "missing 'kind:' line");
    if (!meta) throw ParseError(last, "missing 'meta:' line");

    inst.target = *target;
    if (*kind == "stable_set") {
        inst.kind = ReductionKind::stable_set;
        StableSetMeta sm;
        sm.j = static_cast<int>(parse_integer(meta_value(meta->second, "j", meta->first), meta->first));
        sm.gamma = parse_rational_or_throw(meta_value(meta->second, "gamma", meta->first), meta->first);
        inst.meta = std::move(sm);
    } else if (*kind == "sqrt_sum") {
        inst.kind = ReductionKind::sqrt_sum;
        SqrtSumMeta sm;
        std::string clist = meta_value(meta->second, "c", meta->first);
        std::string item;
        std::istringstream cs(clist);
        while (std::getline(cs, item, ','))
            sm.c.push_back(parse_integer(item, meta->first));
        if (sm.c.empty()) throw ParseError(meta->first, "meta: empty c list");
        sm.d = parse_integer(meta_value(meta->second, "d", meta->first), meta->first);
        sm.epsilon = parse_rational_or_throw(meta_value(meta->second, "epsilon", meta->first), meta->first);
        sm.gamma = parse_rational_or_throw(meta_value(meta->second, "gamma", meta->first), meta->first);
        inst.meta = std::move(sm);
    } else {
        throw ParseError(last, "kind: expected 'stable_set' or 'sqrt_sum', got '" + *kind + "'");
    }
    return inst;
}

std::string serialize_bundle(const ReductionInstance& inst) {
    std::ostringstream os;
    os << serialize_mdp(inst.mdp);
    os << "target: " << inst.target.str() << "\n";
    if (inst.kind == ReductionKind::stable_set) {
        const auto& meta = std::get<StableSetMeta>(inst.meta);
        os << "kind: stable_set\n";
        os << "meta: j=" << meta.j << " gamma=" << meta.gamma.str() << "\n";
    } else {
        const auto& meta = std::get<SqrtSumMeta>(inst.meta);
        os << "kind: sqrt_sum\n";
        os << "meta: c=";
        for (size_t i = 0; i < meta.c.size(); ++i) {
            if (i) os << ",";
            os << meta.c[i];
        }
        os << " d=" << meta.d << " epsilon=" << meta.epsilon.str()
           << " gamma=" << meta.gamma.str() << "\n";
    }
    return os.str();
}

std::string serialize_report(const VerificationReport& report) {
    std::ostringstream os;
    os << "instance: " << report.instance_id << "\n";
    os << "oracle: " << format_double_sig(report.oracle_value, 15) << "\n";
    os << "optimizer: " << format_double_sig(report.optimizer_value, 15) << "\n";
    os << "witness_pi:";
    for (int i = 0; i < report.witness_pi.pi.size(); ++i)
        os << " " << format_double_sig(report.witness_pi.pi[i], 15) << "";
    os << "\n";
    os << "gap: " << format_double_sig(report.gap, 6) << "\n";
    os << "decision: " << (report.decision_yes ? "YES" : "NO") << "\n";
    const char* verdict = report.verdict == Verdict::match ? "match"
                          : report.verdict == Verdict::optimizer_suboptimal
                              ? "optimizer_suboptimal"
                              : "inconsistent";
    os << "verdict: " << verdict << "\n";
    if (report.ill_conditioned) os << "ill_conditioned: true\n";
    for (const auto& note : report.notes) os << "note: " << note << "\n";
    return os.str();
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_double_sig(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

}  // namespace blindctl
