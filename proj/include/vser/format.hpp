#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vser/errors.hpp"
#include "vser/model.hpp"

// Line-oriented game text (.dpg). Grammar in docs/format.md. Shape:
//
//   [game]            name/agents/horizon/discount/fully_observed key-values
//   [states]          symbols, whitespace separated
//   [actions K]       per-agent action symbols
//   [observations K]  per-agent observation symbols (absent when fully observed)
//   [start]           <state> <p/q> per line
//   [transition]      <s> <a0> .. <am-1> -> <s'> <p/q> [<s'> <p/q> ...]
//   [observe]         <s'> <a0> .. -> <o0> .. <om-1> <p/q> [...]
//   [reward]          <s> <a0> .. -> <s'> <p/q>
//
// '*' is a wildcard in key positions of transition/observe/reward rows;
// expansion is first-match-wins in document order. '#' starts a comment.

namespace vser {

namespace detail {

struct Tok {
    std::string text;
    int line;
    int col;
};

inline std::vector<std::vector<Tok>> lex(const std::string& text) {
    std::vector<std::vector<Tok>> lines;
    int line_no = 1;
    std::size_t i = 0;
    while (i <= text.size()) {
        std::size_t eol = text.find('\n', i);
        std::string_view line(text.data() + i, (eol == std::string::npos ? text.size() : eol) - i);
        std::vector<Tok> toks;
        int col = 1;
        std::size_t k = 0;
        while (k < line.size()) {
            if (line[k] == ' ' || line[k] == '\t' || line[k] == '\r') {
                k++;
                col++;
                continue;
            }
            if (line[k] == '#') break;
            std::size_t start = k;
            int start_col = col;
            while (k < line.size() && line[k] != ' ' && line[k] != '\t' && line[k] != '\r' &&
                   line[k] != '#') {
                k++;
                col++;
            }
            toks.push_back(Tok{std::string(line.substr(start, k - start)), line_no, start_col});
        }
        if (!toks.empty()) lines.push_back(std::move(toks));
        if (eol == std::string::npos) break;
        i = eol + 1;
        line_no++;
    }
    return lines;
}

}  // namespace detail

class GameParser {
public:
    explicit GameParser(std::string file) : file_(std::move(file)) {}

    DecPomdp parse(const std::string& text) {
        split_sections(detail::lex(text));
        check_section_order();

        const Section* game = find_section("game", -1);
        if (!game) throw ParseError(file_, 1, 1, "missing [game] section");
        parse_game_header(*game);

        const Section* st = require_section("states", -1);
        for (auto& row : st->rows)
            for (auto& tok : row) declare(states_, tok, "state");
        g_.states = names_of(states_);

        g_.actions.resize(g_.agents);
        g_.observations.resize(g_.agents);
        actions_.resize(g_.agents);
        obsnames_.resize(g_.agents);
        for (int i = 0; i < g_.agents; i++) {
            const Section* sec = require_section("actions", i);
            for (auto& row : sec->rows)
                for (auto& tok : row) declare(actions_[i], tok, "action");
            g_.actions[i] = names_of(actions_[i]);
        }
        for (int i = 0; i < g_.agents; i++) {
            const Section* sec = find_section("observations", i);
            if (g_.fully_observed) {
                if (sec)
                    throw ParseError(file_, sec->line, sec->col,
                                     "fully observed games declare no observation sections");
                continue;
            }
            if (!sec)
                throw ParseError(file_, 1, 1, "missing [observations " + std::to_string(i) + "]");
            for (auto& row : sec->rows)
                for (auto& tok : row) declare(obsnames_[i], tok, "observation");
            g_.observations[i] = names_of(obsnames_[i]);
        }

        parse_start(*require_section("start", -1));
        parse_transition(*require_section("transition", -1));

        const Section* ob = find_section("observe", -1);
        if (g_.fully_observed) {
            if (ob)
                throw ParseError(file_, ob->line, ob->col,
                                 "fully observed games declare no [observe] section");
            g_.install_full_observability();
        } else {
            if (!ob) throw ParseError(file_, 1, 1, "missing [observe] section");
            parse_observe(*ob);
        }

        if (const Section* rw = find_section("reward", -1)) parse_reward(*rw);

        try {
            g_.validate();
        } catch (const ModelError& e) {
            throw ParseError(file_, 1, 1, e.what());
        }
        return std::move(g_);
    }

private:
    using SymTab = std::unordered_map<std::string, int>;

    struct Section {
        std::string name;
        int index = -1;  // agent index for actions/observations
        int line = 0, col = 0;
        std::vector<std::vector<detail::Tok>> rows;
    };

    [[noreturn]] void fail(const detail::Tok& at, const std::string& msg) const {
        throw ParseError(file_, at.line, at.col, msg);
    }

    void split_sections(std::vector<std::vector<detail::Tok>> lines) {
        for (auto& toks : lines) {
            const std::string& head = toks[0].text;
            if (head.front() == '[') {
                Section sec;
                sec.line = toks[0].line;
                sec.col = toks[0].col;
                if (toks.size() == 1 && head.size() >= 3 && head.back() == ']') {
                    sec.name = head.substr(1, head.size() - 2);
                } else if (toks.size() == 2 && toks[1].text.size() >= 2 && toks[1].text.back() == ']') {
                    sec.name = head.substr(1);
                    std::string idx = toks[1].text.substr(0, toks[1].text.size() - 1);
                    sec.index = parse_int(idx, toks[1]);
                } else {
                    fail(toks[0], "malformed section header");
                }
                static const std::unordered_set<std::string> known = {
                    "game", "states", "actions", "observations", "start",
                    "transition", "observe", "reward"};
                if (!known.count(sec.name)) fail(toks[0], "unknown section [" + sec.name + "]");
                bool wants_index = sec.name == "actions" || sec.name == "observations";
                if (wants_index != (sec.index >= 0))
                    fail(toks[0], wants_index ? "section needs an agent index"
                                              : "section takes no agent index");
                sections_.push_back(std::move(sec));
            } else {
                if (sections_.empty()) fail(toks[0], "content before any section header");
                sections_.back().rows.push_back(std::move(toks));
            }
        }
        if (sections_.empty()) throw ParseError(file_, 1, 1, "empty document");
    }

    // Sections must appear in declaration-before-use order; duplicates are
    // rejected. Canonical order: game, states, actions*, observations*,
    // start, transition, observe, reward.
    void check_section_order() const {
        auto rank = [](const Section& s) {
            if (s.name == "game") return 0;
            if (s.name == "states") return 1;
            if (s.name == "actions") return 2;
            if (s.name == "observations") return 3;
            if (s.name == "start") return 4;
            if (s.name == "transition") return 5;
            if (s.name == "observe") return 6;
            return 7;
        };
        std::unordered_set<std::string> seen;
        int prev_rank = -1;
        for (const auto& sec : sections_) {
            std::string key = sec.name + (sec.index >= 0 ? " " + std::to_string(sec.index) : "");
            if (!seen.insert(key).second)
                throw ParseError(file_, sec.line, sec.col, "duplicate section [" + key + "]");
            int r = rank(sec);
            if (r < prev_rank)
                throw ParseError(file_, sec.line, sec.col,
                                 "section [" + sec.name +
                                     "] out of order (symbols must be declared before use)");
            prev_rank = r;
        }
    }

    const Section* find_section(const std::string& name, int index) const {
        for (const auto& sec : sections_)
            if (sec.name == name && sec.index == index) return &sec;
        return nullptr;
    }
    const Section* require_section(const std::string& name, int index) const {
        const Section* sec = find_section(name, index);
        if (!sec)
            throw ParseError(file_, 1, 1,
                             "missing [" + name + (index >= 0 ? " " + std::to_string(index) : "") +
                                 "] section");
        return sec;
    }

    int parse_int(const std::string& s, const detail::Tok& at) const {
        if (s.empty()) fail(at, "expected an integer");
        long v = 0;
        for (char c : s) {
            if (c < '0' || c > '9') fail(at, "expected an unsigned integer, got '" + s + "'");
            v = v * 10 + (c - '0');
            if (v > 1'000'000'000) fail(at, "integer out of range");
        }
        return static_cast<int>(v);
    }

    Rat parse_rat(const detail::Tok& at) const {
        try {
            return Rat::parse(at.text);
        } catch (const std::exception&) {
            fail(at, "expected a rational like 3/4, got '" + at.text + "'");
        }
    }

    void declare(SymTab& tab, const detail::Tok& tok, const char* kind) {
        if (tok.text == "*" || tok.text == "->" || tok.text.front() == '[')
            fail(tok, std::string("'") + tok.text + "' cannot be used as a " + kind + " name");
        if (!tab.emplace(tok.text, static_cast<int>(tab.size())).second)
            fail(tok, std::string("duplicate ") + kind + " '" + tok.text + "'");
    }

    static std::vector<std::string> names_of(const SymTab& tab) {
        std::vector<std::string> out(tab.size());
        for (auto& [name, idx] : tab) out[idx] = name;
        return out;
    }

    int resolve(const SymTab& tab, const detail::Tok& tok, const char* kind) const {
        auto it = tab.find(tok.text);
        if (it == tab.end()) fail(tok, std::string("unknown ") + kind + " '" + tok.text + "'");
        return it->second;
    }

    void parse_game_header(const Section& sec) {
        std::unordered_set<std::string> have;
        for (auto& row : sec.rows) {
            if (row.size() != 2) fail(row[0], "[game] entries are 'key value' pairs");
            const std::string& key = row[0].text;
            if (!have.insert(key).second) fail(row[0], "duplicate [game] key '" + key + "'");
            if (key == "name") {
                g_.name = row[1].text;
            } else if (key == "agents") {
                g_.agents = parse_int(row[1].text, row[1]);
                if (g_.agents < 1 || g_.agents > 16) fail(row[1], "agent count out of range");
            } else if (key == "horizon") {
                g_.horizon = parse_int(row[1].text, row[1]);
            } else if (key == "discount") {
                g_.discount = parse_rat(row[1]);
            } else if (key == "fully_observed") {
                if (row[1].text == "true")
                    g_.fully_observed = true;
                else if (row[1].text == "false")
                    g_.fully_observed = false;
                else
                    fail(row[1], "fully_observed must be true or false");
            } else {
                fail(row[0], "unknown [game] key '" + key + "'");
            }
        }
        for (const char* req : {"name", "agents", "horizon", "discount", "fully_observed"})
            if (!have.count(req))
                throw ParseError(file_, sec.line, sec.col,
                                 std::string("[game] is missing '") + req + "'");
    }

    void parse_start(const Section& sec) {
        std::map<int, Rat> entries;
        Rat sum;
        for (auto& row : sec.rows) {
            if (row.size() != 2) fail(row[0], "[start] rows are '<state> <prob>'");
            int s = resolve(states_, row[0], "state");
            Rat p = parse_rat(row[1]);
            if (p.sign() <= 0) fail(row[1], "start probability must be positive");
            if (!entries.emplace(s, p).second) fail(row[0], "state repeated in [start]");
            sum += p;
        }
        if (!sum.is_one())
            throw ParseError(file_, sec.line, sec.col, "[start] sums to " + sum.str() + ", not 1");
        for (auto& [s, p] : entries) g_.start.emplace_back(s, p);
    }

    // Expands '<key tokens> -> <payload>' rows over the wildcard pattern,
    // first match wins per concrete (state, joint action) cell.
    template <typename PerCell>
    void expand_rows(const Section& sec, PerCell&& per_cell) {
        const int key_width = 1 + g_.agents;
        for (auto& row : sec.rows) {
            if (static_cast<int>(row.size()) < key_width + 2 ||
                row[key_width].text != "->")
                fail(row[0], "expected '<state> <" + std::to_string(g_.agents) +
                                 " actions> -> payload' in [" + sec.name + "]");
            std::vector<std::vector<int>> choices(key_width);
            for (int k = 0; k < key_width; k++) {
                const detail::Tok& tok = row[k];
                int limit = k == 0 ? static_cast<int>(states_.size())
                                   : static_cast<int>(actions_[k - 1].size());
                if (tok.text == "*") {
                    choices[k].resize(limit);
                    for (int v = 0; v < limit; v++) choices[k][v] = v;
                } else {
                    choices[k] = {k == 0 ? resolve(states_, tok, "state")
                                         : resolve(actions_[k - 1], tok, "action")};
                }
            }
            std::vector<int> pick(key_width, 0);
            std::vector<int> cell(key_width);
            std::vector<int> acts(g_.agents);
            while (true) {
                for (int k = 0; k < key_width; k++) cell[k] = choices[k][pick[k]];
                for (int i = 0; i < g_.agents; i++) acts[i] = cell[1 + i];
                per_cell(cell[0], g_.joint_action(acts), row);
                int k = key_width - 1;
                while (k >= 0 && ++pick[k] == static_cast<int>(choices[k].size())) pick[k--] = 0;
                if (k < 0) break;
            }
        }
    }

    // Payload entries are groups of `stride` index tokens plus a rational.
    ProbRow parse_prob_row(const std::vector<detail::Tok>& row, std::size_t from, int stride,
                           const std::function<int(std::size_t)>& resolve_idx) {
        std::map<int, Rat> entries;
        Rat sum;
        if (row.size() <= from || (row.size() - from) % (stride + 1) != 0)
            fail(row[0], "malformed probability list");
        for (std::size_t k = from; k < row.size(); k += stride + 1) {
            int idx = resolve_idx(k);
            Rat p = parse_rat(row[k + stride]);
            if (p.sign() <= 0) fail(row[k + stride], "probabilities must be positive");
            if (!entries.emplace(idx, p).second) fail(row[k], "index repeated in probability row");
            sum += p;
        }
        if (!sum.is_one()) fail(row[0], "probability row sums to " + sum.str() + ", not 1");
        ProbRow out;
        for (auto& [idx, p] : entries) out.emplace_back(idx, p);
        return out;
    }

    void parse_transition(const Section& sec) {
        const int ns = static_cast<int>(states_.size());
        const int nja = g_.num_joint_actions();
        g_.transition.assign(ns, std::vector<ProbRow>(nja));
        std::vector<std::vector<bool>> filled(ns, std::vector<bool>(nja, false));
        std::unordered_map<const void*, ProbRow> row_cache;
        expand_rows(sec, [&](int s, int ja, const std::vector<detail::Tok>& row) {
            if (filled[s][ja]) return;  // first match wins
            filled[s][ja] = true;
            auto it = row_cache.find(&row);
            if (it == row_cache.end()) {
                ProbRow pr = parse_prob_row(row, 2 + g_.agents, 1, [&](std::size_t k) {
                    return resolve(states_, row[k], "state");
                });
                it = row_cache.emplace(&row, std::move(pr)).first;
            }
            g_.transition[s][ja] = it->second;
        });
        for (int s = 0; s < ns; s++)
            for (int ja = 0; ja < nja; ja++)
                if (!filled[s][ja])
                    throw ParseError(file_, sec.line, sec.col,
                                     "no transition row covers (" + g_.states[s] +
                                         ", joint action " + std::to_string(ja) + ")");
    }

    void parse_observe(const Section& sec) {
        const int ns = static_cast<int>(states_.size());
        const int nja = g_.num_joint_actions();
        g_.obs.assign(ns, std::vector<ProbRow>(nja));
        std::vector<std::vector<bool>> filled(ns, std::vector<bool>(nja, false));
        std::unordered_map<const void*, ProbRow> row_cache;
        expand_rows(sec, [&](int s2, int ja, const std::vector<detail::Tok>& row) {
            if (filled[s2][ja]) return;
            filled[s2][ja] = true;
            auto it = row_cache.find(&row);
            if (it == row_cache.end()) {
                ProbRow pr = parse_prob_row(row, 2 + g_.agents, g_.agents, [&](std::size_t k) {
                    std::vector<int> per(g_.agents);
                    for (int i = 0; i < g_.agents; i++)
                        per[i] = resolve(obsnames_[i], row[k + i], "observation");
                    return g_.joint_obs(per);
                });
                it = row_cache.emplace(&row, std::move(pr)).first;
            }
            g_.obs[s2][ja] = it->second;
        });
        for (int s2 = 0; s2 < ns; s2++)
            for (int ja = 0; ja < nja; ja++)
                if (!filled[s2][ja])
                    throw ParseError(file_, sec.line, sec.col,
                                     "no observe row covers (" + g_.states[s2] + ", joint action " +
                                         std::to_string(ja) + ")");
    }

    void parse_reward(const Section& sec) {
        std::unordered_set<std::uint64_t> decided;
        const int ns = static_cast<int>(states_.size());
        expand_rows(sec, [&](int s, int ja, const std::vector<detail::Tok>& row) {
            std::size_t base = 2 + g_.agents;
            if (row.size() != base + 2)
                fail(row[0], "[reward] rows are '<s> <actions..> -> <s'> <value>'");
            Rat v = parse_rat(row[base + 1]);
            if (row[base].text == "*") {
                for (int s2 = 0; s2 < ns; s2++) {
                    std::uint64_t key = DecPomdp::pack_reward_key(s, ja, s2);
                    if (!decided.insert(key).second) continue;  // first match wins
                    if (!v.is_zero()) g_.reward.emplace(key, v);
                }
            } else {
                int s2 = resolve(states_, row[base], "state");
                std::uint64_t key = DecPomdp::pack_reward_key(s, ja, s2);
                if (decided.insert(key).second && !v.is_zero()) g_.reward.emplace(key, v);
            }
        });
    }

    std::string file_;
    DecPomdp g_;
    std::vector<Section> sections_;
    SymTab states_;
    std::vector<SymTab> actions_;
    std::vector<SymTab> obsnames_;
};

inline DecPomdp parse_game(const std::string& text, const std::string& file = "<memory>") {
    return GameParser(file).parse(text);
}

// Canonical text form: fixed section order, one declaration or row per line,
// explicit rows (wildcards are a hand-authoring convenience only), rewards
// sparse and sorted, discount always "p/q". Deterministic bytes.
inline std::string serialize_game(const DecPomdp& g) {
    auto check_symbol = [](const std::string& s) {
        if (s.empty() || s == "*" || s == "->" || s.front() == '[')
            throw ContractViolation("symbol '" + s + "' cannot be serialized");
        for (char c : s)
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '#')
                throw ContractViolation("symbol '" + s + "' cannot be serialized");
    };
    check_symbol(g.name);
    for (auto& s : g.states) check_symbol(s);
    for (auto& v : g.actions)
        for (auto& s : v) check_symbol(s);
    if (!g.fully_observed)
        for (auto& v : g.observations)
            for (auto& s : v) check_symbol(s);

    std::ostringstream os;
    os << "[game]\n";
    os << "name " << g.name << "\n";
    os << "agents " << g.agents << "\n";
    os << "horizon " << g.horizon << "\n";
    os << "discount " << g.discount.str_frac() << "\n";
    os << "fully_observed " << (g.fully_observed ? "true" : "false") << "\n";
    os << "\n[states]\n";
    for (auto& s : g.states) os << s << "\n";
    for (int i = 0; i < g.agents; i++) {
        os << "\n[actions " << i << "]\n";
        for (auto& a : g.actions[i]) os << a << "\n";
    }
    if (!g.fully_observed)
        for (int i = 0; i < g.agents; i++) {
            os << "\n[observations " << i << "]\n";
            for (auto& o : g.observations[i]) os << o << "\n";
        }
    os << "\n[start]\n";
    for (auto& [s, p] : g.start) os << g.states[s] << " " << p.str_frac() << "\n";

    auto put_actions = [&](int ja) {
        for (int i = 0; i < g.agents; i++) os << " " << g.actions[i][g.action_of(ja, i)];
    };
    os << "\n[transition]\n";
    for (int s = 0; s < g.num_states(); s++)
        for (int ja = 0; ja < g.num_joint_actions(); ja++) {
            os << g.states[s];
            put_actions(ja);
            os << " ->";
            for (auto& [s2, p] : g.transition[s][ja])
                os << " " << g.states[s2] << " " << p.str_frac();
            os << "\n";
        }
    if (!g.fully_observed) {
        os << "\n[observe]\n";
        for (int s2 = 0; s2 < g.num_states(); s2++)
            for (int ja = 0; ja < g.num_joint_actions(); ja++) {
                os << g.states[s2];
                put_actions(ja);
                os << " ->";
                for (auto& [jo, p] : g.obs[s2][ja]) {
                    for (int i = 0; i < g.agents; i++)
                        os << " " << g.observations[i][g.obs_of(jo, i)];
                    os << " " << p.str_frac();
                }
                os << "\n";
            }
    }
    // Rewards in (s, ja, s') order for stable diffs.
    std::vector<std::uint64_t> keys;
    keys.reserve(g.reward.size());
    for (auto& [key, val] : g.reward) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    os << "\n[reward]\n";
    for (std::uint64_t key : keys) {
        int s2 = static_cast<int>(key & ((1u << 21) - 1));
        int ja = static_cast<int>((key >> 21) & ((1u << 21) - 1));
        int s = static_cast<int>(key >> 42);
        os << g.states[s];
        put_actions(ja);
        os << " -> " << g.states[s2] << " " << g.reward.at(key).str_frac() << "\n";
    }
    return os.str();
}

}  // namespace vser
