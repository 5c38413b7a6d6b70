#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vser/errors.hpp"
#include "vser/rational.hpp"

namespace vser {

// Sparse probability row: (index, probability) pairs, sorted by index,
// probabilities positive and summing to exactly 1.
using ProbRow = std::vector<std::pair<int, Rat>>;

// Tabular finite-horizon common-payoff stochastic game with per-agent
// observation channels. Immutable after validate(); all solvers share one
// const instance.
struct DecPomdp {
    std::string name;
    int agents = 0;
    int horizon = 0;
    Rat discount = Rat(1);
    bool fully_observed = false;

    std::vector<std::string> states;
    std::vector<std::vector<std::string>> actions;       // [agent][action]
    std::vector<std::vector<std::string>> observations;  // [agent][obs]

    ProbRow start;

    // transition[s][ja] -> row over successor states.
    std::vector<std::vector<ProbRow>> transition;
    // obs[s'][ja] -> row over joint observation indices.
    std::vector<std::vector<ProbRow>> obs;
    // reward keyed by pack(s, ja, s'); absent means 0.
    std::unordered_map<std::uint64_t, Rat> reward;

    int num_states() const { return static_cast<int>(states.size()); }
    int num_actions(int agent) const { return static_cast<int>(actions[agent].size()); }
    int num_obs(int agent) const { return static_cast<int>(observations[agent].size()); }

    int num_joint_actions() const {
        int n = 1;
        for (int i = 0; i < agents; i++) n *= num_actions(i);
        return n;
    }
    int num_joint_obs() const {
        int n = 1;
        for (int i = 0; i < agents; i++) n *= num_obs(i);
        return n;
    }

    // Joint indices are agent-0-major mixed radix.
    int joint_action(const std::vector<int>& per_agent) const {
        int ja = 0;
        for (int i = 0; i < agents; i++) ja = ja * num_actions(i) + per_agent[i];
        return ja;
    }
    std::vector<int> split_action(int ja) const {
        std::vector<int> out(agents);
        for (int i = agents - 1; i >= 0; i--) {
            out[i] = ja % num_actions(i);
            ja /= num_actions(i);
        }
        return out;
    }
    int action_of(int ja, int agent) const {
        for (int i = agents - 1; i > agent; i--) ja /= num_actions(i);
        return ja % num_actions(agent);
    }
    int joint_obs(const std::vector<int>& per_agent) const {
        int jo = 0;
        for (int i = 0; i < agents; i++) jo = jo * num_obs(i) + per_agent[i];
        return jo;
    }
    int obs_of(int jo, int agent) const {
        for (int i = agents - 1; i > agent; i--) jo /= num_obs(i);
        return jo % num_obs(agent);
    }

    static std::uint64_t pack_reward_key(int s, int ja, int s2) {
        return (static_cast<std::uint64_t>(s) << 42) |
               (static_cast<std::uint64_t>(ja) << 21) |
               static_cast<std::uint64_t>(s2);
    }
    const Rat& reward_at(int s, int ja, int s2) const {
        static const Rat zero;
        auto it = reward.find(pack_reward_key(s, ja, s2));
        return it == reward.end() ? zero : it->second;
    }
    void set_reward(int s, int ja, int s2, const Rat& r) {
        if (r.is_zero())
            reward.erase(pack_reward_key(s, ja, s2));
        else
            reward[pack_reward_key(s, ja, s2)] = r;
    }

    // For a fully observed game, fills obs with the identity channel: every
    // agent observes the successor state with probability 1.
    void install_full_observability() {
        fully_observed = true;
        observations.assign(agents, states);
        obs.assign(num_states(), std::vector<ProbRow>(num_joint_actions()));
        std::vector<int> per(agents);
        for (int s2 = 0; s2 < num_states(); s2++) {
            std::fill(per.begin(), per.end(), s2);
            int jo = joint_obs(per);
            for (int ja = 0; ja < num_joint_actions(); ja++)
                obs[s2][ja] = {{jo, Rat(1)}};
        }
    }

    void validate() const {
        if (agents < 1) throw ModelError("header", "agents", "need at least one agent");
        if (horizon < 1) throw ModelError("header", "horizon", "horizon must be at least 1");
        if (discount <= Rat(0) || discount > Rat(1))
            throw ModelError("header", "discount", "discount must lie in (0,1]");
        if (states.empty()) throw ModelError("states", "-", "no states declared");
        if (static_cast<int>(actions.size()) != agents || static_cast<int>(observations.size()) != agents)
            throw ModelError("header", "agents", "per-agent tables do not match agent count");
        for (int i = 0; i < agents; i++) {
            if (actions[i].empty()) throw ModelError("actions", std::to_string(i), "agent has no actions");
            if (observations[i].empty())
                throw ModelError("observations", std::to_string(i), "agent has no observations");
        }
        check_row("start", "-", start, num_states());
        if (static_cast<int>(transition.size()) != num_states())
            throw ModelError("transition", "-", "missing state rows");
        const int nja = num_joint_actions();
        for (int s = 0; s < num_states(); s++) {
            if (static_cast<int>(transition[s].size()) != nja)
                throw ModelError("transition", states[s], "missing joint-action rows");
            for (int ja = 0; ja < nja; ja++)
                check_row("transition", states[s] + "," + std::to_string(ja), transition[s][ja],
                          num_states());
        }
        if (static_cast<int>(obs.size()) != num_states())
            throw ModelError("obs", "-", "missing successor-state rows");
        const int njo = num_joint_obs();
        for (int s2 = 0; s2 < num_states(); s2++) {
            if (static_cast<int>(obs[s2].size()) != nja)
                throw ModelError("obs", states[s2], "missing joint-action rows");
            for (int ja = 0; ja < nja; ja++)
                check_row("obs", states[s2] + "," + std::to_string(ja), obs[s2][ja], njo);
        }
        for (const auto& [key, val] : reward) {
            int s2 = static_cast<int>(key & ((1u << 21) - 1));
            int ja = static_cast<int>((key >> 21) & ((1u << 21) - 1));
            int s = static_cast<int>(key >> 42);
            if (s < 0 || s >= num_states() || s2 < 0 || s2 >= num_states() || ja < 0 || ja >= nja)
                throw ModelError("reward", std::to_string(key), "index out of range");
            (void)val;
        }
        if (fully_observed) {
            for (int i = 0; i < agents; i++)
                if (observations[i] != states)
                    throw ModelError("observations", std::to_string(i),
                                     "fully observed game must observe the state set");
            std::vector<int> per(agents);
            for (int s2 = 0; s2 < num_states(); s2++) {
                std::fill(per.begin(), per.end(), s2);
                int jo = joint_obs(per);
                for (int ja = 0; ja < nja; ja++) {
                    const ProbRow& row = obs[s2][ja];
                    if (row.size() != 1 || row[0].first != jo || !row[0].second.is_one())
                        throw ModelError("obs", states[s2] + "," + std::to_string(ja),
                                         "fully observed game must reveal the successor state");
                }
            }
        }
    }

    bool operator==(const DecPomdp& o) const = default;

    int state_index(const std::string& n) const { return find_in(states, n, "states"); }
    int action_index(int agent, const std::string& n) const {
        return find_in(actions[agent], n, "actions");
    }
    int obs_index(int agent, const std::string& n) const {
        return find_in(observations[agent], n, "observations");
    }

private:
    static int find_in(const std::vector<std::string>& v, const std::string& n, const char* table) {
        for (int i = 0; i < static_cast<int>(v.size()); i++)
            if (v[i] == n) return i;
        throw ModelError(table, n, "unknown symbol");
    }
    static void check_row(const char* table, const std::string& index, const ProbRow& row, int limit) {
        Rat sum;
        int prev = -1;
        for (const auto& [idx, p] : row) {
            if (idx <= prev) throw ModelError(table, index, "row indices not strictly increasing");
            if (idx < 0 || idx >= limit) throw ModelError(table, index, "index out of range");
            if (p.sign() <= 0) throw ModelError(table, index, "probabilities must be positive");
            sum += p;
            prev = idx;
        }
        if (!sum.is_one()) throw ModelError(table, index, "row sums to " + sum.str() + ", not 1");
    }
};

// An agent's private action-observation record.
struct History {
    int agent = 0;
    std::vector<std::pair<int, int>> entries;  // (own action, own observation)

    int length() const { return static_cast<int>(entries.size()); }
    History extended(int a, int o) const {
        History h = *this;
        h.entries.emplace_back(a, o);
        return h;
    }
    bool operator==(const History& o) const = default;
};

// Time-indexed state-feedback policy: table[t][s] is the action at (s, t).
struct MarkovPolicy {
    int agent = 0;
    std::vector<std::vector<int>> table;  // [t][s]

    int at(int s, int t) const { return table[t][s]; }
    bool operator==(const MarkovPolicy& o) const = default;
};

// Distribution over states; entries sorted by state, positive, summing to 1.
struct Belief {
    ProbRow probs;

    void check() const {
        Rat sum;
        int prev = -1;
        for (const auto& [s, p] : probs) {
            if (s <= prev) throw ContractViolation("belief entries out of order");
            if (p.sign() <= 0) throw ContractViolation("belief entries must be positive");
            sum += p;
            prev = s;
        }
        if (!sum.is_one()) throw ContractViolation("belief sums to " + sum.str() + ", not 1");
    }
    bool operator==(const Belief& o) const = default;
};

}  // namespace vser
