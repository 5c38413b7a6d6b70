#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vser/errors.hpp"
#include "vser/model.hpp"

namespace vser {

// One node of a policy tree: the action taken now, and a subtree per
// observation that can actually occur at this point of play. Nodes are
// hash-consed in a TreePool, so structural equality is id equality.
struct TreeNode {
    int action = 0;
    std::vector<std::pair<int, int>> children;  // (observation, child id), sorted by observation

    bool operator==(const TreeNode& o) const = default;
};

class TreePool {
public:
    int intern(int action, std::vector<std::pair<int, int>> children) {
        Key key{action, std::move(children)};
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(nodes_.size());
        nodes_.push_back(TreeNode{key.action, key.children});
        index_.emplace(std::move(key), id);
        return id;
    }

    const TreeNode& node(int id) const { return nodes_[id]; }
    int size() const { return static_cast<int>(nodes_.size()); }

    int depth(int id) const {
        const TreeNode& n = node(id);
        int d = 1;
        for (auto& [o, c] : n.children) d = std::max(d, 1 + depth(c));
        return d;
    }

    // Child subtree for an observation; -1 when the branch is absent
    // (the observation cannot occur there).
    int child(int id, int o) const {
        for (auto& [obs, c] : node(id).children)
            if (obs == o) return c;
        return -1;
    }

    // Canonical text, e.g. "a2(0->a1, 2->a0(...))" with action names resolved
    // by the caller-supplied table.
    std::string render(int id, const std::vector<std::string>& action_names) const {
        const TreeNode& n = node(id);
        std::string out = action_names[n.action];
        if (!n.children.empty()) {
            out += "(";
            bool first = true;
            for (auto& [o, c] : n.children) {
                if (!first) out += ", ";
                first = false;
                out += std::to_string(o) + "->" + render(c, action_names);
            }
            out += ")";
        }
        return out;
    }

private:
    struct Key {
        int action;
        std::vector<std::pair<int, int>> children;
        bool operator==(const Key& o) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = 1469598103934665603ull ^ static_cast<std::uint64_t>(k.action);
            for (auto& [o, c] : k.children) {
                h = (h * 1099511628211ull) ^ static_cast<std::uint64_t>(o);
                h = (h * 1099511628211ull) ^ static_cast<std::uint64_t>(c);
            }
            return static_cast<std::size_t>(h);
        }
    };
    std::vector<TreeNode> nodes_;
    std::unordered_map<Key, int, KeyHash> index_;
};

struct PurePolicy {
    int agent = 0;
    int tree = 0;  // TreePool id
    int depth = 0;
    bool operator==(const PurePolicy& o) const = default;
};

// The set of states an agent's private history could be in, together with the
// machinery to push it forward one step. Existential over the other agents'
// choices: an observation is "possible" at a node if some completion of play
// gives it positive probability. (Any fixed action sequence for the others is
// realizable by a level-constant co-policy, so per-step free choice is exact.)
class SupportTracker {
public:
    SupportTracker(const DecPomdp& g, int agent) : g_(g), agent_(agent) {
        for (auto& [s, p] : g.start) start_.push_back(s);
    }

    const std::vector<int>& start_support() const { return start_; }

    // For a support and an own action, the successor support per own
    // observation. Keys are only the observations that can occur.
    std::map<int, std::vector<int>> step(const std::vector<int>& support, int own_action) const {
        std::map<int, std::vector<bool>> seen;
        const int ns = g_.num_states();
        for (int s : support) {
            for (int ja = 0; ja < g_.num_joint_actions(); ja++) {
                if (g_.action_of(ja, agent_) != own_action) continue;
                for (auto& [s2, tp] : g_.transition[s][ja]) {
                    for (auto& [jo, op] : g_.obs[s2][ja]) {
                        int o = g_.obs_of(jo, agent_);
                        auto& mask = seen[o];
                        if (mask.empty()) mask.assign(ns, false);
                        mask[s2] = true;
                    }
                }
            }
        }
        std::map<int, std::vector<int>> out;
        for (auto& [o, mask] : seen) {
            std::vector<int> sup;
            for (int s = 0; s < ns; s++)
                if (mask[s]) sup.push_back(s);
            out.emplace(o, std::move(sup));
        }
        return out;
    }

private:
    const DecPomdp& g_;
    int agent_;
    std::vector<int> start_;
};

// Enumerates every depth-d policy tree for an agent, branching only on
// possible observations, in a canonical order: action index ascending at each
// node, subtree choices cycling with the highest observation fastest. The
// order (and the returned pool ids) is deterministic.
class PolicyEnumerator {
public:
    PolicyEnumerator(const DecPomdp& g, int agent, TreePool& pool)
        : g_(g), agent_(agent), pool_(pool), tracker_(g, agent) {}

    std::vector<int> enumerate(int depth, std::uint64_t budget = kDefaultBudget) {
        if (depth < 1 || depth > g_.horizon)
            throw ContractViolation("policy depth out of range");
        budget_ = budget;
        return trees_at(tracker_.start_support(), depth);
    }

    static constexpr std::uint64_t kDefaultBudget = 4'000'000;

private:
    std::vector<int> trees_at(const std::vector<int>& support, int depth) {
        MemoKey key{support, depth};
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;

        std::vector<int> out;
        for (int a = 0; a < g_.num_actions(agent_); a++) {
            if (depth == 1) {
                out.push_back(pool_.intern(a, {}));
                continue;
            }
            auto next = tracker_.step(support, a);
            // A validated model always yields at least one observation from a
            // nonempty support (observation rows sum to 1).
            if (next.empty())
                throw ContractViolation("no possible observation from nonempty support");
            // Per-observation alternatives, observation index ascending.
            std::vector<int> obs_order;
            std::vector<std::vector<int>> alternatives;
            for (auto& [o, sup] : next) {
                obs_order.push_back(o);
                alternatives.push_back(trees_at(sup, depth - 1));
            }
            std::vector<std::size_t> pick(obs_order.size(), 0);
            while (true) {
                std::vector<std::pair<int, int>> children;
                children.reserve(obs_order.size());
                for (std::size_t k = 0; k < obs_order.size(); k++)
                    children.emplace_back(obs_order[k], alternatives[k][pick[k]]);
                out.push_back(pool_.intern(a, std::move(children)));
                if (out.size() > budget_)
                    throw BudgetExceeded("policy enumeration exceeded budget");
                // Advance mixed-radix counter, last observation fastest.
                int k = static_cast<int>(pick.size()) - 1;
                while (k >= 0 && ++pick[k] == alternatives[k].size()) pick[k--] = 0;
                if (k < 0) break;
            }
        }
        memo_.emplace(std::move(key), out);
        return out;
    }

    struct MemoKey {
        std::vector<int> support;
        int depth;
        bool operator==(const MemoKey& o) const = default;
    };
    struct MemoKeyHash {
        std::size_t operator()(const MemoKey& k) const {
            std::uint64_t h = 1469598103934665603ull ^ static_cast<std::uint64_t>(k.depth);
            for (int s : k.support) h = (h * 1099511628211ull) ^ static_cast<std::uint64_t>(s);
            return static_cast<std::size_t>(h);
        }
    };

    const DecPomdp& g_;
    int agent_;
    TreePool& pool_;
    SupportTracker tracker_;
    std::uint64_t budget_ = kDefaultBudget;
    std::unordered_map<MemoKey, std::vector<int>, MemoKeyHash> memo_;
};

inline std::vector<int> enumerate_pure_policies(const DecPomdp& g, int agent, int depth,
                                                TreePool& pool,
                                                std::uint64_t budget = PolicyEnumerator::kDefaultBudget) {
    PolicyEnumerator e(g, agent, pool);
    return e.enumerate(depth, budget);
}

// Co-policy: one tree per agent other than the viewpoint agent; the viewpoint
// slot is -1. Tuples are ordered with the lowest co-agent most significant.
using CoPolicy = std::vector<int>;

inline std::vector<CoPolicy> enumerate_co_policies(const DecPomdp& g, int viewpoint, int depth,
                                                   TreePool& pool,
                                                   std::uint64_t budget = PolicyEnumerator::kDefaultBudget) {
    std::vector<std::vector<int>> per_agent(g.agents);
    for (int j = 0; j < g.agents; j++)
        if (j != viewpoint) per_agent[j] = enumerate_pure_policies(g, j, depth, pool, budget);

    std::vector<CoPolicy> out;
    CoPolicy cur(g.agents, -1);
    std::uint64_t total = 1;
    for (int j = 0; j < g.agents; j++)
        if (j != viewpoint) total *= per_agent[j].size();
    if (total > budget) throw BudgetExceeded("co-policy enumeration exceeded budget");

    std::vector<int> co_agents;
    for (int j = 0; j < g.agents; j++)
        if (j != viewpoint) co_agents.push_back(j);
    std::vector<std::size_t> pick(co_agents.size(), 0);
    while (true) {
        for (std::size_t k = 0; k < co_agents.size(); k++)
            cur[co_agents[k]] = per_agent[co_agents[k]][pick[k]];
        out.push_back(cur);
        int k = static_cast<int>(pick.size()) - 1;
        while (k >= 0 && ++pick[k] == per_agent[co_agents[k]].size()) pick[k--] = 0;
        if (k < 0) break;
    }
    return out;
}

// Forward-reachable (state, timestep) slots under arbitrary play.
inline std::vector<std::vector<bool>> reachable_slots(const DecPomdp& g) {
    std::vector<std::vector<bool>> reach(g.horizon, std::vector<bool>(g.num_states(), false));
    for (auto& [s, p] : g.start) reach[0][s] = true;
    for (int t = 0; t + 1 < g.horizon; t++)
        for (int s = 0; s < g.num_states(); s++) {
            if (!reach[t][s]) continue;
            for (int ja = 0; ja < g.num_joint_actions(); ja++)
                for (auto& [s2, p] : g.transition[s][ja]) reach[t + 1][s2] = true;
        }
    return reach;
}

// All time-indexed state-feedback policies for one agent, varying only on
// reachable (state, timestep) slots; unreachable slots take action 0. Order:
// earlier slots most significant, action index ascending.
inline std::vector<MarkovPolicy> enumerate_markov_policies(const DecPomdp& g, int agent,
                                                           std::uint64_t budget = PolicyEnumerator::kDefaultBudget) {
    auto reach = reachable_slots(g);
    std::vector<std::pair<int, int>> slots;  // (t, s), time-major
    for (int t = 0; t < g.horizon; t++)
        for (int s = 0; s < g.num_states(); s++)
            if (reach[t][s]) slots.emplace_back(t, s);

    const int na = g.num_actions(agent);
    std::uint64_t total = 1;
    for (std::size_t k = 0; k < slots.size(); k++) {
        total *= static_cast<std::uint64_t>(na);
        if (total > budget) throw BudgetExceeded("state-policy enumeration exceeded budget");
    }

    MarkovPolicy base;
    base.agent = agent;
    base.table.assign(g.horizon, std::vector<int>(g.num_states(), 0));
    std::vector<int> pick(slots.size(), 0);
    std::vector<MarkovPolicy> out;
    while (true) {
        MarkovPolicy m = base;
        for (std::size_t k = 0; k < slots.size(); k++)
            m.table[slots[k].first][slots[k].second] = pick[k];
        out.push_back(std::move(m));
        int k = static_cast<int>(pick.size()) - 1;
        while (k >= 0 && ++pick[k] == na) pick[k--] = 0;
        if (k < 0) break;
        if (pick.empty()) break;
    }
    return out;
}

}  // namespace vser
