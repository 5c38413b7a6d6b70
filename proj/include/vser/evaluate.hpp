#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "vser/errors.hpp"
#include "vser/model.hpp"
#include "vser/policy.hpp"
#include "vser/rational.hpp"

namespace vser {

// Exact expected discounted return of one full joint policy given as trees,
// one per agent, each of depth == horizon. Forward pass over the joint
// distribution of (state, tree position per agent).
inline Rat expected_return(const DecPomdp& g, const TreePool& pool, const std::vector<int>& joint_trees) {
    if (static_cast<int>(joint_trees.size()) != g.agents)
        throw ContractViolation("joint policy must have one tree per agent");

    // Key: [state, node_0, ..., node_{M-1}] -> probability.
    std::map<std::vector<int>, Rat> dist;
    {
        std::vector<int> key(1 + g.agents);
        for (int i = 0; i < g.agents; i++) key[1 + i] = joint_trees[i];
        for (auto& [s, p] : g.start) {
            key[0] = s;
            dist[key] += p;
        }
    }

    Rat total;
    Rat disc = Rat(1);
    for (int t = 0; t < g.horizon; t++) {
        std::map<std::vector<int>, Rat> next;
        for (auto& [key, p] : dist) {
            int s = key[0];
            std::vector<int> acts(g.agents);
            for (int i = 0; i < g.agents; i++) acts[i] = pool.node(key[1 + i]).action;
            int ja = g.joint_action(acts);
            for (auto& [s2, tp] : g.transition[s][ja]) {
                Rat reach = p * tp;
                total += disc * reach * g.reward_at(s, ja, s2);
                if (t + 1 == g.horizon) continue;
                for (auto& [jo, op] : g.obs[s2][ja]) {
                    std::vector<int> nk(1 + g.agents);
                    nk[0] = s2;
                    for (int i = 0; i < g.agents; i++) {
                        int c = pool.child(key[1 + i], g.obs_of(jo, i));
                        if (c < 0)
                            throw ContractViolation("policy tree lacks a branch for a realizable observation");
                        nk[1 + i] = c;
                    }
                    next[std::move(nk)] += reach * op;
                }
            }
        }
        dist = std::move(next);
        disc *= g.discount;
    }
    return total;
}

// Same, for time-indexed state-feedback joint policies (meaningful when every
// agent sees the state). Forward pass over states only.
inline Rat expected_return(const DecPomdp& g, const std::vector<MarkovPolicy>& joint) {
    if (static_cast<int>(joint.size()) != g.agents)
        throw ContractViolation("joint policy must have one entry per agent");
    std::vector<Rat> cur(g.num_states());
    for (auto& [s, p] : g.start) cur[s] += p;
    Rat total;
    Rat disc = Rat(1);
    for (int t = 0; t < g.horizon; t++) {
        std::vector<Rat> next(g.num_states());
        for (int s = 0; s < g.num_states(); s++) {
            if (cur[s].is_zero()) continue;
            std::vector<int> acts(g.agents);
            for (int i = 0; i < g.agents; i++) acts[i] = joint[i].at(s, t);
            int ja = g.joint_action(acts);
            for (auto& [s2, tp] : g.transition[s][ja]) {
                Rat reach = cur[s] * tp;
                total += disc * reach * g.reward_at(s, ja, s2);
                next[s2] += reach;
            }
        }
        cur = std::move(next);
        disc *= g.discount;
    }
    return total;
}

// Best responses of one agent against a fixed co-policy: the exact maximal
// value and every policy tree attaining it, ids ascending in enumeration
// order. This brute-force routine is the ground truth the solvers are
// checked against.
struct ValuedBestResponse {
    std::vector<int> trees;  // TreePool ids, sorted ascending
    Rat value;
    bool operator==(const ValuedBestResponse& o) const = default;
};

inline ValuedBestResponse best_response_set(const DecPomdp& g, int agent, const CoPolicy& co,
                                            TreePool& pool,
                                            std::uint64_t budget = PolicyEnumerator::kDefaultBudget) {
    std::vector<int> mine = enumerate_pure_policies(g, agent, g.horizon, pool, budget);
    ValuedBestResponse out;
    bool first = true;
    std::vector<int> joint = co;
    for (int tree : mine) {
        joint[agent] = tree;
        Rat v = expected_return(g, pool, joint);
        if (first || out.value < v) {
            out.value = v;
            out.trees.clear();
            first = false;
        }
        if (v == out.value) out.trees.push_back(tree);
    }
    std::sort(out.trees.begin(), out.trees.end());
    return out;
}

// Markov-policy variant: indices into enumerate_markov_policies(g, agent).
struct ValuedMarkovBestResponse {
    std::vector<int> indices;  // sorted ascending
    Rat value;
    bool operator==(const ValuedMarkovBestResponse& o) const = default;
};

inline ValuedMarkovBestResponse best_response_set_markov(const DecPomdp& g, int agent,
                                                         const std::vector<MarkovPolicy>& co,
                                                         const std::vector<MarkovPolicy>& universe) {
    ValuedMarkovBestResponse out;
    bool first = true;
    std::vector<MarkovPolicy> joint = co;
    if (static_cast<int>(joint.size()) != g.agents)
        throw ContractViolation("co-policy must have one slot per agent");
    for (int k = 0; k < static_cast<int>(universe.size()); k++) {
        joint[agent] = universe[k];
        Rat v = expected_return(g, joint);
        if (first || out.value < v) {
            out.value = v;
            out.indices.clear();
            first = false;
        }
        if (v == out.value) out.indices.push_back(k);
    }
    return out;
}

// Exact Bayesian filter step. An observation with zero likelihood under the
// belief and joint action yields possible == false rather than an error:
// callers decide whether that is exceptional.
struct BeliefUpdate {
    bool possible = false;
    Rat likelihood;   // prior probability of (joint observation | belief, joint action)
    Belief posterior; // empty when !possible
};

inline BeliefUpdate belief_update(const DecPomdp& g, const Belief& b, int joint_action, int joint_obs) {
    std::vector<Rat> w(g.num_states());
    Rat norm;
    for (auto& [s, p] : b.probs) {
        for (auto& [s2, tp] : g.transition[s][joint_action]) {
            for (auto& [jo, op] : g.obs[s2][joint_action]) {
                if (jo != joint_obs) continue;
                Rat m = p * tp * op;
                w[s2] += m;
                norm += m;
            }
        }
    }
    BeliefUpdate out;
    out.likelihood = norm;
    if (norm.is_zero()) return out;
    out.possible = true;
    for (int s = 0; s < g.num_states(); s++)
        if (!w[s].is_zero()) out.posterior.probs.emplace_back(s, w[s] / norm);
    return out;
}

// Filters a list of co-policy prefixes down to those under which the given
// private history has positive probability. The filter is exact: it tracks
// the support of (state, co tree positions) along the history.
inline std::vector<CoPolicy> consistent_co_prefixes(const DecPomdp& g, const TreePool& pool,
                                                    const History& h,
                                                    const std::vector<CoPolicy>& prefixes) {
    std::vector<CoPolicy> out;
    for (const CoPolicy& co : prefixes) {
        // Elements: [state, co nodes...] with the viewpoint slot skipped.
        std::vector<std::vector<int>> frontier;
        for (auto& [s, p] : g.start) {
            std::vector<int> e;
            e.push_back(s);
            for (int j = 0; j < g.agents; j++)
                if (j != h.agent) e.push_back(co[j]);
            frontier.push_back(std::move(e));
        }
        for (int k = 0; k < h.length(); k++) {
            auto [a, o] = h.entries[k];
            // A depth-t prefix fixes co actions for steps 0..t-1 only, so on
            // the last history step there is no co subtree to descend into.
            const bool last = (k + 1 == h.length());
            std::vector<std::vector<int>> next;
            for (auto& e : frontier) {
                int s = e[0];
                std::vector<int> acts(g.agents);
                acts[h.agent] = a;
                int slot = 1;
                for (int j = 0; j < g.agents; j++)
                    if (j != h.agent) acts[j] = pool.node(e[slot++]).action;
                int ja = g.joint_action(acts);
                for (auto& [s2, tp] : g.transition[s][ja]) {
                    for (auto& [jo, op] : g.obs[s2][ja]) {
                        if (g.obs_of(jo, h.agent) != o) continue;
                        std::vector<int> ne;
                        ne.push_back(s2);
                        bool ok = true;
                        slot = 1;
                        for (int j = 0; j < g.agents && !last; j++) {
                            if (j == h.agent) continue;
                            const TreeNode& cn = pool.node(e[slot]);
                            if (cn.children.empty())
                                throw ContractViolation("co-policy prefix shorter than history");
                            int c = pool.child(e[slot++], g.obs_of(jo, j));
                            if (c < 0) { ok = false; break; }
                            ne.push_back(c);
                        }
                        if (ok) next.push_back(std::move(ne));
                    }
                }
            }
            std::sort(next.begin(), next.end());
            next.erase(std::unique(next.begin(), next.end()), next.end());
            frontier = std::move(next);
            if (frontier.empty()) break;
        }
        if (!frontier.empty()) out.push_back(co);
    }
    return out;
}

// One-shot-deviation equilibrium check for state-feedback joint policies in a
// fully observed game: at every (state, timestep) reachable under the joint
// policy, no agent may gain by changing its action there and reverting to the
// policy afterwards.
struct NashReport {
    bool holds = true;
    // Witness of a profitable deviation when !holds.
    int agent = -1, state = -1, t = -1, action = -1;
};

inline NashReport nash_check(const DecPomdp& g, const std::vector<MarkovPolicy>& joint) {
    if (!g.fully_observed)
        throw UnsupportedModel("nash_check requires a fully observed game");
    if (static_cast<int>(joint.size()) != g.agents)
        throw ContractViolation("joint policy must have one entry per agent");

    // Continuation values under the joint policy, V[horizon][*] == 0.
    std::vector<std::vector<Rat>> V(g.horizon + 1, std::vector<Rat>(g.num_states()));
    for (int t = g.horizon - 1; t >= 0; t--) {
        for (int s = 0; s < g.num_states(); s++) {
            std::vector<int> acts(g.agents);
            for (int i = 0; i < g.agents; i++) acts[i] = joint[i].at(s, t);
            int ja = g.joint_action(acts);
            Rat v;
            for (auto& [s2, tp] : g.transition[s][ja])
                v += tp * (g.reward_at(s, ja, s2) + g.discount * V[t + 1][s2]);
            V[t][s] = v;
        }
    }

    // Reachability under the joint policy itself.
    std::vector<std::vector<bool>> reach(g.horizon, std::vector<bool>(g.num_states(), false));
    for (auto& [s, p] : g.start) reach[0][s] = true;
    for (int t = 0; t + 1 < g.horizon; t++)
        for (int s = 0; s < g.num_states(); s++) {
            if (!reach[t][s]) continue;
            std::vector<int> acts(g.agents);
            for (int i = 0; i < g.agents; i++) acts[i] = joint[i].at(s, t);
            int ja = g.joint_action(acts);
            for (auto& [s2, tp] : g.transition[s][ja]) reach[t + 1][s2] = true;
        }

    for (int t = 0; t < g.horizon; t++)
        for (int s = 0; s < g.num_states(); s++) {
            if (!reach[t][s]) continue;
            std::vector<int> acts(g.agents);
            for (int i = 0; i < g.agents; i++) acts[i] = joint[i].at(s, t);
            for (int i = 0; i < g.agents; i++) {
                for (int a = 0; a < g.num_actions(i); a++) {
                    if (a == acts[i]) continue;
                    std::vector<int> dev = acts;
                    dev[i] = a;
                    int ja = g.joint_action(dev);
                    Rat q;
                    for (auto& [s2, tp] : g.transition[s][ja])
                        q += tp * (g.reward_at(s, ja, s2) + g.discount * V[t + 1][s2]);
                    if (V[t][s] < q) return NashReport{false, i, s, t, a};
                }
            }
        }
    return NashReport{};
}

}  // namespace vser
