#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "evaluate.hpp"

// Equivalence partitions of a co-policy universe. Two co-policies fall in the
// same class when they admit the same set of optimal responses (and, in the
// valued variant, the same optimal value). The enumerative construction here
// is deliberately brute force: it is the reference that the structured
// solvers are checked against, so it favours being obviously correct over
// being fast.

namespace vser {

struct Partition {
    struct Class {
        std::vector<int> members;  // indices into the co-policy universe, ascending
        ValuedBestResponse vbr;    // the shared best responses; ids index the
                                   // own-policy universe the caller enumerated
    };

    int agent = 0;
    bool valued = true;
    long long co_count = 0;  // size of the co-policy universe
    std::vector<Class> classes;  // ordered by smallest member
};

namespace detail {

// Canonical class identity. The valued variant appends the value so that
// equal response sets with different payoffs stay separate.
inline std::string vbr_key(const ValuedBestResponse& vbr, bool valued) {
    std::string key;
    for (int t : vbr.trees) {
        key += std::to_string(t);
        key += ',';
    }
    if (valued) {
        key += '|';
        key += vbr.value.str();
    }
    return key;
}

}  // namespace detail

// Structural sanity for any Partition: classes are nonempty, internally
// sorted, mutually disjoint, cover the whole universe, and appear in
// smallest-member order.
inline void check_partition(const Partition& p) {
    if (p.co_count < 0) throw ContractViolation("negative co-policy universe");
    std::vector<char> seen(static_cast<std::size_t>(p.co_count), 0);
    int prev_front = -1;
    for (const auto& cls : p.classes) {
        if (cls.members.empty()) throw ContractViolation("empty equivalence class");
        if (cls.members.front() <= prev_front)
            throw ContractViolation("classes not ordered by smallest member");
        prev_front = cls.members.front();
        int prev = -1;
        for (int m : cls.members) {
            if (m <= prev) throw ContractViolation("class members not strictly ascending");
            prev = m;
            if (m < 0 || m >= p.co_count || seen[static_cast<std::size_t>(m)])
                throw ContractViolation("class members do not form a partition");
            seen[static_cast<std::size_t>(m)] = 1;
        }
    }
    for (char s : seen)
        if (!s) throw ContractViolation("partition does not cover the co-policy universe");
}

// Exact equality of two partitions over the same universe. Member sets are
// always compared; values only when both sides carry them. Response-set ids
// are deliberately ignored: once the member sets agree, the response sets
// agree by construction (they are functions of the co-policies).
inline bool partition_equal(const Partition& a, const Partition& b) {
    if (a.co_count != b.co_count || a.classes.size() != b.classes.size()) return false;
    for (std::size_t k = 0; k < a.classes.size(); k++) {
        if (a.classes[k].members != b.classes[k].members) return false;
        if (a.valued && b.valued && !(a.classes[k].vbr.value == b.classes[k].vbr.value))
            return false;
    }
    return true;
}

// True when every class of `fine` sits inside one class of `coarse`.
inline bool partition_refines(const Partition& fine, const Partition& coarse) {
    if (fine.co_count != coarse.co_count) return false;
    std::vector<int> owner(static_cast<std::size_t>(coarse.co_count), -1);
    for (std::size_t k = 0; k < coarse.classes.size(); k++)
        for (int m : coarse.classes[k].members) owner[static_cast<std::size_t>(m)] = static_cast<int>(k);
    for (const auto& cls : fine.classes) {
        int o = owner[static_cast<std::size_t>(cls.members.front())];
        if (o < 0) return false;
        for (int m : cls.members)
            if (owner[static_cast<std::size_t>(m)] != o) return false;
    }
    return true;
}

// Group every pure co-policy tuple by the viewpoint agent's best-response
// set. This enumerates both sides of the game in full, so it is only viable
// on small instances; larger ones trip the enumeration budget.
inline Partition partition_by_best_response(const DecPomdp& g, int agent, bool valued,
                                            TreePool& pool,
                                            std::uint64_t budget = PolicyEnumerator::kDefaultBudget) {
    Partition out;
    out.agent = agent;
    out.valued = valued;

    std::vector<CoPolicy> cos = enumerate_co_policies(g, agent, g.horizon, pool, budget);
    std::vector<int> mine = enumerate_pure_policies(g, agent, g.horizon, pool, budget);
    out.co_count = static_cast<long long>(cos.size());

    std::map<std::string, int> slot;  // class key -> position in out.classes
    std::vector<int> joint;
    for (std::size_t c = 0; c < cos.size(); c++) {
        ValuedBestResponse vbr;
        bool first = true;
        joint = cos[c];
        for (int tree : mine) {
            joint[agent] = tree;
            Rat v = expected_return(g, pool, joint);
            if (first || vbr.value < v) {
                vbr.value = v;
                vbr.trees.clear();
                first = false;
            }
            if (v == vbr.value) vbr.trees.push_back(tree);
        }
        // enumerate_pure_policies does not promise sorted ids
        std::sort(vbr.trees.begin(), vbr.trees.end());

        auto [it, fresh] = slot.try_emplace(detail::vbr_key(vbr, valued),
                                            static_cast<int>(out.classes.size()));
        if (fresh) out.classes.push_back({{}, std::move(vbr)});
        out.classes[static_cast<std::size_t>(it->second)].members.push_back(static_cast<int>(c));
    }

    std::sort(out.classes.begin(), out.classes.end(),
              [](const Partition::Class& a, const Partition::Class& b) {
                  return a.members.front() < b.members.front();
              });
    return out;
}

// Joint Markov co-policy tuples for the fully observed variant, lowest
// co-agent most significant. The viewpoint slot holds a default-constructed
// placeholder; evaluation always overwrites it.
inline std::vector<std::vector<MarkovPolicy>> enumerate_markov_co_policies(
    const DecPomdp& g, int viewpoint,
    std::uint64_t budget = PolicyEnumerator::kDefaultBudget) {
    std::vector<std::vector<MarkovPolicy>> per_agent(static_cast<std::size_t>(g.agents));
    std::uint64_t total = 1;
    for (int j = 0; j < g.agents; j++) {
        if (j == viewpoint) continue;
        per_agent[static_cast<std::size_t>(j)] = enumerate_markov_policies(g, j, budget);
        total *= per_agent[static_cast<std::size_t>(j)].size();
        if (total > budget) throw BudgetExceeded("co-policy enumeration exceeded budget");
    }

    std::vector<int> co_agents;
    for (int j = 0; j < g.agents; j++)
        if (j != viewpoint) co_agents.push_back(j);

    std::vector<std::vector<MarkovPolicy>> out;
    std::vector<MarkovPolicy> cur(static_cast<std::size_t>(g.agents));
    std::vector<std::size_t> pick(co_agents.size(), 0);
    while (true) {
        for (std::size_t k = 0; k < co_agents.size(); k++) {
            int j = co_agents[k];
            cur[static_cast<std::size_t>(j)] = per_agent[static_cast<std::size_t>(j)][pick[k]];
        }
        out.push_back(cur);
        int k = static_cast<int>(pick.size()) - 1;
        while (k >= 0 && ++pick[static_cast<std::size_t>(k)] ==
                             per_agent[static_cast<std::size_t>(co_agents[static_cast<std::size_t>(k)])].size())
            pick[static_cast<std::size_t>(k--)] = 0;
        if (k < 0) break;
    }
    return out;
}

// Markov-universe counterpart of partition_by_best_response, for fully
// observed games where state-feedback policies are the natural co-universe.
inline Partition partition_markov_by_best_response(const DecPomdp& g, int agent, bool valued,
                                                   std::uint64_t budget = PolicyEnumerator::kDefaultBudget) {
    Partition out;
    out.agent = agent;
    out.valued = valued;

    auto cos = enumerate_markov_co_policies(g, agent, budget);
    auto universe = enumerate_markov_policies(g, agent, budget);
    out.co_count = static_cast<long long>(cos.size());

    std::map<std::string, int> slot;
    for (std::size_t c = 0; c < cos.size(); c++) {
        ValuedMarkovBestResponse br = best_response_set_markov(g, agent, cos[c], universe);
        ValuedBestResponse vbr{std::move(br.indices), br.value};

        auto [it, fresh] = slot.try_emplace(detail::vbr_key(vbr, valued),
                                            static_cast<int>(out.classes.size()));
        if (fresh) out.classes.push_back({{}, std::move(vbr)});
        out.classes[static_cast<std::size_t>(it->second)].members.push_back(static_cast<int>(c));
    }

    std::sort(out.classes.begin(), out.classes.end(),
              [](const Partition::Class& a, const Partition::Class& b) {
                  return a.members.front() < b.members.front();
              });
    return out;
}

// One-stage games reduce to their normal form directly; the partition over
// single-action co-policies is computed without any tree machinery beyond
// depth-1 trees. Longer horizons need the structured solvers.
inline Partition compute_ser_normal_form(const DecPomdp& g, int agent, bool valued,
                                         TreePool& pool,
                                         std::uint64_t budget = PolicyEnumerator::kDefaultBudget) {
    if (g.horizon != 1)
        throw UnsupportedModel("normal-form partition requires a one-stage game");
    return partition_by_best_response(g, agent, valued, pool, budget);
}

inline Partition compute_ser_normal_form(const DecPomdp& g, int agent, bool valued = true) {
    TreePool pool;
    return compute_ser_normal_form(g, agent, valued, pool);
}

}  // namespace vser
