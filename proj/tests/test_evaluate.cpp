#include <catch2/catch_amalgamated.hpp>

#include "vser/envs.hpp"
#include "vser/evaluate.hpp"
#include "vser/policy.hpp"

using namespace vser;

namespace {

// One agent, one state, one action, reward 1 per step: a pure discounting
// testbed.
DecPomdp discount_chain(int horizon, Rat gamma) {
    DecPomdp g;
    g.name = "chain";
    g.agents = 1;
    g.horizon = horizon;
    g.discount = gamma;
    g.states = {"s"};
    g.actions = {{"wait"}};
    g.observations = {{"none"}};
    g.start = {{0, Rat(1)}};
    g.transition.assign(1, std::vector<ProbRow>(1, ProbRow{{0, Rat(1)}}));
    g.obs.assign(1, std::vector<ProbRow>(1, ProbRow{{0, Rat(1)}}));
    g.set_reward(0, 0, 0, Rat(1));
    g.validate();
    return g;
}

}  // namespace

TEST_CASE("one-shot returns read the payoff matrix", "[evaluate]") {
    DecPomdp g = build_matrix_game();
    TreePool pool;
    auto rows = enumerate_pure_policies(g, 0, 1, pool);
    auto cols = enumerate_pure_policies(g, 1, 1, pool);
    auto val = [&](int r, int c) { return expected_return(g, pool, {rows[r], cols[c]}); };
    CHECK(val(0, 0) == Rat(1));
    CHECK(val(0, 1) == Rat(0));
    CHECK(val(0, 2) == Rat(1));
    CHECK(val(1, 0) == Rat(0));
    CHECK(val(1, 1) == Rat(1));
    CHECK(val(1, 2) == Rat(0));
}

TEST_CASE("discounting applies per step", "[evaluate]") {
    DecPomdp g = discount_chain(3, Rat(1, 2));
    TreePool pool;
    auto trees = enumerate_pure_policies(g, 0, 3, pool);
    REQUIRE(trees.size() == 1);
    CHECK(expected_return(g, pool, {trees[0]}) == Rat(7, 4));
}

TEST_CASE("tree and state-feedback evaluation agree on a fully observed game", "[evaluate]") {
    DecPomdp g = build_two_step_game();
    TreePool pool;
    auto trees = enumerate_pure_policies(g, 0, 2, pool);
    std::vector<std::string> names = {"a", "b"};
    // all-a for both agents: (a,a) -> s2, (a,a) pays 1.
    CHECK(expected_return(g, pool, {trees[0], trees[0]}) == Rat(1));
    MarkovPolicy m0{0, {{0, 0, 0}, {0, 0, 0}}};
    MarkovPolicy m1{1, {{0, 0, 0}, {0, 0, 0}}};
    CHECK(expected_return(g, {m0, m1}) == Rat(1));
    // Mismatch at the root: (a,b) -> s3; then both b pays 1.
    MarkovPolicy d0{0, {{0, 0, 0}, {0, 0, 1}}};
    MarkovPolicy d1{1, {{1, 0, 0}, {0, 0, 1}}};
    CHECK(expected_return(g, {d0, d1}) == Rat(1));
    MarkovPolicy e1{1, {{1, 0, 0}, {0, 0, 0}}};
    CHECK(expected_return(g, {d0, e1}) == Rat(0));
}

TEST_CASE("best responses in the one-shot game", "[evaluate]") {
    DecPomdp g = build_matrix_game();
    TreePool pool;
    auto cols = enumerate_pure_policies(g, 1, 1, pool);
    auto rows = enumerate_pure_policies(g, 0, 1, pool);

    CoPolicy vs_c = {-1, cols[0]};
    auto br_c = best_response_set(g, 0, vs_c, pool);
    CHECK(br_c.value == Rat(1));
    CHECK(br_c.trees == std::vector<int>{rows[0]});

    CoPolicy vs_d = {-1, cols[1]};
    auto br_d = best_response_set(g, 0, vs_d, pool);
    CHECK(br_d.trees == std::vector<int>{rows[1]});

    // C and E induce the same valued best-response set; D a different one.
    auto br_e = best_response_set(g, 0, CoPolicy{-1, cols[2]}, pool);
    CHECK(br_c == br_e);
    CHECK_FALSE(br_c == br_d);

    // Against row A, both C and E are best for the column agent.
    auto br_a = best_response_set(g, 1, CoPolicy{rows[0], -1}, pool);
    CHECK(br_a.value == Rat(1));
    CHECK(br_a.trees == std::vector<int>{cols[0], cols[2]});
}

TEST_CASE("signalling conventions split best-response values", "[evaluate]") {
    DecPomdp g = build_referential_game();
    TreePool pool;
    auto senders = enumerate_pure_policies(g, 0, 2, pool);
    REQUIRE(senders.size() == 16);
    std::vector<std::string> rnames = {"guess_full", "guess_empty"};

    // Senders come root-major: 0..3 have root order01, 8..11 root const0.
    auto br_info = best_response_set(g, 1, CoPolicy{senders[0], -1}, pool);
    CHECK(br_info.value == Rat(1));
    REQUIRE(br_info.trees.size() == 2);
    for (int t : br_info.trees) {
        CHECK(pool.child(t, 0) >= 0);
        CHECK(pool.node(pool.child(t, 0)).action == 0);  // bit0 -> guess_full
        CHECK(pool.node(pool.child(t, 1)).action == 1);  // bit1 -> guess_empty
    }

    auto br_const = best_response_set(g, 1, CoPolicy{senders[8], -1}, pool);
    CHECK(br_const.value == Rat(1, 2));
    CHECK(br_const.trees.size() == 8);  // everything ties at a coin flip
}

TEST_CASE("belief updates are exact and flag impossible observations", "[evaluate]") {
    DecPomdp g = build_referential_game();
    Belief b;
    b.probs = g.start;

    int ja = g.joint_action({0, 0});  // order01, guess_full
    auto up0 = belief_update(g, b, ja, g.joint_obs({0, 0}));
    REQUIRE(up0.possible);
    CHECK(up0.likelihood == Rat(1, 2));
    CHECK(up0.posterior.probs == ProbRow{{2, Rat(1)}});

    auto up1 = belief_update(g, b, ja, g.joint_obs({0, 1}));
    REQUIRE(up1.possible);
    CHECK(up1.posterior.probs == ProbRow{{3, Rat(1)}});

    // Likelihoods over all joint observations sum to one.
    Rat total;
    for (int jo = 0; jo < g.num_joint_obs(); jo++) total += belief_update(g, b, ja, jo).likelihood;
    CHECK(total == Rat(1));

    int ja_const1 = g.joint_action({3, 0});
    auto imp = belief_update(g, b, ja_const1, g.joint_obs({0, 0}));
    CHECK_FALSE(imp.possible);
    CHECK(imp.likelihood == Rat(0));
    CHECK(imp.posterior.probs.empty());
}

TEST_CASE("co-policy prefixes are filtered by history consistency", "[evaluate]") {
    DecPomdp g = build_referential_game();
    TreePool pool;
    auto prefixes = enumerate_co_policies(g, 1, 1, pool);
    REQUIRE(prefixes.size() == 4);

    History h;
    h.agent = 1;
    h.entries = {{0, 0}};  // played guess_full, observed bit0
    auto ok = consistent_co_prefixes(g, pool, h, prefixes);
    REQUIRE(ok.size() == 3);  // const1 can never produce bit0
    std::vector<int> roots;
    for (auto& co : ok) roots.push_back(pool.node(co[0]).action);
    CHECK(roots == std::vector<int>{0, 1, 2});

    History h1;
    h1.agent = 1;
    h1.entries = {{1, 1}};  // observed bit1 instead
    auto ok1 = consistent_co_prefixes(g, pool, h1, prefixes);
    std::vector<int> roots1;
    for (auto& co : ok1) roots1.push_back(pool.node(co[0]).action);
    CHECK(roots1 == std::vector<int>{0, 1, 3});
}

TEST_CASE("one-shot-deviation check on the routing game", "[evaluate]") {
    DecPomdp g = build_two_step_game();
    MarkovPolicy good0{0, {{0, 0, 0}, {0, 0, 1}}};  // a at s1; a at s2, b at s3
    MarkovPolicy good1{1, {{0, 0, 0}, {0, 0, 1}}};
    CHECK(nash_check(g, {good0, good1}).holds);

    // Agent 1 switching to b at s2 breaks the match there; the scan reports
    // the earliest profitable deviation, which is agent 0 rerouting at the
    // root to reach s3 where both still play b.
    MarkovPolicy bad1{1, {{0, 0, 0}, {0, 1, 1}}};
    auto rep = nash_check(g, {good0, bad1});
    CHECK_FALSE(rep.holds);
    CHECK(rep.agent == 0);
    CHECK(rep.state == 0);
    CHECK(rep.t == 0);
    CHECK(rep.action == 1);

    CHECK_THROWS_AS(nash_check(build_referential_game(), {good0, good1}), UnsupportedModel);
}
