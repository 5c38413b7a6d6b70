#pragma once

#include <string>
#include <vector>

#include "vser/kitchen.hpp"
#include "vser/model.hpp"

namespace vser {

// A one-shot common-payoff matrix game wrapped as a horizon-1 model with a
// single state. Payoffs: row action A earns 1 against C and E; row action B
// earns 1 against D.
inline DecPomdp build_matrix_game() {
    DecPomdp g;
    g.name = "matrix";
    g.agents = 2;
    g.horizon = 1;
    g.discount = Rat(1);
    g.states = {"s0"};
    g.actions = {{"A", "B"}, {"C", "D", "E"}};
    g.observations = {{"none"}, {"none"}};
    g.start = {{0, Rat(1)}};
    const int nja = g.num_joint_actions();
    g.transition.assign(1, std::vector<ProbRow>(nja, ProbRow{{0, Rat(1)}}));
    g.obs.assign(1, std::vector<ProbRow>(nja, ProbRow{{0, Rat(1)}}));
    auto pay = [&](const char* x, const char* y, long r) {
        int ja = g.joint_action({g.action_index(0, x), g.action_index(1, y)});
        g.set_reward(0, ja, 0, Rat(r));
    };
    pay("A", "C", 1);
    pay("A", "D", 0);
    pay("A", "E", 1);
    pay("B", "C", 0);
    pay("B", "D", 1);
    pay("B", "E", 0);
    g.validate();
    return g;
}

// Two stages, fully observed. Stage one routes: both agents playing a leads
// to the coordination state s2 (match on anything), otherwise to s3 where
// only (b, b) pays.
inline DecPomdp build_two_step_game() {
    DecPomdp g;
    g.name = "two_step";
    g.agents = 2;
    g.horizon = 2;
    g.discount = Rat(1);
    g.fully_observed = true;
    g.states = {"s1", "s2", "s3"};
    g.actions = {{"a", "b"}, {"a", "b"}};
    g.start = {{0, Rat(1)}};
    const int nja = g.num_joint_actions();
    g.transition.assign(3, std::vector<ProbRow>(nja));
    int aa = g.joint_action({0, 0});
    int ab = g.joint_action({0, 1});
    int ba = g.joint_action({1, 0});
    int bb = g.joint_action({1, 1});
    for (int ja = 0; ja < nja; ja++) {
        g.transition[0][ja] = ProbRow{{ja == aa ? 1 : 2, Rat(1)}};
        g.transition[1][ja] = ProbRow{{1, Rat(1)}};
        g.transition[2][ja] = ProbRow{{2, Rat(1)}};
    }
    g.set_reward(1, aa, 1, Rat(1));
    g.set_reward(1, bb, 1, Rat(1));
    g.set_reward(2, bb, 2, Rat(1));
    g.install_full_observability();
    g.validate();
    return g;
}

// A signalling game. Nature fills or empties a jar (uniform); the sender sees
// which and commits to a signalling convention; the receiver observes the
// resulting bit and then guesses the jar's contents. Conventions: order01
// signals full as bit0, order10 the reverse, const0/const1 ignore the jar.
inline DecPomdp build_referential_game() {
    DecPomdp g;
    g.name = "referential";
    g.agents = 2;
    g.horizon = 2;
    g.discount = Rat(1);
    g.states = {"fresh_full", "fresh_empty", "armed_full", "armed_empty"};
    g.actions = {{"order01", "order10", "const0", "const1"}, {"guess_full", "guess_empty"}};
    g.observations = {{"none"}, {"bit0", "bit1"}};
    g.start = {{0, Rat(1, 2)}, {1, Rat(1, 2)}};
    const int nja = g.num_joint_actions();
    g.transition.assign(4, std::vector<ProbRow>(nja));
    g.obs.assign(4, std::vector<ProbRow>(nja));
    for (int ja = 0; ja < nja; ja++) {
        g.transition[0][ja] = ProbRow{{2, Rat(1)}};  // fresh_full  -> armed_full
        g.transition[1][ja] = ProbRow{{3, Rat(1)}};  // fresh_empty -> armed_empty
        g.transition[2][ja] = ProbRow{{2, Rat(1)}};
        g.transition[3][ja] = ProbRow{{3, Rat(1)}};
    }
    // The receiver's bit is a function of the landed state and the sender's
    // convention. Joint observation index = receiver bit (sender has a single
    // observation), so it equals the bit value.
    auto bit_for = [&](int s2, int sender_action) -> int {
        bool full = (s2 == 2);
        switch (sender_action) {
            case 0: return full ? 0 : 1;  // order01
            case 1: return full ? 1 : 0;  // order10
            case 2: return 0;             // const0
            default: return 1;            // const1
        }
    };
    for (int s2 = 0; s2 < 4; s2++)
        for (int ja = 0; ja < nja; ja++) {
            int bit = (s2 >= 2) ? bit_for(s2, g.action_of(ja, 0)) : 0;
            g.obs[s2][ja] = ProbRow{{g.joint_obs({0, bit}), Rat(1)}};
        }
    for (int ja = 0; ja < nja; ja++) {
        if (g.action_of(ja, 1) == 0) g.set_reward(2, ja, 2, Rat(1));  // guess_full on armed_full
        if (g.action_of(ja, 1) == 1) g.set_reward(3, ja, 3, Rat(1));  // guess_empty on armed_empty
    }
    g.validate();
    return g;
}

}  // namespace vser
