#pragma once

#include <vector>

#include "viexec/graphgen.hpp"
#include "viexec/mdp.hpp"
#include "viexec/rng.hpp"

namespace viexec::test {

// 1 state, 1 action, self-loop with probability 1
inline Mdp single_state_mdp(double reward, double gamma) {
    Mdp mdp;
    mdp.num_states = 1;
    mdp.num_actions = 1;
    mdp.gamma = gamma;
    mdp.transitions = {{{0, 1.0}}};
    mdp.rewards = {reward};
    return mdp;
}

// 2 states, 2 actions: action 0 self-loops with r=0, action 1 moves to the
// other state with r=1
inline Mdp two_state_switch_mdp(double gamma) {
    Mdp mdp;
    mdp.num_states = 2;
    mdp.num_actions = 2;
    mdp.gamma = gamma;
    mdp.transitions = {
        {{0, 1.0}},  // (s=0, a=0)
        {{1, 1.0}},  // (s=0, a=1)
        {{1, 1.0}},  // (s=1, a=0)
        {{0, 1.0}},  // (s=1, a=1)
    };
    mdp.rewards = {0.0, 1.0, 0.0, 1.0};
    return mdp;
}

inline Mdp random_er_mdp(int n, int a, std::uint64_t seed, double gamma = 0.9,
                         double p_edge = 0.3) {
    Rng rng(seed);
    const UndirectedGraph g = gen_erdos_renyi(n, p_edge, rng);
    return graph_to_mdp(g, a, gamma, rng);
}

inline std::vector<int> random_permutation(int n, Rng& rng) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.uniform_int(i)]);
    }
    return perm;
}

}  // namespace viexec::test
