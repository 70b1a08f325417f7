#include <doctest.h>

#include <stdexcept>

#include "helpers.hpp"
#include "viexec/graphgen.hpp"
#include "viexec/mdp.hpp"

using namespace viexec;
using namespace viexec::test;

TEST_CASE("validate: self-loop MDP is clean") {
    CHECK(validate(single_state_mdp(0.0, 0.9)).empty());
}

TEST_CASE("validate: probability mass must sum to one") {
    Mdp mdp = single_state_mdp(0.0, 0.9);
    mdp.transitions[0][0].prob = 0.5;
    const auto report = validate(mdp);
    REQUIRE(report.size() == 1);
    CHECK(report[0].find("sum to 0.5") != std::string::npos);
    CHECK(report[0].find("(s=0, a=0)") != std::string::npos);
}

TEST_CASE("validate: gamma must be below one") {
    Mdp mdp = single_state_mdp(0.0, 1.0);
    const auto report = validate(mdp);
    REQUIRE(report.size() == 1);
    CHECK(report[0].find("gamma") != std::string::npos);
}

TEST_CASE("validate: duplicate and unsorted successors are reported") {
    Mdp mdp = single_state_mdp(0.0, 0.9);
    mdp.transitions[0] = {{0, 0.5}, {0, 0.5}};
    CHECK(!validate(mdp).empty());
}

TEST_CASE("successors: echoes construction in ascending order") {
    Mdp mdp;
    mdp.num_states = 2;
    mdp.num_actions = 1;
    mdp.gamma = 0.9;
    mdp.transitions = {{{0, 0.7}, {1, 0.3}}, {{1, 1.0}}};
    mdp.rewards = {0.0, 0.0};
    const auto& succ = mdp.successors(0, 0);
    REQUIRE(succ.size() == 2);
    CHECK(succ[0].next == 0);
    CHECK(succ[0].prob == doctest::Approx(0.7));
    CHECK(succ[1].next == 1);
    CHECK(succ[1].prob == doctest::Approx(0.3));
}

TEST_CASE("successors: out-of-range action is an index error") {
    const Mdp mdp = random_er_mdp(4, 5, 99);
    CHECK_THROWS_AS(mdp.successors(0, 5), std::out_of_range);
    CHECK_THROWS_AS(mdp.successors(-1, 0), std::out_of_range);
    CHECK_THROWS_AS(mdp.successors(4, 0), std::out_of_range);
}

TEST_CASE("edge_set: self-loop MDP") {
    const auto edges = edge_set(single_state_mdp(0.0, 0.9));
    CHECK(edges == std::set<std::pair<int, int>>{{0, 0}});
}

TEST_CASE("edge_set: covers all nonzero transitions of a line graph MDP") {
    Rng rng(5);
    const UndirectedGraph g = gen_line(3);
    const Mdp mdp = graph_to_mdp(g, 2, 0.9, rng);
    const auto edges = edge_set(mdp);
    // candidates per node are its line neighbours plus the self-loop
    const std::set<std::pair<int, int>> allowed = {{0, 0}, {0, 1}, {1, 0}, {1, 1},
                                                   {1, 2}, {2, 1}, {2, 2}};
    for (const auto& e : edges) CHECK(allowed.count(e) == 1);
    // uniform transitions place mass on every candidate, so both
    // orientations of each line edge are always present
    CHECK(edges.count({0, 1}) == 1);
    CHECK(edges.count({1, 0}) == 1);
    CHECK(edges == allowed);
}

TEST_CASE("successor probabilities partition unity") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const Mdp mdp = random_er_mdp(15, 4, seed);
        for (int s = 0; s < mdp.num_states; ++s) {
            for (int a = 0; a < mdp.num_actions; ++a) {
                double total = 0.0;
                for (const auto& t : mdp.successors(s, a)) total += t.prob;
                CHECK(std::fabs(total - 1.0) <= 1e-9);
            }
        }
    }
}

TEST_CASE("dataset round-trip is loss-free") {
    for (std::uint64_t seed : {10ull, 11ull}) {
        const Mdp mdp = random_er_mdp(12, 3, seed);
        const Mdp back = mdp_from_json(mdp_to_json(mdp));
        CHECK(validate(back).empty());
        CHECK(back.num_states == mdp.num_states);
        CHECK(back.num_actions == mdp.num_actions);
        CHECK(back.gamma == mdp.gamma);
        REQUIRE(back.transitions.size() == mdp.transitions.size());
        for (std::size_t i = 0; i < mdp.transitions.size(); ++i) {
            REQUIRE(back.transitions[i].size() == mdp.transitions[i].size());
            for (std::size_t k = 0; k < mdp.transitions[i].size(); ++k) {
                CHECK(back.transitions[i][k].next == mdp.transitions[i][k].next);
                CHECK(std::fabs(back.transitions[i][k].prob - mdp.transitions[i][k].prob) <= 1e-12);
            }
        }
        for (std::size_t i = 0; i < mdp.rewards.size(); ++i) {
            CHECK(std::fabs(back.rewards[i] - mdp.rewards[i]) <= 1e-12);
        }
        // serialisation itself is idempotent
        CHECK(mdp_to_json(back) == mdp_to_json(mdp));
    }
}

TEST_CASE("permute_states: relabels consistently") {
    const Mdp mdp = random_er_mdp(8, 3, 21);
    Rng rng(4);
    const auto perm = random_permutation(8, rng);
    const Mdp permuted = permute_states(mdp, perm);
    CHECK(validate(permuted).empty());
    for (int s = 0; s < 8; ++s) {
        for (int a = 0; a < 3; ++a) {
            CHECK(permuted.reward(perm[s], a) == mdp.reward(s, a));
            CHECK(permuted.successors(perm[s], a).size() == mdp.successors(s, a).size());
        }
    }
}
