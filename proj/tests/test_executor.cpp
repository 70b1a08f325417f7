#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "viexec/checkpoint.hpp"
#include "viexec/errors.hpp"
#include "viexec/executor.hpp"
#include "viexec/gradcheck.hpp"
#include "viexec/vi.hpp"

using namespace viexec;
using namespace viexec::test;

namespace {

MpnnParams random_params(const MpnnConfig& config, std::uint64_t seed) {
    Rng rng(seed);
    return MpnnParams::init(config, rng);
}

const MpnnConfig kVariants[] = {
    MpnnConfig::from_variant("MPNN-Sum", 16),  MpnnConfig::from_variant("MPNN-Mean", 16),
    MpnnConfig::from_variant("MPNN-Max", 16),  MpnnConfig::from_variant("MPNN-2-Sum", 16),
    MpnnConfig::from_variant("Attn-Sum", 16),
};

}  // namespace

TEST_CASE("config: variant naming round-trips") {
    for (const auto& config : kVariants) {
        CHECK(MpnnConfig::from_variant(config.variant(), 16) == config);
    }
    CHECK_THROWS_AS(MpnnConfig::from_variant("MPNN-Min"), ConfigError);
    MpnnConfig bad;
    bad.attention = true;
    bad.aggregator = Aggregator::max;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("build_action_graphs: single self-loop state echoes its features") {
    Mdp mdp = single_state_mdp(0.5, 0.9);
    const ActionGraphs graphs = build_action_graphs(mdp, {3.0});
    REQUIRE(graphs.actions.size() == 1);
    const ActionGraph& g = graphs.actions[0];
    CHECK(g.node_v == std::vector<double>{3.0});
    CHECK(g.node_r == std::vector<double>{0.5});
    CHECK(g.offsets == std::vector<int>{0, 1});
    CHECK(g.senders == std::vector<int>{0});
    CHECK(g.probs == std::vector<double>{1.0});
    CHECK(g.gamma == 0.9);
}

TEST_CASE("build_action_graphs: edge counts match successor lists") {
    const Mdp mdp = random_er_mdp(8, 3, 5);
    const ActionGraphs graphs = build_action_graphs(mdp, ValueFunction(8, 0.0));
    for (int a = 0; a < 3; ++a) {
        for (int s = 0; s < 8; ++s) {
            const int deg = graphs.actions[a].offsets[s + 1] - graphs.actions[a].offsets[s];
            CHECK(deg == static_cast<int>(mdp.successors(s, a).size()));
        }
    }
}

TEST_CASE("build_action_graphs: incoming probabilities sum to one per (state, action)") {
    const Mdp mdp = random_er_mdp(10, 4, 6);
    const ActionGraphs graphs = build_action_graphs(mdp, ValueFunction(10, 0.0));
    for (const auto& g : graphs.actions) {
        for (int v = 0; v < g.num_nodes; ++v) {
            double total = 0.0;
            for (int k = g.offsets[v]; k < g.offsets[v + 1]; ++k) total += g.probs[k];
            CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("message_pass: zero parameters give the update bias everywhere") {
    const Mdp mdp = random_er_mdp(6, 2, 7);
    MpnnConfig config;
    config.hidden_dim = 4;
    MpnnParams params = MpnnParams::zeros(config);
    params.update.b.value = {0.7, -0.25, 0.0, 1.5};
    const ActionGraphs graphs = build_action_graphs(mdp, ValueFunction(6, 1.0));
    const auto h = message_pass(graphs.actions[0], params);
    REQUIRE(h.size() == 6 * 4);
    for (int s = 0; s < 6; ++s) {
        for (int d = 0; d < 4; ++d) CHECK(h[s * 4 + d] == params.update.b.value[d]);
    }
}

TEST_CASE("message_pass: mean equals sum when every node has one incoming edge") {
    const Mdp mdp = single_state_mdp(0.3, 0.9);
    const ActionGraphs graphs = build_action_graphs(mdp, {2.0});
    MpnnParams sum_params = random_params(MpnnConfig::from_variant("MPNN-Sum", 8), 11);
    MpnnParams mean_params = sum_params;
    mean_params.config.aggregator = Aggregator::mean;
    CHECK(message_pass(graphs.actions[0], sum_params) ==
          message_pass(graphs.actions[0], mean_params));
}

TEST_CASE("attention weights are a softmax over each node's incoming edges") {
    const Mdp mdp = random_er_mdp(10, 3, 13);
    MpnnParams params = random_params(MpnnConfig::from_variant("Attn-Sum", 8), 14);
    const ActionGraphs graphs = build_action_graphs(mdp, ValueFunction(10, 0.5));
    ExecutorTape tape;
    executor_forward(graphs, params, tape);
    for (std::size_t a = 0; a < graphs.actions.size(); ++a) {
        const ActionGraph& g = graphs.actions[a];
        for (int v = 0; v < g.num_nodes; ++v) {
            double total = 0.0;
            for (int k = g.offsets[v]; k < g.offsets[v + 1]; ++k) {
                CHECK(tape.actions[a].alpha[k] >= 0.0);
                total += tape.actions[a].alpha[k];
            }
            CHECK(std::fabs(total - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("action_max: elementwise semantics") {
    const std::vector<std::vector<double>> identical = {{1.0, -1.0}, {1.0, -1.0}};
    CHECK(action_max(identical, 1, 2) == std::vector<double>{1.0, -1.0});
    const std::vector<std::vector<double>> two = {{1.0, -1.0}, {0.0, 0.0}};
    CHECK(action_max(two, 1, 2) == std::vector<double>{1.0, 0.0});
    const std::vector<std::vector<double>> single = {{0.25, 4.0}};
    CHECK(action_max(single, 1, 2) == std::vector<double>{0.25, 4.0});
}

TEST_CASE("decode: zero weights yield the bias constant") {
    MpnnConfig config;
    config.hidden_dim = 4;
    MpnnParams params = MpnnParams::zeros(config);
    params.decode.b.value = {0.125};
    const std::vector<double> hidden(5 * 4, 2.0);
    const ValueFunction out = decode_values(hidden, 5, params);
    REQUIRE(out.size() == 5);
    for (double x : out) CHECK(x == 0.125);
}

TEST_CASE("executor_step: output length and determinism") {
    const Mdp mdp = random_er_mdp(9, 3, 17);
    for (const auto& config : kVariants) {
        const MpnnParams params = random_params(config, 19);
        const ValueFunction a = executor_step(mdp, ValueFunction(9, 0.0), params);
        const ValueFunction b = executor_step(mdp, ValueFunction(9, 0.0), params);
        REQUIRE(a.size() == 9);
        for (double x : a) CHECK(std::isfinite(x));
        CHECK(a == b);
    }
}

TEST_CASE("executor_step: state-permutation equivariance for every variant") {
    Rng perm_rng(23);
    for (const auto& config : kVariants) {
        for (int trial = 0; trial < 4; ++trial) {
            const Mdp mdp = random_er_mdp(12, 3, derive_seed(1, "equivar", trial));
            const MpnnParams params = random_params(config, derive_seed(2, "equivar", trial));
            Rng val_rng(derive_seed(3, "equivar", trial));
            ValueFunction v(12);
            for (auto& x : v) x = val_rng.uniform(0.0, 10.0);

            const auto perm = random_permutation(12, perm_rng);
            const ValueFunction direct = permute_values(executor_step(mdp, v, params), perm);
            const ValueFunction relabeled =
                executor_step(permute_states(mdp, perm), permute_values(v, perm), params);
            for (int s = 0; s < 12; ++s) CHECK(std::fabs(direct[s] - relabeled[s]) <= 1e-9);
        }
    }
}

TEST_CASE("executor_step: action-permutation invariance for every variant") {
    Rng perm_rng(29);
    for (const auto& config : kVariants) {
        const Mdp mdp = random_er_mdp(10, 4, 31);
        const MpnnParams params = random_params(config, 37);
        Rng val_rng(41);
        ValueFunction v(10);
        for (auto& x : v) x = val_rng.uniform(0.0, 10.0);

        const auto perm = random_permutation(4, perm_rng);
        const ValueFunction base = executor_step(mdp, v, params);
        const ValueFunction relabeled = executor_step(permute_actions(mdp, perm), v, params);
        for (int s = 0; s < 10; ++s) CHECK(std::fabs(base[s] - relabeled[s]) <= 1e-9);
    }
}

TEST_CASE("sum aggregation is additive over edge-disjoint neighbourhood splits") {
    const Mdp mdp = random_er_mdp(8, 1, 43);
    MpnnParams params = random_params(MpnnConfig::from_variant("MPNN-Sum", 8), 47);
    ActionGraphs graphs = build_action_graphs(mdp, ValueFunction(8, 1.25));
    const ActionGraph& g = graphs.actions[0];

    // pick a node with at least two incoming edges and split them
    int node = -1;
    for (int v = 0; v < g.num_nodes; ++v) {
        if (g.offsets[v + 1] - g.offsets[v] >= 2) {
            node = v;
            break;
        }
    }
    REQUIRE(node >= 0);

    auto message_at = [&](const ActionGraph& graph) {
        ExecutorTape tape;
        tape.actions.resize(1);
        ActionGraphs one;
        one.num_states = graph.num_nodes;
        one.actions = {graph};
        executor_forward(one, params, tape);
        std::vector<double> m(8);
        for (int d = 0; d < 8; ++d) m[d] = tape.actions[0].m[node * 8 + d];
        return m;
    };

    const int begin = g.offsets[node], end = g.offsets[node + 1];
    const int mid = begin + (end - begin) / 2;
    auto slice = [&](int lo, int hi) {
        ActionGraph sub = g;
        sub.senders.assign(g.senders.begin() + lo, g.senders.begin() + hi);
        sub.probs.assign(g.probs.begin() + lo, g.probs.begin() + hi);
        sub.offsets.assign(g.num_nodes + 1, 0);
        for (int v = 0; v <= g.num_nodes; ++v) {
            sub.offsets[v] = std::clamp(g.offsets[v], lo, hi) - lo;
        }
        return sub;
    };

    const auto all = message_at(g);
    const auto left = message_at(slice(begin, mid));
    const auto right = message_at(slice(mid, end));
    for (int d = 0; d < 8; ++d) {
        CHECK(all[d] == doctest::Approx(left[d] + right[d]).epsilon(1e-12));
    }
}

TEST_CASE("end-to-end gradients verify for all five variants") {
    for (const auto& check : all_variant_grad_checks(1e-5, 1e-4, 16)) {
        INFO(check.variant);
        CHECK(check.report.pass);
    }
}

TEST_CASE("checkpoint round-trips bit-exactly for every variant") {
    for (const auto& config : kVariants) {
        const MpnnParams params = random_params(config, 53);
        const std::string text = checkpoint_to_json(params);
        const MpnnParams back = checkpoint_from_json(text);
        CHECK(back.config == params.config);
        const auto a = params.tensors();
        const auto b = back.tensors();
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i]->name == b[i]->name);
            CHECK(a[i]->value == b[i]->value);
        }
        // identical serialisation both ways
        CHECK(checkpoint_to_json(back) == text);
    }
}

TEST_CASE("checkpoint loading rejects tampered files") {
    const MpnnParams params = random_params(kVariants[0], 59);
    std::string text = checkpoint_to_json(params);
    CHECK_THROWS_AS(checkpoint_from_json("{}"), CheckpointMismatch);
    CHECK_THROWS_AS(checkpoint_from_json("not json"), CheckpointMismatch);
    const auto pos = text.find("\"encoder.weight\"");
    REQUIRE(pos != std::string::npos);
    std::string renamed = text;
    renamed.replace(pos, 16, "\"encoder.w3ight\"");
    CHECK_THROWS_AS(checkpoint_from_json(renamed), CheckpointMismatch);
}
