#pragma once

#include <string>
#include <vector>

#include "viexec/mdp.hpp"
#include "viexec/nn.hpp"
#include "viexec/rng.hpp"

namespace viexec {

enum class Aggregator { sum, mean, max };

std::string aggregator_name(Aggregator a);
Aggregator aggregator_from_name(const std::string& name);

/// Architecture switches for the executor. The five named variants are
/// MPNN-Sum, MPNN-Mean, MPNN-Max, MPNN-2-Sum and Attn-Sum.
struct MpnnConfig {
    int hidden_dim = 32;
    Aggregator aggregator = Aggregator::sum;
    int message_depth = 1;  // 1 = affine message, 2 = rectified two-layer MLP
    bool attention = false;

    /// Throws ConfigError if the switches are inconsistent (attention forces
    /// sum aggregation and message_depth 1).
    void validate() const;

    std::string variant() const;
    static MpnnConfig from_variant(const std::string& name, int hidden_dim = 32);

    bool operator==(const MpnnConfig&) const = default;
};

/// All learnable weights. One parameter set is shared across every value
/// iteration step and every action graph.
struct MpnnParams {
    MpnnConfig config;
    AffineLayer encoder;      // hidden x 2, input (v(s), r(s,a))
    AffineLayer message;      // hidden x (2*hidden+2), depth-1 message function
    TwoLayerMlp message_mlp;  // depth-2 message function
    AffineLayer attn_score;   // 1 x (2*hidden+2)
    AffineLayer attn_value;   // hidden x hidden, value projection of the sender
    AffineLayer update;       // hidden x 2*hidden, input (h_v^0, m_v)
    AffineLayer decode;       // 1 x hidden

    static MpnnParams init(const MpnnConfig& config, Rng& rng);

    /// Allocates all active layers with zero values (used by checkpoint loading).
    static MpnnParams zeros(const MpnnConfig& config);

    /// Active tensors in a fixed, stable order.
    std::vector<ParamTensor*> tensors();
    std::vector<const ParamTensor*> tensors() const;

    void zero_grads();
};

/// Featurized graph for one action: node features x_s = (v(s), r(s,a)),
/// message edges oriented successor -> state with features (gamma, p).
/// Incoming edges of node v occupy [offsets[v], offsets[v+1]).
struct ActionGraph {
    int num_nodes = 0;
    double gamma = 0.0;
    std::vector<int> offsets;   // num_nodes + 1
    std::vector<int> senders;   // successor state per edge
    std::vector<double> probs;  // p(s'|s,a) per edge
    std::vector<double> node_v;
    std::vector<double> node_r;

    int num_edges() const { return static_cast<int>(senders.size()); }
};

struct ActionGraphs {
    int num_states = 0;
    std::vector<ActionGraph> actions;
};

ActionGraphs build_action_graphs(const Mdp& mdp, const ValueFunction& v);

/// Intermediate activations of one executor step, kept for the backward pass.
/// Reusable across steps; buffers are resized on demand.
struct ExecutorTape {
    struct ActionTape {
        std::vector<double> h0;      // n*H encoded node features
        std::vector<double> m;       // n*H aggregated messages
        std::vector<double> h;       // n*H updated hiddens
        std::vector<double> z1;      // E*H message-MLP pre-activations (depth 2)
        std::vector<double> alpha;   // E attention weights
        std::vector<double> val;     // n*H value projections (attention)
        std::vector<int> max_edge;   // n*H winning edge per dimension (max agg)
    };
    std::vector<ActionTape> actions;
    std::vector<double> hmax;        // n*H elementwise max over actions
    std::vector<int> argmax_action;  // n*H winning action per dimension
    std::vector<double> out;         // n decoded values

    // scratch shared across actions
    std::vector<double> recv_term, send_term;      // n*H decomposed message terms
    std::vector<double> scalar_recv, scalar_send;  // n attention score terms
    std::vector<double> edge_grad;                 // E*H message gradients (backward)
    std::vector<double> edge_scalar;               // E score gradients (backward)
    std::vector<double> grad_h, grad_h0, grad_m, grad_recv, grad_send;  // n*H backward scratch
};

/// One message-passing pass over a single action graph; returns the per-node
/// hidden vectors h_s (n*H, row-major).
std::vector<double> message_pass(const ActionGraph& graph, const MpnnParams& params);

/// Elementwise max over per-action hidden blocks.
std::vector<double> action_max(const std::vector<std::vector<double>>& per_action, int num_nodes,
                               int hidden_dim);

/// Applies the decoder to each node's hidden vector.
ValueFunction decode_values(const std::vector<double>& hidden, int num_nodes, const MpnnParams& params);

/// Full executor step on prebuilt graphs; fills the tape and returns tape.out.
void executor_forward(const ActionGraphs& graphs, const MpnnParams& params, ExecutorTape& tape);

/// Accumulates parameter gradients for upstream gradient g_out (dL/d out).
void executor_backward(const ActionGraphs& graphs, MpnnParams& params, ExecutorTape& tape,
                       const std::vector<double>& g_out);

/// One emulated value iteration update: v' = decode(max_a MP(G_a, v)).
ValueFunction executor_step(const Mdp& mdp, const ValueFunction& v, const MpnnParams& params);

/// Forward + MSE against target + backward with d(loss)/d(pred) scaled by
/// grad_scale. Returns the unscaled step MSE.
double step_loss_grad(const Mdp& mdp, const ValueFunction& v_in, const ValueFunction& target,
                      MpnnParams& params, ExecutorTape& tape, double grad_scale);

}  // namespace viexec
