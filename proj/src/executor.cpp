#include "viexec/executor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "viexec/errors.hpp"

namespace viexec {

std::string aggregator_name(Aggregator a) {
    switch (a) {
        case Aggregator::sum: return "sum";
        case Aggregator::mean: return "mean";
        case Aggregator::max: return "max";
    }
    throw std::invalid_argument("unknown aggregator");
}

Aggregator aggregator_from_name(const std::string& name) {
    if (name == "sum") return Aggregator::sum;
    if (name == "mean") return Aggregator::mean;
    if (name == "max") return Aggregator::max;
    throw ConfigError("unknown aggregator: " + name);
}

void MpnnConfig::validate() const {
    if (hidden_dim < 1) throw ConfigError("hidden_dim must be positive");
    if (message_depth != 1 && message_depth != 2) throw ConfigError("message_depth must be 1 or 2");
    if (attention && (aggregator != Aggregator::sum || message_depth != 1)) {
        throw ConfigError("attention requires sum aggregation and message_depth 1");
    }
}

std::string MpnnConfig::variant() const {
    if (attention) return "Attn-Sum";
    std::string agg = aggregator_name(aggregator);
    agg[0] = static_cast<char>(std::toupper(agg[0]));
    return message_depth == 2 ? "MPNN-2-" + agg : "MPNN-" + agg;
}

MpnnConfig MpnnConfig::from_variant(const std::string& name, int hidden_dim) {
    MpnnConfig c;
    c.hidden_dim = hidden_dim;
    if (name == "MPNN-Sum") {
        c.aggregator = Aggregator::sum;
    } else if (name == "MPNN-Mean") {
        c.aggregator = Aggregator::mean;
    } else if (name == "MPNN-Max") {
        c.aggregator = Aggregator::max;
    } else if (name == "MPNN-2-Sum") {
        c.aggregator = Aggregator::sum;
        c.message_depth = 2;
    } else if (name == "Attn-Sum") {
        c.aggregator = Aggregator::sum;
        c.attention = true;
    } else {
        throw ConfigError("unknown variant: " + name);
    }
    c.validate();
    return c;
}

MpnnParams MpnnParams::zeros(const MpnnConfig& config) {
    config.validate();
    const int h = config.hidden_dim;
    const int cat = 2 * h + 2;
    MpnnParams p;
    p.config = config;
    p.encoder = AffineLayer("encoder", h, 2);
    if (config.attention) {
        p.attn_score = AffineLayer("attention_score", 1, cat);
        p.attn_value = AffineLayer("attention_value", h, h);
    } else if (config.message_depth == 2) {
        p.message_mlp = TwoLayerMlp("message", h, h, cat);
    } else {
        p.message = AffineLayer("message", h, cat);
    }
    p.update = AffineLayer("update", h, 2 * h);
    p.decode = AffineLayer("decode", 1, h);
    return p;
}

MpnnParams MpnnParams::init(const MpnnConfig& config, Rng& rng) {
    MpnnParams p = MpnnParams::zeros(config);
    glorot_init(p.encoder, rng);
    if (config.attention) {
        glorot_init(p.attn_score, rng);
        glorot_init(p.attn_value, rng);
    } else if (config.message_depth == 2) {
        glorot_init(p.message_mlp.first, rng);
        glorot_init(p.message_mlp.second, rng);
    } else {
        glorot_init(p.message, rng);
    }
    glorot_init(p.update, rng);
    glorot_init(p.decode, rng);
    return p;
}

std::vector<ParamTensor*> MpnnParams::tensors() {
    std::vector<ParamTensor*> out;
    out.push_back(&encoder.W);
    out.push_back(&encoder.b);
    if (config.attention) {
        out.push_back(&attn_score.W);
        out.push_back(&attn_score.b);
        out.push_back(&attn_value.W);
        out.push_back(&attn_value.b);
    } else if (config.message_depth == 2) {
        out.push_back(&message_mlp.first.W);
        out.push_back(&message_mlp.first.b);
        out.push_back(&message_mlp.second.W);
        out.push_back(&message_mlp.second.b);
    } else {
        out.push_back(&message.W);
        out.push_back(&message.b);
    }
    out.push_back(&update.W);
    out.push_back(&update.b);
    out.push_back(&decode.W);
    out.push_back(&decode.b);
    return out;
}

std::vector<const ParamTensor*> MpnnParams::tensors() const {
    auto mutable_tensors = const_cast<MpnnParams*>(this)->tensors();
    return {mutable_tensors.begin(), mutable_tensors.end()};
}

void MpnnParams::zero_grads() {
    for (auto* t : tensors()) t->zero_grad();
}

ActionGraphs build_action_graphs(const Mdp& mdp, const ValueFunction& v) {
    if (static_cast<int>(v.size()) != mdp.num_states) {
        throw std::invalid_argument("build_action_graphs: value vector length mismatch");
    }
    ActionGraphs graphs;
    graphs.num_states = mdp.num_states;
    graphs.actions.resize(mdp.num_actions);
    for (int a = 0; a < mdp.num_actions; ++a) {
        ActionGraph& g = graphs.actions[a];
        g.num_nodes = mdp.num_states;
        g.gamma = mdp.gamma;
        g.offsets.assign(mdp.num_states + 1, 0);
        g.node_v = v;
        g.node_r.resize(mdp.num_states);
        for (int s = 0; s < mdp.num_states; ++s) {
            g.node_r[s] = mdp.reward(s, a);
            const auto& succ = mdp.transitions[static_cast<std::size_t>(s) * mdp.num_actions + a];
            g.offsets[s + 1] = g.offsets[s] + static_cast<int>(succ.size());
            for (const auto& t : succ) {
                g.senders.push_back(t.next);
                g.probs.push_back(t.prob);
            }
        }
    }
    return graphs;
}

namespace {

void resize_buffer(std::vector<double>& buf, std::size_t n) {
    if (buf.size() < n) buf.resize(n);
}

void resize_buffer(std::vector<int>& buf, std::size_t n) {
    if (buf.size() < n) buf.resize(n);
}

// h0 = encoder(v, r) per node
void encode_nodes(const ActionGraph& g, const MpnnParams& p, double* h0) {
    const int h = p.config.hidden_dim;
    const double* we = p.encoder.W.value.data();  // h x 2
    const double* be = p.encoder.b.value.data();
    for (int s = 0; s < g.num_nodes; ++s) {
        const double xv = g.node_v[s], xr = g.node_r[s];
        double* row = h0 + static_cast<std::size_t>(s) * h;
        for (int d = 0; d < h; ++d) row[d] = we[2 * d] * xv + we[2 * d + 1] * xr + be[d];
    }
}

// y[s] = block . h0[s] for every node, where block is rows x rows taken from
// columns [col0, col0+rows) of a rows x cols matrix
void node_block_matvec(const double* block_owner, int cols, int col0, int rows, const double* h0,
                       int num_nodes, double* out) {
    for (int s = 0; s < num_nodes; ++s) {
        const double* x = h0 + static_cast<std::size_t>(s) * rows;
        double* y = out + static_cast<std::size_t>(s) * rows;
        for (int d = 0; d < rows; ++d) {
            const double* wr = block_owner + static_cast<std::size_t>(d) * cols + col0;
            double acc = 0.0;
            for (int c = 0; c < rows; ++c) acc += wr[c] * x[c];
            y[d] = acc;
        }
    }
}

// y[s] += block^T . g[s] for every node
void node_block_matvec_t(const double* block_owner, int cols, int col0, int rows, const double* grad,
                         int num_nodes, double* out) {
    for (int s = 0; s < num_nodes; ++s) {
        const double* gy = grad + static_cast<std::size_t>(s) * rows;
        double* gx = out + static_cast<std::size_t>(s) * rows;
        for (int d = 0; d < rows; ++d) {
            const double g = gy[d];
            if (g == 0.0) continue;
            const double* wr = block_owner + static_cast<std::size_t>(d) * cols + col0;
            for (int c = 0; c < rows; ++c) gx[c] += wr[c] * g;
        }
    }
}

// dBlock[d][c] += sum_s g[s][d] * h0[s][c]
void node_block_outer(const double* grad, const double* h0, int num_nodes, int rows, int cols,
                      int col0, double* dblock) {
    for (int s = 0; s < num_nodes; ++s) {
        const double* g = grad + static_cast<std::size_t>(s) * rows;
        const double* x = h0 + static_cast<std::size_t>(s) * rows;
        for (int d = 0; d < rows; ++d) {
            const double gd = g[d];
            if (gd == 0.0) continue;
            double* row = dblock + static_cast<std::size_t>(d) * cols + col0;
            for (int c = 0; c < rows; ++c) row[c] += gd * x[c];
        }
    }
}

void forward_action(const ActionGraph& g, const MpnnParams& p, ExecutorTape& tape,
                    ExecutorTape::ActionTape& at) {
    const int h = p.config.hidden_dim;
    const int n = g.num_nodes;
    const int cat = 2 * h + 2;
    const std::size_t nh = static_cast<std::size_t>(n) * h;

    resize_buffer(at.h0, nh);
    resize_buffer(at.m, nh);
    resize_buffer(at.h, nh);
    encode_nodes(g, p, at.h0.data());

    if (p.config.attention) {
        // value projection per sender node, shared across its outgoing edges
        resize_buffer(at.val, nh);
        for (int s = 0; s < n; ++s) {
            p.attn_value.forward(at.h0.data() + static_cast<std::size_t>(s) * h,
                                 at.val.data() + static_cast<std::size_t>(s) * h);
        }
        // score = attn_score(h_v, h_w, gamma, p) decomposed into node terms
        resize_buffer(tape.scalar_recv, static_cast<std::size_t>(n));
        resize_buffer(tape.scalar_send, static_cast<std::size_t>(n));
        const double* ws = p.attn_score.W.value.data();  // 1 x cat
        for (int s = 0; s < n; ++s) {
            const double* x = at.h0.data() + static_cast<std::size_t>(s) * h;
            double racc = 0.0, sacc = 0.0;
            for (int c = 0; c < h; ++c) {
                racc += ws[c] * x[c];
                sacc += ws[h + c] * x[c];
            }
            tape.scalar_recv[s] = racc;
            tape.scalar_send[s] = sacc;
        }
        const double score_base = g.gamma * ws[2 * h] + p.attn_score.b.value[0];
        const double score_p = ws[2 * h + 1];

        resize_buffer(at.alpha, g.probs.size());
        for (int v = 0; v < n; ++v) {
            const int begin = g.offsets[v], end = g.offsets[v + 1];
            double* m = at.m.data() + static_cast<std::size_t>(v) * h;
            std::fill(m, m + h, 0.0);
            if (begin == end) continue;
            double max_score = -std::numeric_limits<double>::infinity();
            for (int k = begin; k < end; ++k) {
                const double sc = tape.scalar_recv[v] + tape.scalar_send[g.senders[k]] + score_base +
                                  g.probs[k] * score_p;
                at.alpha[k] = sc;
                max_score = std::max(max_score, sc);
            }
            double total = 0.0;
            for (int k = begin; k < end; ++k) {
                at.alpha[k] = std::exp(at.alpha[k] - max_score);
                total += at.alpha[k];
            }
            for (int k = begin; k < end; ++k) {
                at.alpha[k] /= total;
                const double* val = at.val.data() + static_cast<std::size_t>(g.senders[k]) * h;
                const double a = at.alpha[k];
                for (int d = 0; d < h; ++d) m[d] += a * val[d];
            }
        }
    } else if (p.config.message_depth == 2) {
        // two-layer message MLP; pre-activations decomposed per node
        const AffineLayer& l1 = p.message_mlp.first;
        const AffineLayer& l2 = p.message_mlp.second;
        resize_buffer(tape.recv_term, nh);
        resize_buffer(tape.send_term, nh);
        node_block_matvec(l1.W.value.data(), cat, 0, h, at.h0.data(), n, tape.recv_term.data());
        node_block_matvec(l1.W.value.data(), cat, h, h, at.h0.data(), n, tape.send_term.data());
        resize_buffer(at.z1, g.probs.size() * h);
        std::vector<double> a1(static_cast<std::size_t>(h));
        std::vector<double> msg(static_cast<std::size_t>(h));
        const double* w1 = l1.W.value.data();
        const bool is_max = p.config.aggregator == Aggregator::max;
        if (is_max) resize_buffer(at.max_edge, nh);
        for (int v = 0; v < n; ++v) {
            const int begin = g.offsets[v], end = g.offsets[v + 1];
            double* m = at.m.data() + static_cast<std::size_t>(v) * h;
            std::fill(m, m + h, is_max && begin != end ? -std::numeric_limits<double>::infinity() : 0.0);
            if (is_max) {
                std::fill(at.max_edge.begin() + static_cast<std::size_t>(v) * h,
                          at.max_edge.begin() + static_cast<std::size_t>(v) * h + h, -1);
            }
            for (int k = begin; k < end; ++k) {
                const int w = g.senders[k];
                double* z1 = at.z1.data() + static_cast<std::size_t>(k) * h;
                for (int u = 0; u < h; ++u) {
                    z1[u] = tape.recv_term[static_cast<std::size_t>(v) * h + u] +
                            tape.send_term[static_cast<std::size_t>(w) * h + u] +
                            g.gamma * w1[static_cast<std::size_t>(u) * cat + 2 * h] +
                            g.probs[k] * w1[static_cast<std::size_t>(u) * cat + 2 * h + 1] +
                            l1.b.value[u];
                    a1[u] = z1[u] > 0.0 ? z1[u] : 0.0;
                }
                l2.forward(a1.data(), msg.data());
                if (is_max) {
                    for (int d = 0; d < h; ++d) {
                        if (msg[d] > m[d]) {
                            m[d] = msg[d];
                            at.max_edge[static_cast<std::size_t>(v) * h + d] = k;
                        }
                    }
                } else {
                    for (int d = 0; d < h; ++d) m[d] += msg[d];
                }
            }
            if (p.config.aggregator == Aggregator::mean && end > begin) {
                const double inv = 1.0 / (end - begin);
                for (int d = 0; d < h; ++d) m[d] *= inv;
            }
        }
    } else {
        // affine message, decomposed: msg = recv_term[v] + send_term[w] + gamma-term + p-term + bias
        const AffineLayer& lm = p.message;
        resize_buffer(tape.recv_term, nh);
        resize_buffer(tape.send_term, nh);
        node_block_matvec(lm.W.value.data(), cat, 0, h, at.h0.data(), n, tape.recv_term.data());
        node_block_matvec(lm.W.value.data(), cat, h, h, at.h0.data(), n, tape.send_term.data());
        const double* wm = lm.W.value.data();
        const bool is_max = p.config.aggregator == Aggregator::max;
        if (is_max) resize_buffer(at.max_edge, nh);
        std::vector<double> base(static_cast<std::size_t>(h));
        for (int d = 0; d < h; ++d) {
            base[d] = g.gamma * wm[static_cast<std::size_t>(d) * cat + 2 * h] + lm.b.value[d];
        }
        for (int v = 0; v < n; ++v) {
            const int begin = g.offsets[v], end = g.offsets[v + 1];
            double* m = at.m.data() + static_cast<std::size_t>(v) * h;
            std::fill(m, m + h, is_max && begin != end ? -std::numeric_limits<double>::infinity() : 0.0);
            if (is_max) {
                std::fill(at.max_edge.begin() + static_cast<std::size_t>(v) * h,
                          at.max_edge.begin() + static_cast<std::size_t>(v) * h + h, -1);
            }
            const double* rv = tape.recv_term.data() + static_cast<std::size_t>(v) * h;
            for (int k = begin; k < end; ++k) {
                const double* sw = tape.send_term.data() + static_cast<std::size_t>(g.senders[k]) * h;
                const double pk = g.probs[k];
                if (is_max) {
                    for (int d = 0; d < h; ++d) {
                        const double msg = rv[d] + sw[d] + base[d] +
                                           pk * wm[static_cast<std::size_t>(d) * cat + 2 * h + 1];
                        if (msg > m[d]) {
                            m[d] = msg;
                            at.max_edge[static_cast<std::size_t>(v) * h + d] = k;
                        }
                    }
                } else {
                    for (int d = 0; d < h; ++d) {
                        m[d] += rv[d] + sw[d] + base[d] +
                                pk * wm[static_cast<std::size_t>(d) * cat + 2 * h + 1];
                    }
                }
            }
            if (p.config.aggregator == Aggregator::mean && end > begin) {
                const double inv = 1.0 / (end - begin);
                for (int d = 0; d < h; ++d) m[d] *= inv;
            }
        }
    }

    // update with skip-connection: h = update(h0 ++ m)
    const double* wu = p.update.W.value.data();  // h x 2h
    const double* bu = p.update.b.value.data();
    for (int s = 0; s < n; ++s) {
        const double* h0 = at.h0.data() + static_cast<std::size_t>(s) * h;
        const double* m = at.m.data() + static_cast<std::size_t>(s) * h;
        double* out = at.h.data() + static_cast<std::size_t>(s) * h;
        for (int d = 0; d < h; ++d) {
            const double* wr = wu + static_cast<std::size_t>(d) * 2 * h;
            double acc = bu[d];
            for (int c = 0; c < h; ++c) acc += wr[c] * h0[c] + wr[h + c] * m[c];
            out[d] = acc;
        }
    }
}

}  // namespace

std::vector<double> message_pass(const ActionGraph& graph, const MpnnParams& params) {
    ExecutorTape tape;
    tape.actions.resize(1);
    forward_action(graph, params, tape, tape.actions[0]);
    const std::size_t nh = static_cast<std::size_t>(graph.num_nodes) * params.config.hidden_dim;
    return {tape.actions[0].h.begin(), tape.actions[0].h.begin() + nh};
}

std::vector<double> action_max(const std::vector<std::vector<double>>& per_action, int num_nodes,
                               int hidden_dim) {
    if (per_action.empty()) throw std::invalid_argument("action_max: no actions");
    const std::size_t nh = static_cast<std::size_t>(num_nodes) * hidden_dim;
    std::vector<double> out(per_action[0].begin(), per_action[0].begin() + nh);
    for (std::size_t a = 1; a < per_action.size(); ++a) {
        for (std::size_t i = 0; i < nh; ++i) out[i] = std::max(out[i], per_action[a][i]);
    }
    return out;
}

ValueFunction decode_values(const std::vector<double>& hidden, int num_nodes,
                            const MpnnParams& params) {
    const int h = params.config.hidden_dim;
    ValueFunction out(num_nodes);
    for (int s = 0; s < num_nodes; ++s) {
        params.decode.forward(hidden.data() + static_cast<std::size_t>(s) * h, &out[s]);
    }
    return out;
}

void executor_forward(const ActionGraphs& graphs, const MpnnParams& params, ExecutorTape& tape) {
    const int n = graphs.num_states;
    const int h = params.config.hidden_dim;
    const int num_actions = static_cast<int>(graphs.actions.size());
    const std::size_t nh = static_cast<std::size_t>(n) * h;
    if (static_cast<int>(tape.actions.size()) < num_actions) tape.actions.resize(num_actions);
    resize_buffer(tape.hmax, nh);
    resize_buffer(tape.argmax_action, nh);
    resize_buffer(tape.out, static_cast<std::size_t>(n));

    for (int a = 0; a < num_actions; ++a) {
        forward_action(graphs.actions[a], params, tape, tape.actions[a]);
        const auto& ha = tape.actions[a].h;
        if (a == 0) {
            std::copy(ha.begin(), ha.begin() + nh, tape.hmax.begin());
            std::fill(tape.argmax_action.begin(), tape.argmax_action.begin() + nh, 0);
        } else {
            for (std::size_t i = 0; i < nh; ++i) {
                if (ha[i] > tape.hmax[i]) {
                    tape.hmax[i] = ha[i];
                    tape.argmax_action[i] = a;
                }
            }
        }
    }
    for (int s = 0; s < n; ++s) {
        params.decode.forward(tape.hmax.data() + static_cast<std::size_t>(s) * h, &tape.out[s]);
    }
}

void executor_backward(const ActionGraphs& graphs, MpnnParams& params, ExecutorTape& tape,
                       const std::vector<double>& g_out) {
    const int n = graphs.num_states;
    const int h = params.config.hidden_dim;
    const int cat = 2 * h + 2;
    const int num_actions = static_cast<int>(graphs.actions.size());
    const std::size_t nh = static_cast<std::size_t>(n) * h;
    ExecutorTape& scratch = tape;

    // decode backward
    resize_buffer(scratch.grad_h, nh);
    std::vector<double>& ghmax = scratch.grad_h;
    const double* wd = params.decode.W.value.data();
    for (int s = 0; s < n; ++s) {
        const double g = g_out[s];
        params.decode.b.grad[0] += g;
        const double* x = tape.hmax.data() + static_cast<std::size_t>(s) * h;
        double* gh = ghmax.data() + static_cast<std::size_t>(s) * h;
        for (int d = 0; d < h; ++d) {
            params.decode.W.grad[d] += g * x[d];
            gh[d] = g * wd[d];
        }
    }

    resize_buffer(scratch.grad_h0, nh);
    resize_buffer(scratch.grad_m, nh);
    resize_buffer(scratch.grad_recv, nh);
    resize_buffer(scratch.grad_send, nh);

    std::vector<double> gha(nh);
    for (int a = 0; a < num_actions; ++a) {
        const ActionGraph& g = graphs.actions[a];
        const auto& at = tape.actions[a];

        // route gradient through the elementwise action max
        bool any = false;
        for (std::size_t i = 0; i < nh; ++i) {
            const double v = tape.argmax_action[i] == a ? ghmax[i] : 0.0;
            gha[i] = v;
            any = any || v != 0.0;
        }
        if (!any) continue;

        // update backward
        std::vector<double>& gh0 = scratch.grad_h0;
        std::vector<double>& gm = scratch.grad_m;
        std::fill(gh0.begin(), gh0.begin() + nh, 0.0);
        std::fill(gm.begin(), gm.begin() + nh, 0.0);
        {
            const double* wu = params.update.W.value.data();
            double* dwu = params.update.W.grad.data();
            for (int s = 0; s < n; ++s) {
                const double* gu = gha.data() + static_cast<std::size_t>(s) * h;
                const double* h0 = at.h0.data() + static_cast<std::size_t>(s) * h;
                const double* m = at.m.data() + static_cast<std::size_t>(s) * h;
                double* gh0s = gh0.data() + static_cast<std::size_t>(s) * h;
                double* gms = gm.data() + static_cast<std::size_t>(s) * h;
                for (int d = 0; d < h; ++d) {
                    const double gd = gu[d];
                    if (gd == 0.0) continue;
                    params.update.b.grad[d] += gd;
                    double* dwr = dwu + static_cast<std::size_t>(d) * 2 * h;
                    const double* wr = wu + static_cast<std::size_t>(d) * 2 * h;
                    for (int c = 0; c < h; ++c) {
                        dwr[c] += gd * h0[c];
                        dwr[h + c] += gd * m[c];
                        gh0s[c] += wr[c] * gd;
                        gms[c] += wr[h + c] * gd;
                    }
                }
            }
        }

        if (params.config.attention) {
            // m[v] = sum_k alpha_k * val[w_k]
            std::vector<double>& gval = scratch.grad_recv;  // per-sender value-projection grads
            std::fill(gval.begin(), gval.begin() + nh, 0.0);
            resize_buffer(scratch.edge_scalar, g.probs.size());
            resize_buffer(scratch.scalar_recv, static_cast<std::size_t>(n));
            resize_buffer(scratch.scalar_send, static_cast<std::size_t>(n));
            std::fill(scratch.scalar_recv.begin(), scratch.scalar_recv.begin() + n, 0.0);
            std::fill(scratch.scalar_send.begin(), scratch.scalar_send.begin() + n, 0.0);
            double sum_gs = 0.0, sum_gs_p = 0.0;
            for (int v = 0; v < n; ++v) {
                const int begin = g.offsets[v], end = g.offsets[v + 1];
                if (begin == end) continue;
                const double* gmv = gm.data() + static_cast<std::size_t>(v) * h;
                double dot_sum = 0.0;
                for (int k = begin; k < end; ++k) {
                    const int w = g.senders[k];
                    const double* val = at.val.data() + static_cast<std::size_t>(w) * h;
                    double* gv = gval.data() + static_cast<std::size_t>(w) * h;
                    const double alpha = at.alpha[k];
                    double galpha = 0.0;
                    for (int d = 0; d < h; ++d) {
                        gv[d] += alpha * gmv[d];
                        galpha += val[d] * gmv[d];
                    }
                    scratch.edge_scalar[k] = galpha;  // temporarily g_alpha
                    dot_sum += alpha * galpha;
                }
                for (int k = begin; k < end; ++k) {
                    const double gs = at.alpha[k] * (scratch.edge_scalar[k] - dot_sum);
                    scratch.edge_scalar[k] = gs;
                    scratch.scalar_recv[v] += gs;
                    scratch.scalar_send[g.senders[k]] += gs;
                    sum_gs += gs;
                    sum_gs_p += gs * g.probs[k];
                }
            }
            // value projection backward (per sender node)
            {
                const double* wv = params.attn_value.W.value.data();
                double* dwv = params.attn_value.W.grad.data();
                for (int s = 0; s < n; ++s) {
                    const double* gv = gval.data() + static_cast<std::size_t>(s) * h;
                    const double* h0 = at.h0.data() + static_cast<std::size_t>(s) * h;
                    double* gh0s = gh0.data() + static_cast<std::size_t>(s) * h;
                    for (int d = 0; d < h; ++d) {
                        const double gd = gv[d];
                        if (gd == 0.0) continue;
                        params.attn_value.b.grad[d] += gd;
                        double* dwr = dwv + static_cast<std::size_t>(d) * h;
                        const double* wr = wv + static_cast<std::size_t>(d) * h;
                        for (int c = 0; c < h; ++c) {
                            dwr[c] += gd * h0[c];
                            gh0s[c] += wr[c] * gd;
                        }
                    }
                }
            }
            // score backward via per-node scalar sums
            {
                const double* ws = params.attn_score.W.value.data();
                double* dws = params.attn_score.W.grad.data();
                for (int s = 0; s < n; ++s) {
                    const double grs = scratch.scalar_recv[s];
                    const double gss = scratch.scalar_send[s];
                    if (grs == 0.0 && gss == 0.0) continue;
                    const double* h0 = at.h0.data() + static_cast<std::size_t>(s) * h;
                    double* gh0s = gh0.data() + static_cast<std::size_t>(s) * h;
                    for (int c = 0; c < h; ++c) {
                        dws[c] += grs * h0[c];
                        dws[h + c] += gss * h0[c];
                        gh0s[c] += ws[c] * grs + ws[h + c] * gss;
                    }
                }
                dws[2 * h] += g.gamma * sum_gs;
                dws[2 * h + 1] += sum_gs_p;
                params.attn_score.b.grad[0] += sum_gs;
            }
        } else {
            // expand aggregation gradient to per-edge message gradients
            resize_buffer(scratch.edge_grad, g.probs.size() * h);
            std::vector<double>& ge = scratch.edge_grad;
            if (params.config.aggregator == Aggregator::max) {
                std::fill(ge.begin(), ge.begin() + g.probs.size() * h, 0.0);
                for (int v = 0; v < n; ++v) {
                    const double* gmv = gm.data() + static_cast<std::size_t>(v) * h;
                    for (int d = 0; d < h; ++d) {
                        const int k = at.max_edge[static_cast<std::size_t>(v) * h + d];
                        if (k >= 0) ge[static_cast<std::size_t>(k) * h + d] += gmv[d];
                    }
                }
            } else {
                const bool is_mean = params.config.aggregator == Aggregator::mean;
                for (int v = 0; v < n; ++v) {
                    const int begin = g.offsets[v], end = g.offsets[v + 1];
                    if (begin == end) continue;
                    const double* gmv = gm.data() + static_cast<std::size_t>(v) * h;
                    const double scale = is_mean ? 1.0 / (end - begin) : 1.0;
                    for (int k = begin; k < end; ++k) {
                        double* gek = ge.data() + static_cast<std::size_t>(k) * h;
                        for (int d = 0; d < h; ++d) gek[d] = gmv[d] * scale;
                    }
                }
            }

            // message backward; depth 2 first folds edge gradients through the MLP
            if (params.config.message_depth == 2) {
                AffineLayer& l2 = params.message_mlp.second;
                const double* w2 = l2.W.value.data();
                double* dw2 = l2.W.grad.data();
                std::vector<double> a1(static_cast<std::size_t>(h));
                std::vector<double> gz1(static_cast<std::size_t>(h));
                for (std::size_t k = 0; k < g.probs.size(); ++k) {
                    double* gek = ge.data() + k * h;
                    const double* z1 = at.z1.data() + k * h;
                    bool nonzero = false;
                    for (int d = 0; d < h; ++d) nonzero = nonzero || gek[d] != 0.0;
                    if (!nonzero) {
                        std::fill(gek, gek + h, 0.0);
                        continue;
                    }
                    for (int u = 0; u < h; ++u) a1[u] = z1[u] > 0.0 ? z1[u] : 0.0;
                    std::fill(gz1.begin(), gz1.end(), 0.0);
                    for (int d = 0; d < h; ++d) {
                        const double gd = gek[d];
                        if (gd == 0.0) continue;
                        l2.b.grad[d] += gd;
                        double* dwr = dw2 + static_cast<std::size_t>(d) * h;
                        const double* wr = w2 + static_cast<std::size_t>(d) * h;
                        for (int u = 0; u < h; ++u) {
                            dwr[u] += gd * a1[u];
                            gz1[u] += wr[u] * gd;
                        }
                    }
                    for (int u = 0; u < h; ++u) gek[u] = z1[u] > 0.0 ? gz1[u] : 0.0;
                }
            }

            // decomposed affine backward over receiver/sender/gamma/prob columns
            std::vector<double>& recv_sum = scratch.grad_recv;
            std::vector<double>& send_sum = scratch.grad_send;
            std::fill(recv_sum.begin(), recv_sum.begin() + nh, 0.0);
            std::fill(send_sum.begin(), send_sum.begin() + nh, 0.0);
            std::vector<double> gsum(static_cast<std::size_t>(h), 0.0);
            std::vector<double> gpsum(static_cast<std::size_t>(h), 0.0);
            for (int v = 0; v < n; ++v) {
                const int begin = g.offsets[v], end = g.offsets[v + 1];
                double* rs = recv_sum.data() + static_cast<std::size_t>(v) * h;
                for (int k = begin; k < end; ++k) {
                    const double* gek = ge.data() + static_cast<std::size_t>(k) * h;
                    double* ss = send_sum.data() + static_cast<std::size_t>(g.senders[k]) * h;
                    const double pk = g.probs[k];
                    for (int d = 0; d < h; ++d) {
                        rs[d] += gek[d];
                        ss[d] += gek[d];
                        gsum[d] += gek[d];
                        gpsum[d] += pk * gek[d];
                    }
                }
            }
            AffineLayer& lm = params.config.message_depth == 2 ? params.message_mlp.first
                                                               : params.message;
            node_block_outer(recv_sum.data(), at.h0.data(), n, h, cat, 0, lm.W.grad.data());
            node_block_outer(send_sum.data(), at.h0.data(), n, h, cat, h, lm.W.grad.data());
            for (int d = 0; d < h; ++d) {
                lm.W.grad[static_cast<std::size_t>(d) * cat + 2 * h] += g.gamma * gsum[d];
                lm.W.grad[static_cast<std::size_t>(d) * cat + 2 * h + 1] += gpsum[d];
                lm.b.grad[d] += gsum[d];
            }
            node_block_matvec_t(lm.W.value.data(), cat, 0, h, recv_sum.data(), n, gh0.data());
            node_block_matvec_t(lm.W.value.data(), cat, h, h, send_sum.data(), n, gh0.data());
        }

        // encoder backward
        {
            double* dwe = params.encoder.W.grad.data();
            double* dbe = params.encoder.b.grad.data();
            for (int s = 0; s < n; ++s) {
                const double* gh = gh0.data() + static_cast<std::size_t>(s) * h;
                const double xv = g.node_v[s], xr = g.node_r[s];
                for (int d = 0; d < h; ++d) {
                    const double gd = gh[d];
                    if (gd == 0.0) continue;
                    dwe[2 * d] += gd * xv;
                    dwe[2 * d + 1] += gd * xr;
                    dbe[d] += gd;
                }
            }
        }
    }
}

ValueFunction executor_step(const Mdp& mdp, const ValueFunction& v, const MpnnParams& params) {
    const ActionGraphs graphs = build_action_graphs(mdp, v);
    ExecutorTape tape;
    executor_forward(graphs, params, tape);
    return {tape.out.begin(), tape.out.begin() + mdp.num_states};
}

double step_loss_grad(const Mdp& mdp, const ValueFunction& v_in, const ValueFunction& target,
                      MpnnParams& params, ExecutorTape& tape, double grad_scale) {
    const ActionGraphs graphs = build_action_graphs(mdp, v_in);
    executor_forward(graphs, params, tape);
    ValueFunction pred(tape.out.begin(), tape.out.begin() + mdp.num_states);
    auto [loss, grad] = mse_loss(pred, target);
    if (grad_scale != 1.0) {
        for (auto& g : grad) g *= grad_scale;
    }
    executor_backward(graphs, params, tape, grad);
    return loss;
}

}  // namespace viexec
