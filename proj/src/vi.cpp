#include "viexec/vi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace viexec {

namespace {

void check_length(const Mdp& mdp, const ValueFunction& v, const char* who) {
    if (static_cast<int>(v.size()) != mdp.num_states) {
        throw std::invalid_argument(std::string(who) + ": value vector length " +
                                    std::to_string(v.size()) + " != num_states " +
                                    std::to_string(mdp.num_states));
    }
}

}  // namespace

ValueFunction vi_step(const Mdp& mdp, const ValueFunction& v) {
    check_length(mdp, v, "vi_step");
    ValueFunction out(mdp.num_states);
    for (int s = 0; s < mdp.num_states; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < mdp.num_actions; ++a) {
            double q = 0.0;
            for (const auto& t : mdp.transitions[static_cast<std::size_t>(s) * mdp.num_actions + a]) {
                q += t.prob * v[t.next];
            }
            q = mdp.reward(s, a) + mdp.gamma * q;
            if (q > best) best = q;
        }
        out[s] = best;
    }
    return out;
}

std::vector<double> q_values(const Mdp& mdp, const ValueFunction& v, int s) {
    check_length(mdp, v, "q_values");
    std::vector<double> q(mdp.num_actions);
    for (int a = 0; a < mdp.num_actions; ++a) {
        double acc = 0.0;
        for (const auto& t : mdp.successors(s, a)) acc += t.prob * v[t.next];
        q[a] = mdp.reward(s, a) + mdp.gamma * acc;
    }
    return q;
}

ViTrajectory solve(const Mdp& mdp, double tolerance, int max_iters) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("solve: tolerance must be positive");
    ViTrajectory traj;
    traj.steps.push_back(ValueFunction(mdp.num_states, 0.0));
    for (int t = 0; t < max_iters; ++t) {
        ValueFunction next = vi_step(mdp, traj.steps.back());
        const double delta = max_norm_diff(next, traj.steps.back());
        traj.steps.push_back(std::move(next));
        traj.iterations = t + 1;
        if (delta < tolerance) {
            traj.converged = true;
            break;
        }
    }
    return traj;
}

GreedyPolicy greedy_policy(const Mdp& mdp, const ValueFunction& v, double tie_epsilon) {
    check_length(mdp, v, "greedy_policy");
    GreedyPolicy result;
    result.policy.actions.resize(mdp.num_states);
    result.optimal.resize(mdp.num_states);
    for (int s = 0; s < mdp.num_states; ++s) {
        const auto q = q_values(mdp, v, s);
        double best = q[0];
        for (double x : q) best = std::max(best, x);
        auto& set = result.optimal[s];
        for (int a = 0; a < mdp.num_actions; ++a) {
            if (q[a] >= best - tie_epsilon) set.push_back(a);
        }
        result.policy.actions[s] = set.front();
    }
    return result;
}

double policy_accuracy(const Mdp& mdp, const ValueFunction& v_pred, const ValueFunction& v_star,
                       double tie_epsilon) {
    check_length(mdp, v_pred, "policy_accuracy");
    check_length(mdp, v_star, "policy_accuracy");
    const GreedyPolicy pred = greedy_policy(mdp, v_pred, tie_epsilon);
    const GreedyPolicy star = greedy_policy(mdp, v_star, tie_epsilon);
    int hits = 0;
    for (int s = 0; s < mdp.num_states; ++s) {
        const int a = pred.policy.actions[s];
        const auto& set = star.optimal[s];
        for (int opt : set) {
            if (opt == a) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / mdp.num_states;
}

double value_mse(const ValueFunction& v_pred, const ValueFunction& v_star) {
    if (v_pred.size() != v_star.size()) {
        throw std::invalid_argument("value_mse: length mismatch " + std::to_string(v_pred.size()) +
                                    " vs " + std::to_string(v_star.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < v_pred.size(); ++i) {
        const double d = v_pred[i] - v_star[i];
        acc += d * d;
    }
    return acc / static_cast<double>(v_pred.size());
}

double max_norm_diff(const ValueFunction& a, const ValueFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

}  // namespace viexec
