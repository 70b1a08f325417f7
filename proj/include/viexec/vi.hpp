#pragma once

#include "viexec/mdp.hpp"

namespace viexec {

/// Iterates of synchronous value iteration: v^(0), v^(1), ..., v^(T).
struct ViTrajectory {
    std::vector<ValueFunction> steps;
    bool converged = false;
    int iterations = 0;
};

/// Greedy policy plus the tie-aware optimal-action set per state.
struct GreedyPolicy {
    Policy policy;                            // smallest index in each optimal set
    std::vector<std::vector<int>> optimal;    // actions within tie_epsilon of max Q
};

constexpr double kOracleTolerance = 1e-8;
constexpr double kTieEpsilon = 1e-9;

/// One Bellman optimality update: v'(s) = max_a [ r(s,a) + gamma * sum_s' p(s'|s,a) v(s') ].
ValueFunction vi_step(const Mdp& mdp, const ValueFunction& v);

/// Q(s, a) for all actions at state s under value estimate v.
std::vector<double> q_values(const Mdp& mdp, const ValueFunction& v, int s);

/// Value iteration from v^(0) = 0 until the max-norm change drops below
/// tolerance or max_iters is reached.
ViTrajectory solve(const Mdp& mdp, double tolerance = kOracleTolerance, int max_iters = 1000);

GreedyPolicy greedy_policy(const Mdp& mdp, const ValueFunction& v, double tie_epsilon = kTieEpsilon);

/// Fraction of states where the greedy action under v_pred lies in the
/// optimal-action set under v_star. Ties in v_star count as correct.
double policy_accuracy(const Mdp& mdp, const ValueFunction& v_pred, const ValueFunction& v_star,
                       double tie_epsilon = kTieEpsilon);

/// Mean squared error between two value vectors of equal length.
double value_mse(const ValueFunction& v_pred, const ValueFunction& v_star);

double max_norm_diff(const ValueFunction& a, const ValueFunction& b);

}  // namespace viexec
