#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace viexec {

/// Per-state scalar value estimates; index = state.
using ValueFunction = std::vector<double>;

/// One greedy action per state.
struct Policy {
    std::vector<int> actions;
};

struct Transition {
    int next = 0;
    double prob = 0.0;
};

/// Finite MDP with a sparse stochastic transition model and dense rewards.
/// Every action is available in every state. Immutable by convention after
/// construction; all accessors are const and thread-safe.
struct Mdp {
    int num_states = 0;
    int num_actions = 0;
    double gamma = 0.0;
    // successor lists indexed by s * num_actions + a, sorted by successor state
    std::vector<std::vector<Transition>> transitions;
    // rewards indexed by s * num_actions + a
    std::vector<double> rewards;

    double reward(int s, int a) const { return rewards[static_cast<std::size_t>(s) * num_actions + a]; }

    /// Successor list for (s, a) in ascending successor order.
    /// Throws std::out_of_range for out-of-range s or a.
    const std::vector<Transition>& successors(int s, int a) const;
};

/// Returns every invariant violation with its (s, a) coordinates.
/// An empty report means the MDP is valid. Violations are data, not errors.
std::vector<std::string> validate(const Mdp& mdp);

/// Set of (s, s') pairs with p(s'|s,a) > 0 for some action a.
std::set<std::pair<int, int>> edge_set(const Mdp& mdp);

/// Relabels states: state s becomes perm[s]. Successor lists stay sorted.
Mdp permute_states(const Mdp& mdp, const std::vector<int>& perm);

/// Relabels actions: action a becomes perm[a].
Mdp permute_actions(const Mdp& mdp, const std::vector<int>& perm);

/// Applies the same state relabeling to a value vector: out[perm[s]] = v[s].
ValueFunction permute_values(const ValueFunction& v, const std::vector<int>& perm);

// Dataset file format (JSON, format_version 1):
//   {num_states, num_actions, gamma, rewards: [[r(s,a)...] per s],
//    transitions: [[[s', p], ...] indexed by s*num_actions+a]}
std::string mdp_to_json(const Mdp& mdp);
Mdp mdp_from_json(const std::string& text);
void save_mdp(const std::string& path, const Mdp& mdp);
Mdp load_mdp(const std::string& path);

}  // namespace viexec
