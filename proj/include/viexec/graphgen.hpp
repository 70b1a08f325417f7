#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "viexec/mdp.hpp"
#include "viexec/rng.hpp"

namespace viexec {

/// Simple undirected graph; edges stored as sorted, deduplicated (i, j) pairs
/// with i < j. No self-pairs.
struct UndirectedGraph {
    int num_nodes = 0;
    std::vector<std::pair<int, int>> edges;

    void add_edge(int a, int b);
    void finalize();  // sort + dedup
    std::vector<int> degrees() const;
    std::vector<std::vector<int>> adjacency() const;
    bool connected() const;
};

enum class Family {
    erdos_renyi,
    barabasi_albert,
    star,
    caveman,
    caterpillar,
    lobster,
    tree,
    grid,
    ladder,
    line,
    maze,
};

std::string family_name(Family f);
Family family_from_name(const std::string& name);

/// Declarative description of one environment distribution. num_states is a
/// target; families whose topology cannot hit it exactly (grid, ladder,
/// caveman, maze) use the nearest achievable count.
struct GenSpec {
    Family family = Family::erdos_renyi;
    int num_states = 20;
    int num_actions = 5;
    double gamma = 0.9;
    // family parameters
    double p_edge = 0.3;             // erdos_renyi
    int ba_m = 2;                    // barabasi_albert attachment count
    int maze_side = 8;               // maze
    double obstacle_density = 0.65;  // maze
};

// --- graph samplers ------------------------------------------------------

/// Each pair independently with probability p_edge; isolated nodes are then
/// given one edge to a uniformly random other node.
UndirectedGraph gen_erdos_renyi(int n, double p_edge, Rng& rng);

/// Preferential attachment from an m-node clique seed; every later node adds
/// exactly m distinct edges, so |E| = m*(n-m) + m*(m-1)/2.
UndirectedGraph gen_barabasi_albert(int n, int m, Rng& rng);

UndirectedGraph gen_star(int n);
UndirectedGraph gen_line(int n);
UndirectedGraph gen_ladder(int n_rungs);
UndirectedGraph gen_grid(int rows, int cols);

/// Connected caveman graph: cliques in a ring, one edge per clique rewired to
/// the next clique.
UndirectedGraph gen_caveman(int num_cliques, int clique_size);

/// Uniform random recursive tree: node i attaches to a uniform earlier node.
UndirectedGraph gen_tree(int n, Rng& rng);

/// Path spine with leaves attached to uniform spine nodes; n nodes total.
UndirectedGraph gen_caterpillar(int n, Rng& rng);

/// Caterpillar with one extra level of leaf attachment; n nodes total.
UndirectedGraph gen_lobster(int n, Rng& rng);

// --- MDP construction -----------------------------------------------------

/// States = nodes. Per (s, a), the successor support is 2 distinct states
/// drawn uniformly from s's neighbours plus a self-loop (fewer candidates
/// keep them all), with uniform transition probability over the support;
/// rewards are i.i.d. uniform on [0, 1]. Actions are distinguishable by
/// where they can lead, with constant out-degree so aggregate statistics do
/// not leak support size.
Mdp graph_to_mdp(const UndirectedGraph& g, int num_actions, double gamma, Rng& rng);

/// Like graph_to_mdp, but action a's candidate successors come from
/// action_graphs[a] (plus the self-loop). generate_mdp samples one support
/// graph per action and feeds them here.
Mdp action_graphs_to_mdp(const std::vector<UndirectedGraph>& action_graphs, double gamma,
                         Rng& rng);

struct MazeMdp {
    Mdp mdp;
    int side = 0;
    std::vector<int> state_cell;  // row-major cell index per state
    int goal_state = -1;
};

/// Deterministic maze: obstacles are i.i.d. with the given density, the
/// largest 8-connected free component becomes the state set (resampled until
/// its size is within +-25% of target_states). 8 compass actions; moving into
/// an obstacle or boundary self-loops. One uniform free cell is the absorbing
/// goal; entering it pays reward 1.
MazeMdp gen_maze_mdp(int side, double obstacle_density, int target_states, double gamma, Rng& rng);

/// Samples a graph for the spec's family (everything except maze).
UndirectedGraph generate_graph(const GenSpec& spec, Rng& rng);

/// Samples one MDP from the spec (any family, including maze).
Mdp generate_mdp(const GenSpec& spec, Rng& rng);

/// Nearest grid factor pair r x c with r <= c and r*c = n.
std::pair<int, int> grid_shape_for(int n);

}  // namespace viexec
