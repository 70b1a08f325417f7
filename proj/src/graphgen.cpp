#include "viexec/graphgen.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "viexec/errors.hpp"

namespace viexec {

void UndirectedGraph::add_edge(int a, int b) {
    if (a == b) return;
    if (a > b) std::swap(a, b);
    edges.emplace_back(a, b);
}

void UndirectedGraph::finalize() {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

std::vector<int> UndirectedGraph::degrees() const {
    std::vector<int> deg(num_nodes, 0);
    for (const auto& [a, b] : edges) {
        ++deg[a];
        ++deg[b];
    }
    return deg;
}

std::vector<std::vector<int>> UndirectedGraph::adjacency() const {
    std::vector<std::vector<int>> adj(num_nodes);
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());
    return adj;
}

bool UndirectedGraph::connected() const {
    if (num_nodes == 0) return true;
    const auto adj = adjacency();
    std::vector<char> seen(num_nodes, 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int count = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int w : adj[u]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                frontier.push(w);
            }
        }
    }
    return count == num_nodes;
}

std::string family_name(Family f) {
    switch (f) {
        case Family::erdos_renyi: return "erdos_renyi";
        case Family::barabasi_albert: return "barabasi_albert";
        case Family::star: return "star";
        case Family::caveman: return "caveman";
        case Family::caterpillar: return "caterpillar";
        case Family::lobster: return "lobster";
        case Family::tree: return "tree";
        case Family::grid: return "grid";
        case Family::ladder: return "ladder";
        case Family::line: return "line";
        case Family::maze: return "maze";
    }
    throw std::invalid_argument("unknown family");
}

Family family_from_name(const std::string& name) {
    static const std::pair<const char*, Family> table[] = {
        {"erdos_renyi", Family::erdos_renyi}, {"barabasi_albert", Family::barabasi_albert},
        {"star", Family::star},               {"caveman", Family::caveman},
        {"caterpillar", Family::caterpillar}, {"lobster", Family::lobster},
        {"tree", Family::tree},               {"grid", Family::grid},
        {"ladder", Family::ladder},           {"line", Family::line},
        {"maze", Family::maze},
    };
    for (const auto& [n, f] : table) {
        if (name == n) return f;
    }
    throw ConfigError("unknown graph family: " + name);
}

UndirectedGraph gen_erdos_renyi(int n, double p_edge, Rng& rng) {
    if (n < 2) throw std::invalid_argument("gen_erdos_renyi: n must be >= 2");
    if (!(p_edge > 0.0 && p_edge < 1.0)) {
        throw std::invalid_argument("gen_erdos_renyi: p_edge must lie in (0,1)");
    }
    UndirectedGraph g;
    g.num_nodes = n;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.bernoulli(p_edge)) g.add_edge(i, j);
        }
    }
    // repair pass: no node may end up isolated
    auto deg = g.degrees();
    for (int i = 0; i < n; ++i) {
        if (deg[i] == 0) {
            int other = static_cast<int>(rng.uniform_int(n - 1));
            if (other >= i) ++other;
            g.add_edge(i, other);
            ++deg[i];
            ++deg[other];
        }
    }
    g.finalize();
    return g;
}

UndirectedGraph gen_barabasi_albert(int n, int m, Rng& rng) {
    if (m < 1 || m >= n) throw std::invalid_argument("gen_barabasi_albert: need 1 <= m < n");
    UndirectedGraph g;
    g.num_nodes = n;
    // endpoint multiset; a node appears once per unit of degree
    std::vector<int> endpoints;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            g.add_edge(i, j);
            endpoints.push_back(i);
            endpoints.push_back(j);
        }
    }
    std::vector<int> targets;
    for (int v = m; v < n; ++v) {
        targets.clear();
        while (static_cast<int>(targets.size()) < m) {
            int t;
            if (endpoints.empty()) {
                t = static_cast<int>(rng.uniform_int(v));
            } else {
                t = endpoints[rng.uniform_int(endpoints.size())];
            }
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
        }
        for (int t : targets) {
            g.add_edge(v, t);
            endpoints.push_back(v);
            endpoints.push_back(t);
        }
    }
    g.finalize();
    return g;
}

UndirectedGraph gen_star(int n) {
    if (n < 2) throw std::invalid_argument("gen_star: n must be >= 2");
    UndirectedGraph g;
    g.num_nodes = n;
    for (int i = 1; i < n; ++i) g.add_edge(0, i);
    g.finalize();
    return g;
}

UndirectedGraph gen_line(int n) {
    if (n < 2) throw std::invalid_argument("gen_line: n must be >= 2");
    UndirectedGraph g;
    g.num_nodes = n;
    for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
    g.finalize();
    return g;
}

UndirectedGraph gen_ladder(int n_rungs) {
    if (n_rungs < 2) throw std::invalid_argument("gen_ladder: n_rungs must be >= 2");
    UndirectedGraph g;
    g.num_nodes = 2 * n_rungs;
    for (int i = 0; i + 1 < n_rungs; ++i) {
        g.add_edge(i, i + 1);
        g.add_edge(n_rungs + i, n_rungs + i + 1);
    }
    for (int i = 0; i < n_rungs; ++i) g.add_edge(i, n_rungs + i);
    g.finalize();
    return g;
}

UndirectedGraph gen_grid(int rows, int cols) {
    if (rows < 1 || cols < 1 || rows * cols < 2) {
        throw std::invalid_argument("gen_grid: need rows*cols >= 2");
    }
    UndirectedGraph g;
    g.num_nodes = rows * cols;
    auto id = [cols](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) g.add_edge(id(r, c), id(r, c + 1));
            if (r + 1 < rows) g.add_edge(id(r, c), id(r + 1, c));
        }
    }
    g.finalize();
    return g;
}

UndirectedGraph gen_caveman(int num_cliques, int clique_size) {
    if (num_cliques < 2 || clique_size < 2) {
        throw std::invalid_argument("gen_caveman: need num_cliques >= 2 and clique_size >= 2");
    }
    UndirectedGraph g;
    g.num_nodes = num_cliques * clique_size;
    for (int q = 0; q < num_cliques; ++q) {
        const int base = q * clique_size;
        for (int i = 0; i < clique_size; ++i) {
            for (int j = i + 1; j < clique_size; ++j) {
                // rewired edge: (base, base+1) is replaced by a link to the next clique
                if (clique_size >= 3 && i == 0 && j == 1) continue;
                g.add_edge(base + i, base + j);
            }
        }
        const int next_base = ((q + 1) % num_cliques) * clique_size;
        g.add_edge(base, next_base);
    }
    g.finalize();
    return g;
}

UndirectedGraph gen_tree(int n, Rng& rng) {
    if (n < 2) throw std::invalid_argument("gen_tree: n must be >= 2");
    UndirectedGraph g;
    g.num_nodes = n;
    for (int i = 1; i < n; ++i) g.add_edge(i, static_cast<int>(rng.uniform_int(i)));
    g.finalize();
    return g;
}

UndirectedGraph gen_caterpillar(int n, Rng& rng) {
    if (n < 2) throw std::invalid_argument("gen_caterpillar: n must be >= 2");
    UndirectedGraph g;
    g.num_nodes = n;
    const int spine = (n + 1) / 2;
    for (int i = 0; i + 1 < spine; ++i) g.add_edge(i, i + 1);
    for (int i = spine; i < n; ++i) g.add_edge(i, static_cast<int>(rng.uniform_int(spine)));
    g.finalize();
    return g;
}

UndirectedGraph gen_lobster(int n, Rng& rng) {
    if (n < 2) throw std::invalid_argument("gen_lobster: n must be >= 2");
    UndirectedGraph g;
    g.num_nodes = n;
    const int spine = std::max(2, n / 4);
    const int mid = (n - spine) / 2;
    for (int i = 0; i + 1 < spine; ++i) g.add_edge(i, i + 1);
    for (int i = spine; i < spine + mid; ++i) g.add_edge(i, static_cast<int>(rng.uniform_int(spine)));
    for (int i = spine + mid; i < n; ++i) {
        if (mid > 0) {
            g.add_edge(i, spine + static_cast<int>(rng.uniform_int(mid)));
        } else {
            g.add_edge(i, static_cast<int>(rng.uniform_int(spine)));
        }
    }
    g.finalize();
    return g;
}

namespace {

// sorted candidate successors of s: its neighbours plus a self-loop
void candidates_of(const std::vector<std::vector<int>>& adj, int s, std::vector<int>& out) {
    out.clear();
    out.reserve(adj[s].size() + 1);
    bool inserted_self = false;
    for (int w : adj[s]) {
        if (!inserted_self && s < w) {
            out.push_back(s);
            inserted_self = true;
        }
        out.push_back(w);
    }
    if (!inserted_self) out.push_back(s);
}

// support = 2 distinct candidates chosen uniformly (all of them when fewer),
// with uniform probability mass; keeps the per-(s,a) out-degree constant
void sample_successors(const std::vector<int>& candidates, Rng& rng,
                       std::vector<Transition>& succ) {
    succ.clear();
    if (candidates.size() <= 2) {
        const double p = 1.0 / static_cast<double>(candidates.size());
        for (int c : candidates) succ.push_back({c, p});
        return;
    }
    const std::size_t i = rng.uniform_int(candidates.size());
    std::size_t j = rng.uniform_int(candidates.size() - 1);
    if (j >= i) ++j;
    const int a = candidates[std::min(i, j)];
    const int b = candidates[std::max(i, j)];
    succ.push_back({a, 0.5});
    succ.push_back({b, 0.5});
}

void check_no_isolated(const UndirectedGraph& g, const char* who) {
    const auto deg = g.degrees();
    for (int s = 0; s < g.num_nodes; ++s) {
        if (deg[s] == 0 && g.num_nodes > 1) {
            throw std::invalid_argument(std::string(who) + ": node " + std::to_string(s) +
                                        " is isolated");
        }
    }
}

}  // namespace

Mdp graph_to_mdp(const UndirectedGraph& g, int num_actions, double gamma, Rng& rng) {
    if (num_actions < 1) throw std::invalid_argument("graph_to_mdp: num_actions must be >= 1");
    check_no_isolated(g, "graph_to_mdp");
    const auto adj = g.adjacency();
    Mdp mdp;
    mdp.num_states = g.num_nodes;
    mdp.num_actions = num_actions;
    mdp.gamma = gamma;
    mdp.transitions.resize(static_cast<std::size_t>(g.num_nodes) * num_actions);
    mdp.rewards.resize(static_cast<std::size_t>(g.num_nodes) * num_actions);

    std::vector<int> candidates;
    for (int s = 0; s < g.num_nodes; ++s) {
        candidates_of(adj, s, candidates);
        for (int a = 0; a < num_actions; ++a) {
            sample_successors(candidates, rng,
                              mdp.transitions[static_cast<std::size_t>(s) * num_actions + a]);
            mdp.rewards[static_cast<std::size_t>(s) * num_actions + a] = rng.uniform01();
        }
    }
    return mdp;
}

Mdp action_graphs_to_mdp(const std::vector<UndirectedGraph>& action_graphs, double gamma,
                         Rng& rng) {
    if (action_graphs.empty()) {
        throw std::invalid_argument("action_graphs_to_mdp: no action graphs");
    }
    const int n = action_graphs[0].num_nodes;
    const int num_actions = static_cast<int>(action_graphs.size());
    std::vector<std::vector<std::vector<int>>> adj;
    for (const auto& g : action_graphs) {
        if (g.num_nodes != n) {
            throw std::invalid_argument("action_graphs_to_mdp: node counts differ across actions");
        }
        check_no_isolated(g, "action_graphs_to_mdp");
        adj.push_back(g.adjacency());
    }
    Mdp mdp;
    mdp.num_states = n;
    mdp.num_actions = num_actions;
    mdp.gamma = gamma;
    mdp.transitions.resize(static_cast<std::size_t>(n) * num_actions);
    mdp.rewards.resize(static_cast<std::size_t>(n) * num_actions);

    std::vector<int> candidates;
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            candidates_of(adj[a], s, candidates);
            sample_successors(candidates, rng,
                              mdp.transitions[static_cast<std::size_t>(s) * num_actions + a]);
            mdp.rewards[static_cast<std::size_t>(s) * num_actions + a] = rng.uniform01();
        }
    }
    return mdp;
}

namespace {

// compass order N, NE, E, SE, S, SW, W, NW; row 0 is the top of the maze
constexpr int kMazeDr[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kMazeDc[8] = {0, 1, 1, 1, 0, -1, -1, -1};

std::vector<int> largest_free_component(const std::vector<char>& obstacle, int side) {
    std::vector<int> comp_of(side * side, -1);
    std::vector<int> best;
    int comp_id = 0;
    for (int start = 0; start < side * side; ++start) {
        if (obstacle[start] || comp_of[start] != -1) continue;
        std::vector<int> cells;
        std::queue<int> frontier;
        frontier.push(start);
        comp_of[start] = comp_id;
        while (!frontier.empty()) {
            const int cell = frontier.front();
            frontier.pop();
            cells.push_back(cell);
            const int r = cell / side, c = cell % side;
            for (int d = 0; d < 8; ++d) {
                const int nr = r + kMazeDr[d], nc = c + kMazeDc[d];
                if (nr < 0 || nr >= side || nc < 0 || nc >= side) continue;
                const int ncell = nr * side + nc;
                if (obstacle[ncell] || comp_of[ncell] != -1) continue;
                comp_of[ncell] = comp_id;
                frontier.push(ncell);
            }
        }
        if (cells.size() > best.size()) best = std::move(cells);
        ++comp_id;
    }
    std::sort(best.begin(), best.end());
    return best;
}

}  // namespace

MazeMdp gen_maze_mdp(int side, double obstacle_density, int target_states, double gamma, Rng& rng) {
    if (side < 3) throw std::invalid_argument("gen_maze_mdp: side must be >= 3");
    if (!(obstacle_density >= 0.0 && obstacle_density < 1.0)) {
        throw std::invalid_argument("gen_maze_mdp: obstacle_density must lie in [0,1)");
    }
    const int lo = (3 * target_states + 3) / 4;  // ceil(0.75 * target)
    const int hi = (5 * target_states) / 4;      // floor(1.25 * target)

    std::vector<char> obstacle(static_cast<std::size_t>(side) * side);
    std::vector<int> comp;
    constexpr int kMaxResamples = 100;
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
        for (auto& cell : obstacle) cell = rng.bernoulli(obstacle_density) ? 1 : 0;
        comp = largest_free_component(obstacle, side);
        const int count = static_cast<int>(comp.size());
        // density 0 is deterministic, so resampling cannot change the outcome
        if ((count >= lo && count <= hi) || (obstacle_density == 0.0 && count >= 2)) {
            accepted = true;
            break;
        }
    }
    if (!accepted) {
        throw GenerationError("gen_maze_mdp: no free component of acceptable size after " +
                              std::to_string(kMaxResamples) + " resamples (density " +
                              std::to_string(obstacle_density) + ")");
    }

    MazeMdp maze;
    maze.side = side;
    maze.state_cell = comp;
    std::vector<int> state_of(static_cast<std::size_t>(side) * side, -1);
    for (std::size_t i = 0; i < comp.size(); ++i) state_of[comp[i]] = static_cast<int>(i);

    const int n = static_cast<int>(comp.size());
    constexpr int kNumActions = 8;
    maze.goal_state = static_cast<int>(rng.uniform_int(n));

    Mdp& mdp = maze.mdp;
    mdp.num_states = n;
    mdp.num_actions = kNumActions;
    mdp.gamma = gamma;
    mdp.transitions.resize(static_cast<std::size_t>(n) * kNumActions);
    mdp.rewards.assign(static_cast<std::size_t>(n) * kNumActions, 0.0);
    for (int s = 0; s < n; ++s) {
        const int cell = comp[s];
        const int r = cell / side, c = cell % side;
        for (int a = 0; a < kNumActions; ++a) {
            int next = s;
            if (s != maze.goal_state) {
                const int nr = r + kMazeDr[a], nc = c + kMazeDc[a];
                if (nr >= 0 && nr < side && nc >= 0 && nc < side && state_of[nr * side + nc] != -1) {
                    next = state_of[nr * side + nc];
                }
            }
            mdp.transitions[static_cast<std::size_t>(s) * kNumActions + a] = {{next, 1.0}};
            if (s != maze.goal_state && next == maze.goal_state) {
                mdp.rewards[static_cast<std::size_t>(s) * kNumActions + a] = 1.0;
            }
        }
    }
    return maze;
}

std::pair<int, int> grid_shape_for(int n) {
    int r = static_cast<int>(std::sqrt(static_cast<double>(n)));
    while (r > 1 && n % r != 0) --r;
    return {r, n / r};
}

UndirectedGraph generate_graph(const GenSpec& spec, Rng& rng) {
    switch (spec.family) {
        case Family::erdos_renyi: return gen_erdos_renyi(spec.num_states, spec.p_edge, rng);
        case Family::barabasi_albert: return gen_barabasi_albert(spec.num_states, spec.ba_m, rng);
        case Family::star: return gen_star(spec.num_states);
        case Family::caveman: return gen_caveman(std::max(2, spec.num_states / 5), 5);
        case Family::caterpillar: return gen_caterpillar(spec.num_states, rng);
        case Family::lobster: return gen_lobster(spec.num_states, rng);
        case Family::tree: return gen_tree(spec.num_states, rng);
        case Family::grid: {
            const auto [rows, cols] = grid_shape_for(spec.num_states);
            return gen_grid(rows, cols);
        }
        case Family::ladder: return gen_ladder(std::max(2, spec.num_states / 2));
        case Family::line: return gen_line(spec.num_states);
        case Family::maze:
            throw std::invalid_argument("generate_graph: maze has no plain-graph form");
    }
    throw std::invalid_argument("unknown family");
}

Mdp generate_mdp(const GenSpec& spec, Rng& rng) {
    if (spec.family == Family::maze) {
        return gen_maze_mdp(spec.maze_side, spec.obstacle_density, spec.num_states, spec.gamma, rng).mdp;
    }
    // actions differ only in where they can lead, so each action gets an
    // independently sampled support (identical for deterministic families)
    std::vector<UndirectedGraph> supports;
    supports.reserve(spec.num_actions);
    for (int a = 0; a < spec.num_actions; ++a) supports.push_back(generate_graph(spec, rng));
    return action_graphs_to_mdp(supports, spec.gamma, rng);
}

}  // namespace viexec
