#include "viexec/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "viexec/errors.hpp"
#include "viexec/rng.hpp"
#include "viexec/textio.hpp"

namespace viexec {

namespace {

int resolve_workers(int workers) {
    if (workers > 0) return workers;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_graph_values(ActionGraphs& graphs, const ValueFunction& v) {
    for (auto& g : graphs.actions) g.node_v = v;
}

}  // namespace

ValueFunction ExecutorStepper::step(const Mdp& mdp, const ValueFunction& v) {
    if (cached_mdp_ != &mdp) {
        graphs_ = build_action_graphs(mdp, v);
        cached_mdp_ = &mdp;
    } else {
        set_graph_values(graphs_, v);
    }
    executor_forward(graphs_, *params_, tape_);
    return {tape_.out.begin(), tape_.out.begin() + mdp.num_states};
}

RolloutResult rollout(const StepFn& step, const Mdp& mdp, const ValueFunction& v_star,
                      double tolerance, int max_steps) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("rollout: tolerance must be positive");
    RolloutResult result;
    ValueFunction v(mdp.num_states, 0.0);
    for (int t = 0; t < max_steps; ++t) {
        ValueFunction next = step(mdp, v);
        for (double x : next) {
            if (!std::isfinite(x)) {
                throw DivergenceError("rollout produced a non-finite value at step " +
                                      std::to_string(t + 1));
            }
        }
        result.mse_series.push_back(value_mse(next, v_star));
        result.acc_series.push_back(policy_accuracy(mdp, next, v_star));
        const double delta = max_norm_diff(next, v);
        v = std::move(next);
        result.steps = t + 1;
        if (delta < tolerance) {
            result.converged = true;
            break;
        }
    }
    result.final_values = std::move(v);
    return result;
}

SuiteResult evaluate_suite(const std::function<StepFn()>& make_step, const std::string& variant,
                           const std::vector<SuiteEntry>& suite, std::uint64_t seed,
                           const EvalOptions& options) {
    if (options.max_steps < 1) throw std::invalid_argument("evaluate_suite: max_steps must be >= 1");
    const int workers = resolve_workers(options.workers);
    SuiteResult result;
    result.table.rows.resize(suite.size());
    result.rollouts.resize(options.keep_rollouts ? suite.size() : 0);

    for (std::size_t row = 0; row < suite.size(); ++row) {
        const SuiteEntry& entry = suite[row];
        MetricsRow& out = result.table.rows[row];
        out.spec = entry.spec;
        out.variant = variant;
        out.count = entry.count;
        // per-MDP seeds: index = row * 2^20 + i keeps rows disjoint
        const std::uint64_t index_base = static_cast<std::uint64_t>(row) << 20;
        out.seed_lo = derive_seed(seed, "eval-mdp", index_base);
        out.seed_hi = derive_seed(seed, "eval-mdp", index_base + entry.count - 1);

        std::vector<RolloutResult> rollouts(entry.count);
        std::vector<std::string> errors(entry.count);

#pragma omp parallel for num_threads(workers) schedule(dynamic) if (workers > 1)
        for (int i = 0; i < entry.count; ++i) {
            try {
                Rng rng(derive_seed(seed, "eval-mdp", index_base + i));
                const Mdp mdp = generate_mdp(entry.spec, rng);
                const ViTrajectory oracle = solve(mdp);
                // one step closure per rollout: a stepper caches graph
                // structure by MDP identity and must not outlive it
                const StepFn step = make_step();
                rollouts[i] = rollout(step, mdp, oracle.steps.back(), options.tolerance,
                                      options.max_steps);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }

        for (int i = 0; i < entry.count; ++i) {
            if (!errors[i].empty()) {
                out.error = "mdp " + std::to_string(i) + ": " + errors[i];
                break;
            }
        }
        if (out.error.empty() && entry.count > 0) {
            double mse = 0.0, acc = 0.0, conv = 0.0;
            for (const auto& r : rollouts) {
                mse += r.mse_series.back();
                acc += r.acc_series.back();
                conv += r.converged ? 1.0 : 0.0;
            }
            out.mse = mse / entry.count;
            out.accuracy_percent = 100.0 * acc / entry.count;
            out.converged_fraction = conv / entry.count;
        }
        if (options.keep_rollouts) result.rollouts[row] = std::move(rollouts);
    }
    return result;
}

SuiteResult oracle_selftest(const std::vector<SuiteEntry>& suite, std::uint64_t seed, int workers) {
    EvalOptions options;
    // tight tolerance so the rolled-out values match v* to ~1e-9
    options.tolerance = 1e-10;
    options.max_steps = 400;
    options.workers = workers;
    auto make_step = [] {
        return StepFn([](const Mdp& mdp, const ValueFunction& v) { return vi_step(mdp, v); });
    };
    return evaluate_suite(make_step, "oracle", suite, seed, options);
}

Curves per_step_curves(const std::vector<RolloutResult>& results) {
    if (results.empty()) throw std::invalid_argument("per_step_curves: no rollouts");
    std::size_t max_len = 0;
    for (const auto& r : results) max_len = std::max(max_len, r.mse_series.size());
    Curves curves;
    curves.mse.resize(max_len);
    curves.accuracy.resize(max_len);
    for (std::size_t t = 0; t < max_len; ++t) {
        double mse = 0.0, acc = 0.0;
        for (const auto& r : results) {
            const std::size_t i = std::min(t, r.mse_series.size() - 1);
            mse += r.mse_series[i];
            acc += r.acc_series[i];
        }
        curves.mse[t] = mse / results.size();
        curves.accuracy[t] = 100.0 * acc / results.size();
    }
    return curves;
}

namespace {

GenSpec er_spec(int n, int a, double gamma) {
    GenSpec spec;
    spec.family = Family::erdos_renyi;
    spec.num_states = n;
    spec.num_actions = a;
    spec.gamma = gamma;
    return spec;
}

}  // namespace

std::vector<SuiteEntry> size_generalisation_suite(int count_per_cell, double gamma) {
    return {
        {er_spec(20, 5, gamma), count_per_cell},
        {er_spec(50, 10, gamma), count_per_cell},
        {er_spec(100, 20, gamma), count_per_cell},
    };
}

std::vector<SuiteEntry> table2_suite(int count_per_cell, double gamma) {
    static const Family families[] = {
        Family::erdos_renyi, Family::barabasi_albert, Family::star,  Family::caveman,
        Family::caterpillar, Family::lobster,         Family::tree,  Family::grid,
        Family::ladder,      Family::line,
    };
    static const int sizes[] = {20, 50, 100};
    static const int actions[] = {5, 10, 20};
    std::vector<SuiteEntry> suite;
    for (Family family : families) {
        for (int i = 0; i < 3; ++i) {
            GenSpec spec = er_spec(sizes[i], actions[i], gamma);
            spec.family = family;
            suite.push_back({spec, count_per_cell});
        }
    }
    GenSpec maze;
    maze.family = Family::maze;
    maze.num_states = 20;
    maze.num_actions = 8;
    maze.gamma = gamma;
    suite.push_back({maze, count_per_cell});
    return suite;
}

std::vector<SuiteEntry> figure2_suite(int count_per_cell, double gamma) {
    std::vector<SuiteEntry> suite;
    for (int a : {5, 10, 20}) {
        for (int n : {20, 50, 100}) {
            suite.push_back({er_spec(n, a, gamma), count_per_cell});
        }
    }
    return suite;
}

std::string metrics_csv(const MetricsTable& table) {
    std::ostringstream out;
    out << "family,num_states,num_actions,variant,mse,accuracy_percent,count,seed_lo,seed_hi\n";
    for (const auto& row : table.rows) {
        out << family_name(row.spec.family) << ',' << row.spec.num_states << ','
            << row.spec.num_actions << ',' << row.variant << ',';
        if (row.error.empty()) {
            out << format_double(row.mse) << ',' << format_double(row.accuracy_percent);
        } else {
            out << "error,error";
        }
        out << ',' << row.count << ',' << row.seed_lo << ',' << row.seed_hi << '\n';
    }
    return out.str();
}

std::string curves_csv(const Curves& curves) {
    std::ostringstream out;
    out << "step,mse,accuracy\n";
    for (std::size_t t = 0; t < curves.mse.size(); ++t) {
        out << (t + 1) << ',' << format_double(curves.mse[t]) << ','
            << format_double(curves.accuracy[t]) << '\n';
    }
    return out.str();
}

std::string metrics_text_table(const MetricsTable& table) {
    // pivot: one line per (variant, family), one column pair per |S|
    std::vector<int> sizes;
    for (const auto& row : table.rows) {
        if (std::find(sizes.begin(), sizes.end(), row.spec.num_states) == sizes.end()) {
            sizes.push_back(row.spec.num_states);
        }
    }
    std::sort(sizes.begin(), sizes.end());

    struct Key {
        std::string variant, family;
        bool operator<(const Key& o) const {
            return variant != o.variant ? variant < o.variant : family < o.family;
        }
    };
    std::map<Key, std::map<int, const MetricsRow*>> grid;
    std::vector<Key> order;
    for (const auto& row : table.rows) {
        Key key{row.variant, family_name(row.spec.family)};
        if (grid.find(key) == grid.end()) order.push_back(key);
        grid[key][row.spec.num_states] = &row;
    }

    std::ostringstream out;
    char buf[64];
    out << "model / environment";
    for (int n : sizes) {
        std::snprintf(buf, sizeof buf, "  mse@%-4d", n);
        out << buf;
    }
    for (int n : sizes) {
        std::snprintf(buf, sizeof buf, "  acc@%-4d", n);
        out << buf;
    }
    out << '\n';
    for (const auto& key : order) {
        std::snprintf(buf, sizeof buf, "%-19s", (key.variant + " " + key.family).c_str());
        out << buf;
        const auto& cells = grid[key];
        auto emit = [&](bool accuracy) {
            for (int n : sizes) {
                const auto it = cells.find(n);
                if (it == cells.end() || !it->second->error.empty()) {
                    std::snprintf(buf, sizeof buf, "  %8s", "-");
                } else if (accuracy) {
                    std::snprintf(buf, sizeof buf, "  %8.2f", it->second->accuracy_percent);
                } else {
                    std::snprintf(buf, sizeof buf, "  %8.3f", it->second->mse);
                }
                out << buf;
            }
        };
        emit(false);
        emit(true);
        out << '\n';
    }
    return out.str();
}

}  // namespace viexec
