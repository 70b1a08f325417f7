#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "viexec/executor.hpp"
#include "viexec/graphgen.hpp"
#include "viexec/mdp.hpp"
#include "viexec/vi.hpp"

namespace viexec {

/// One value-update step fed back on itself during rollouts.
using StepFn = std::function<ValueFunction(const Mdp&, const ValueFunction&)>;

/// Reusable executor step: caches the action-graph structure of the current
/// MDP (by address) and its tape across rollout steps. Use one instance per
/// rollout; a second MDP at a recycled address would alias the cache.
class ExecutorStepper {
public:
    explicit ExecutorStepper(const MpnnParams& params) : params_(&params) {}

    ValueFunction step(const Mdp& mdp, const ValueFunction& v);

    StepFn as_step_fn() {
        return [this](const Mdp& mdp, const ValueFunction& v) { return step(mdp, v); };
    }

private:
    const MpnnParams* params_;
    const Mdp* cached_mdp_ = nullptr;
    ActionGraphs graphs_;
    ExecutorTape tape_;
};

struct RolloutResult {
    ValueFunction final_values;
    int steps = 0;
    bool converged = false;
    std::vector<double> mse_series;  // vs v_star, one entry per step
    std::vector<double> acc_series;  // policy accuracy vs v_star, in [0,1]
};

/// Iterates v <- step(mdp, v) from v = 0 until the max-norm change drops
/// below tolerance or max_steps is reached, recording per-step metrics
/// against v_star. Throws DivergenceError on non-finite values.
RolloutResult rollout(const StepFn& step, const Mdp& mdp, const ValueFunction& v_star,
                      double tolerance = 1e-4, int max_steps = 200);

struct SuiteEntry {
    GenSpec spec;
    int count = 100;
};

struct MetricsRow {
    GenSpec spec;
    std::string variant;
    double mse = 0.0;
    double accuracy_percent = 0.0;
    int count = 0;
    std::uint64_t seed_lo = 0;
    std::uint64_t seed_hi = 0;
    double converged_fraction = 0.0;
    std::string error;  // non-fatal per-row failure, empty on success
};

struct MetricsTable {
    std::vector<MetricsRow> rows;
};

struct EvalOptions {
    double tolerance = 1e-4;
    int max_steps = 200;
    int workers = 0;  // 0 = all available
    bool keep_rollouts = false;
};

struct SuiteResult {
    MetricsTable table;
    // per-row rollouts, only filled when options.keep_rollouts is set
    std::vector<std::vector<RolloutResult>> rollouts;
};

/// Generates `count` fresh test MDPs per suite entry (seed namespace
/// "eval-mdp", disjoint from training), rolls each out and aggregates mean
/// final MSE and mean policy accuracy. Uses `make_step` to obtain one StepFn
/// per worker. Row-level failures are recorded, not fatal.
SuiteResult evaluate_suite(const std::function<StepFn()>& make_step, const std::string& variant,
                           const std::vector<SuiteEntry>& suite, std::uint64_t seed,
                           const EvalOptions& options);

/// evaluate_suite with the exact Bellman update in place of the executor;
/// passes iff the harness itself is sound.
SuiteResult oracle_selftest(const std::vector<SuiteEntry>& suite, std::uint64_t seed, int workers);

struct Curves {
    std::vector<double> mse;
    std::vector<double> accuracy;  // percent
};

/// Pointwise means over rollouts; rollouts that converged early are padded
/// with their final metric values.
Curves per_step_curves(const std::vector<RolloutResult>& results);

/// The ten Table-2 graph families at |S| targets {20, 50, 100} plus the maze
/// row, with |A| = {5, 10, 20} and 8 respectively.
std::vector<SuiteEntry> table2_suite(int count_per_cell = 100, double gamma = 0.9);

/// Size-generalisation suite: Erdos-Renyi at (20,5), (50,10), (100,20).
std::vector<SuiteEntry> size_generalisation_suite(int count_per_cell = 100, double gamma = 0.9);

/// Fixed-action-count grid: |A| in {5,10,20} x |S| in {20,50,100}.
std::vector<SuiteEntry> figure2_suite(int count_per_cell = 100, double gamma = 0.9);

std::string metrics_csv(const MetricsTable& table);
std::string curves_csv(const Curves& curves);

/// Plain-text pivot (families x sizes, MSE block then accuracy block) in the
/// style of the result tables.
std::string metrics_text_table(const MetricsTable& table);

}  // namespace viexec
