#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "viexec/executor.hpp"
#include "viexec/graphgen.hpp"
#include "viexec/nn.hpp"

namespace viexec {

struct TrainConfig {
    MpnnConfig mpnn;
    GenSpec spec;  // training distribution, default ER |S|=20 |A|=5
    int num_train_mdps = 1000;
    int t_sup = 30;  // supervised steps per MDP
    int epochs = 50;
    int batch_size = 32;
    AdamConfig adam;
    int val_mdps = 50;
    double val_tolerance = 1e-4;
    int val_max_steps = 200;
    int checkpoint_every = 10;  // 0 disables periodic checkpoints
    std::uint64_t seed = 0;
    int workers = 0;  // 0 = all available
    // debug: assert per epoch that the loss is invariant under state relabeling
    bool check_perm_invariance = false;

    void validate() const;
};

/// One training example: an MDP plus its oracle trajectory truncated/padded
/// to t_sup + 1 value vectors. If the oracle converges early the tail repeats
/// the fixed point.
struct TrainItem {
    Mdp mdp;
    std::vector<ValueFunction> targets;
};

std::vector<TrainItem> make_dataset(const GenSpec& spec, int count, int t_sup, std::uint64_t seed,
                                    const std::string& seed_tag);

/// Called with every executor input during teacher forcing; used by tests to
/// assert that inputs come exclusively from the oracle trajectory.
using StepObserver = std::function<void(int t, const ValueFunction& input)>;

/// Mean over t of mse(executor_step(mdp, v_t), v_{t+1}) with ground-truth
/// inputs at every step. Accumulates parameter gradients when accumulate is
/// set (scaled so they are gradients of the returned mean).
double teacher_forced_loss(MpnnParams& params, const Mdp& mdp,
                           const std::vector<ValueFunction>& targets, bool accumulate,
                           ExecutorTape& tape, const StepObserver* observer = nullptr);

/// Computes the batch-mean teacher-forced loss over items [begin, end) and
/// leaves the averaged gradients in params. Per-item gradients are computed
/// independently (optionally across workers) and reduced in fixed item order,
/// so the result is identical for any worker count.
double batch_gradients(MpnnParams& params, const std::vector<TrainItem>& items, int begin, int end,
                       int workers);

struct TrainLog {
    std::vector<double> train_loss;
    std::vector<double> val_mse;
    std::vector<double> val_acc;  // percent
    std::vector<double> seconds;
};

struct TrainResult {
    MpnnParams params;
    TrainLog log;
};

/// Full teacher-forced training run: dataset generation, mini-batch loop with
/// adaptive-moment updates, per-epoch rollout validation on held-out MDPs.
/// Deterministic given config.seed. If out_dir is non-empty, periodic and
/// final checkpoints are written there. Throws DivergenceError on non-finite
/// loss.
TrainResult train(const TrainConfig& config, const std::string& out_dir = "",
                  const std::function<void(int, const TrainLog&)>& on_epoch = nullptr);

/// CSV with header epoch,train_loss,val_mse,val_acc,seconds.
std::string train_log_csv(const TrainLog& log);

}  // namespace viexec
