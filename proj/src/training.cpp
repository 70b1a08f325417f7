#include "viexec/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "viexec/checkpoint.hpp"
#include "viexec/errors.hpp"
#include "viexec/evaluation.hpp"
#include "viexec/textio.hpp"
#include "viexec/vi.hpp"

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

}  // namespace

void TrainConfig::validate() const {
    mpnn.validate();
    if (t_sup < 1) throw ConfigError("t_sup must be >= 1");
    if (num_train_mdps < 1) throw ConfigError("num_train_mdps must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (val_mdps < 0) throw ConfigError("val_mdps must be >= 0");
}

std::vector<TrainItem> make_dataset(const GenSpec& spec, int count, int t_sup, std::uint64_t seed,
                                    const std::string& seed_tag) {
    if (count < 1) throw std::invalid_argument("make_dataset: count must be >= 1");
    std::vector<TrainItem> items(count);
    for (int i = 0; i < count; ++i) {
        Rng rng(derive_seed(seed, seed_tag, i));
        items[i].mdp = generate_mdp(spec, rng);
        const ViTrajectory traj = solve(items[i].mdp);
        auto& targets = items[i].targets;
        targets.reserve(t_sup + 1);
        for (int t = 0; t <= t_sup; ++t) {
            targets.push_back(t < static_cast<int>(traj.steps.size()) ? traj.steps[t]
                                                                      : traj.steps.back());
        }
    }
    return items;
}

double teacher_forced_loss(MpnnParams& params, const Mdp& mdp,
                           const std::vector<ValueFunction>& targets, bool accumulate,
                           ExecutorTape& tape, const StepObserver* observer) {
    if (targets.size() < 2) throw std::invalid_argument("teacher_forced_loss: need >= 2 targets");
    const int t_sup = static_cast<int>(targets.size()) - 1;
    const double scale = 1.0 / t_sup;
    double total = 0.0;
    for (int t = 0; t < t_sup; ++t) {
        if (observer != nullptr) (*observer)(t, targets[t]);
        if (accumulate) {
            total += step_loss_grad(mdp, targets[t], targets[t + 1], params, tape, scale);
        } else {
            const ActionGraphs graphs = build_action_graphs(mdp, targets[t]);
            executor_forward(graphs, params, tape);
            ValueFunction pred(tape.out.begin(), tape.out.begin() + mdp.num_states);
            total += mse_loss(pred, targets[t + 1]).first;
        }
    }
    return total * scale;
}

double batch_gradients(MpnnParams& params, const std::vector<TrainItem>& items, int begin, int end,
                       int workers) {
    const int count = end - begin;
    if (count < 1) throw std::invalid_argument("batch_gradients: empty batch");
    const int nthreads = std::min(resolve_workers(workers), count);
    const auto tensors = params.tensors();

    // per-item gradient buffers, reduced in fixed order below
    std::vector<std::vector<std::vector<double>>> item_grads(count);
    std::vector<double> item_loss(count, 0.0);

#pragma omp parallel num_threads(nthreads) if (nthreads > 1)
    {
        MpnnParams local = params;  // weights read-only, gradients thread-private
        auto local_tensors = local.tensors();
        local.zero_grads();
        ExecutorTape tape;
#pragma omp for schedule(static)
        for (int i = 0; i < count; ++i) {
            const TrainItem& item = items[begin + i];
            item_loss[i] = teacher_forced_loss(local, item.mdp, item.targets, true, tape);
            auto& grads = item_grads[i];
            grads.resize(local_tensors.size());
            for (std::size_t k = 0; k < local_tensors.size(); ++k) {
                grads[k] = local_tensors[k]->grad;
                local_tensors[k]->zero_grad();
            }
        }
    }

    const double inv = 1.0 / count;
    for (std::size_t k = 0; k < tensors.size(); ++k) {
        auto& grad = tensors[k]->grad;
        std::fill(grad.begin(), grad.end(), 0.0);
        for (int i = 0; i < count; ++i) {
            const auto& g = item_grads[i][k];
            for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += g[j];
        }
        for (auto& x : grad) x *= inv;
    }
    double loss = 0.0;
    for (int i = 0; i < count; ++i) loss += item_loss[i];
    return loss * inv;
}

namespace {

struct ValItem {
    Mdp mdp;
    ValueFunction v_star;
};

std::pair<double, double> validate_params(const MpnnParams& params, const std::vector<ValItem>& val,
                                          const TrainConfig& config) {
    if (val.empty()) return {0.0, 0.0};
    const int workers = std::min(resolve_workers(config.workers), static_cast<int>(val.size()));
    std::vector<double> mse(val.size(), 0.0), acc(val.size(), 0.0);
#pragma omp parallel for num_threads(workers) schedule(dynamic) if (workers > 1)
    for (int i = 0; i < static_cast<int>(val.size()); ++i) {
        ExecutorStepper stepper(params);
        const RolloutResult r = rollout(stepper.as_step_fn(), val[i].mdp, val[i].v_star,
                                        config.val_tolerance, config.val_max_steps);
        mse[i] = r.mse_series.back();
        acc[i] = r.acc_series.back();
    }
    double mse_mean = 0.0, acc_mean = 0.0;
    for (std::size_t i = 0; i < val.size(); ++i) {
        mse_mean += mse[i];
        acc_mean += acc[i];
    }
    return {mse_mean / val.size(), 100.0 * acc_mean / val.size()};
}

void check_epoch_perm_invariance(MpnnParams& params, const TrainItem& item, std::uint64_t seed,
                                 int epoch) {
    Rng rng(derive_seed(seed, "permcheck", epoch));
    std::vector<int> perm(item.mdp.num_states);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.uniform_int(i)]);
    }
    TrainItem permuted;
    permuted.mdp = permute_states(item.mdp, perm);
    for (const auto& v : item.targets) permuted.targets.push_back(permute_values(v, perm));
    ExecutorTape tape;
    const double base = teacher_forced_loss(params, item.mdp, item.targets, false, tape);
    const double relabeled = teacher_forced_loss(params, permuted.mdp, permuted.targets, false, tape);
    if (std::fabs(base - relabeled) > 1e-9) {
        throw std::logic_error("teacher-forced loss not invariant under state relabeling: " +
                               format_double(base) + " vs " + format_double(relabeled));
    }
}

}  // namespace

TrainResult train(const TrainConfig& config, const std::string& out_dir,
                  const std::function<void(int, const TrainLog&)>& on_epoch) {
    config.validate();
    auto dataset = make_dataset(config.spec, config.num_train_mdps, config.t_sup, config.seed,
                                "train-mdp");

    std::vector<ValItem> val(config.val_mdps);
    for (int i = 0; i < config.val_mdps; ++i) {
        Rng rng(derive_seed(config.seed, "val-mdp", i));
        val[i].mdp = generate_mdp(config.spec, rng);
        val[i].v_star = solve(val[i].mdp).steps.back();
    }

    Rng init_rng(derive_seed(config.seed, "init", 0));
    TrainResult result{MpnnParams::init(config.mpnn, init_rng), {}};
    MpnnParams& params = result.params;

    AdamState adam;
    adam.init(params.tensors());

    std::vector<int> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::vector<TrainItem> batch_view;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        if (config.check_perm_invariance) {
            check_epoch_perm_invariance(params, dataset[0], config.seed, epoch);
        }
        // deterministic reshuffle per epoch
        Rng shuffle_rng(derive_seed(config.seed, "shuffle", epoch));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);
        }

        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t pos = 0; pos < order.size(); pos += config.batch_size) {
            const std::size_t batch_end = std::min(pos + config.batch_size, order.size());
            batch_view.clear();
            for (std::size_t i = pos; i < batch_end; ++i) batch_view.push_back(dataset[order[i]]);
            const double loss =
                batch_gradients(params, batch_view, 0, static_cast<int>(batch_view.size()),
                                config.workers);
            if (!std::isfinite(loss)) {
                throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) +
                                      ", batch " + std::to_string(batches));
            }
            adam_step(params.tensors(), adam, config.adam);
            epoch_loss += loss * static_cast<double>(batch_end - pos);
            ++batches;
        }
        epoch_loss /= static_cast<double>(order.size());

        const auto [val_mse, val_acc] = validate_params(params, val, config);
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.log.train_loss.push_back(epoch_loss);
        result.log.val_mse.push_back(val_mse);
        result.log.val_acc.push_back(val_acc);
        result.log.seconds.push_back(elapsed);

        if (!out_dir.empty() && config.checkpoint_every > 0 &&
            (epoch + 1) % config.checkpoint_every == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "/checkpoint_epoch_%04d.json", epoch + 1);
            save_checkpoint(out_dir + name, params);
        }
        if (on_epoch) on_epoch(epoch, result.log);
    }

    if (!out_dir.empty()) save_checkpoint(out_dir + "/checkpoint.json", params);
    return result;
}

std::string train_log_csv(const TrainLog& log) {
    std::ostringstream out;
    out << "epoch,train_loss,val_mse,val_acc,seconds\n";
    for (std::size_t e = 0; e < log.train_loss.size(); ++e) {
        out << (e + 1) << ',' << format_double(log.train_loss[e]) << ','
            << format_double(log.val_mse[e]) << ',' << format_double(log.val_acc[e]) << ','
            << format_double(log.seconds[e]) << '\n';
    }
    return out.str();
}

}  // namespace viexec
