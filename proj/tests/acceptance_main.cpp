// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
// Criteria 6-8 share a single default training run, so the full suite takes
// tens of minutes; `--only 1,2,5` runs a subset.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "viexec/checkpoint.hpp"
#include "viexec/cli.hpp"
#include "viexec/evaluation.hpp"
#include "viexec/gradcheck.hpp"
#include "viexec/rng.hpp"
#include "viexec/textio.hpp"
#include "viexec/training.hpp"
#include "viexec/vi.hpp"

using namespace viexec;

namespace {

struct Criterion {
    int id;
    std::string description;
    bool pass = false;
    std::string detail;
};

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

Mdp random_er_mdp(std::uint64_t seed) {
    GenSpec spec;  // ER 20/5, gamma 0.9
    Rng rng(seed);
    return generate_mdp(spec, rng);
}

// ---------------------------------------------------------------------------
// 1. oracle contraction + fixed point, 100 MDPs x 100 vector pairs, < 10 s
Criterion criterion1() {
    Criterion c{1, "oracle contraction and fixed point on 100 random MDPs"};
    const double start = now_seconds();
    Rng value_rng(derive_seed(1, "acc1-values", 0));
    double worst_violation = -1.0;
    double worst_fixed_point = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Mdp mdp = random_er_mdp(derive_seed(1, "acc1-mdp", i));
        for (int pair = 0; pair < 100; ++pair) {
            ValueFunction v1(mdp.num_states), v2(mdp.num_states);
            for (auto& x : v1) x = value_rng.uniform(-10.0, 10.0);
            for (auto& x : v2) x = value_rng.uniform(-10.0, 10.0);
            const double lhs = max_norm_diff(vi_step(mdp, v1), vi_step(mdp, v2));
            const double rhs = mdp.gamma * max_norm_diff(v1, v2);
            worst_violation = std::max(worst_violation, lhs - rhs);
        }
        const ViTrajectory traj = solve(mdp, 1e-8);
        const ValueFunction& v_star = traj.steps.back();
        worst_fixed_point =
            std::max(worst_fixed_point, max_norm_diff(vi_step(mdp, v_star), v_star));
    }
    const double elapsed = now_seconds() - start;
    c.pass = worst_violation <= 1e-12 && worst_fixed_point < 1e-7 && elapsed < 10.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "max contraction violation %.2e (<=1e-12), max |Tv*-v*| %.2e (<1e-7), %.1fs (<10s)",
                  worst_violation, worst_fixed_point, elapsed);
    c.detail = buf;
    return c;
}

// 2. closed-form geometric series
Criterion criterion2() {
    Criterion c{2, "closed-form check: r=1, gamma=0.9 solves to v*=10"};
    Mdp mdp;
    mdp.num_states = 1;
    mdp.num_actions = 1;
    mdp.gamma = 0.9;
    mdp.transitions = {{{0, 1.0}}};
    mdp.rewards = {1.0};
    const ViTrajectory traj = solve(mdp, 1e-8);
    const double v = traj.steps.back()[0];
    c.pass = traj.converged && std::fabs(v - 10.0) <= 1e-6;
    c.detail = "v* = " + format_double(v);
    return c;
}

// 3. gradient fidelity for all five variants, < 60 s
Criterion criterion3() {
    Criterion c{3, "finite-difference gradients for all five variants"};
    const double start = now_seconds();
    const auto checks = all_variant_grad_checks(1e-5, 1e-4);
    const double elapsed = now_seconds() - start;
    c.pass = elapsed < 60.0;
    double worst = 0.0;
    std::string worst_name;
    for (const auto& check : checks) {
        c.pass = c.pass && check.report.pass;
        for (const auto& entry : check.report.entries) {
            if (entry.max_rel_error > worst) {
                worst = entry.max_rel_error;
                worst_name = check.variant + "/" + entry.name;
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "worst rel err %.2e at %s (tol 1e-4), %.1fs (<60s)", worst,
                  worst_name.c_str(), elapsed);
    c.detail = buf;
    return c;
}

// 4. equivariance: 20 (MDP, permutation) pairs per variant at 1e-9
Criterion criterion4() {
    Criterion c{4, "state-permutation equivariance and action-permutation invariance"};
    static const char* variants[] = {"MPNN-Sum", "MPNN-Mean", "MPNN-Max", "MPNN-2-Sum",
                                     "Attn-Sum"};
    double worst = 0.0;
    for (const char* name : variants) {
        const MpnnConfig config = MpnnConfig::from_variant(name);
        for (int trial = 0; trial < 20; ++trial) {
            const std::uint64_t tseed = derive_seed(4, name, trial);
            const Mdp mdp = random_er_mdp(derive_seed(tseed, "mdp", 0));
            Rng rng(derive_seed(tseed, "aux", 0));
            MpnnParams params = MpnnParams::init(config, rng);
            ValueFunction v(mdp.num_states);
            for (auto& x : v) x = rng.uniform(0.0, 10.0);

            std::vector<int> perm(mdp.num_states);
            for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
            for (std::size_t i = perm.size(); i > 1; --i) {
                std::swap(perm[i - 1], perm[rng.uniform_int(i)]);
            }
            const ValueFunction direct = permute_values(executor_step(mdp, v, params), perm);
            const ValueFunction relabeled =
                executor_step(permute_states(mdp, perm), permute_values(v, perm), params);
            worst = std::max(worst, max_norm_diff(direct, relabeled));

            std::vector<int> aperm(mdp.num_actions);
            for (std::size_t i = 0; i < aperm.size(); ++i) aperm[i] = static_cast<int>(i);
            for (std::size_t i = aperm.size(); i > 1; --i) {
                std::swap(aperm[i - 1], aperm[rng.uniform_int(i)]);
            }
            const ValueFunction base = executor_step(mdp, v, params);
            const ValueFunction acted = executor_step(permute_actions(mdp, aperm), v, params);
            worst = std::max(worst, max_norm_diff(base, acted));
        }
    }
    c.pass = worst <= 1e-9;
    c.detail = "max deviation " + format_double(worst) + " (<=1e-9)";
    return c;
}

// 5. oracle self-test of the evaluation harness on every Table-2 row
Criterion criterion5(int workers) {
    Criterion c{5, "oracle self-test: MSE < 1e-10 and accuracy 100% on all Table-2 rows"};
    const auto suite = table2_suite(100);
    const SuiteResult result = oracle_selftest(suite, 20240817, workers);
    c.pass = true;
    double worst_mse = 0.0, worst_acc = 100.0;
    for (const auto& row : result.table.rows) {
        if (!row.error.empty()) {
            c.pass = false;
            c.detail = family_name(row.spec.family) + ": " + row.error;
            return c;
        }
        worst_mse = std::max(worst_mse, row.mse);
        worst_acc = std::min(worst_acc, row.accuracy_percent);
        c.pass = c.pass && row.mse < 1e-10 && row.accuracy_percent == 100.0;
    }
    c.detail = "31 rows, worst MSE " + format_double(worst_mse) + ", worst accuracy " +
               format_double(worst_acc) + "%";
    return c;
}

struct TrainedModel {
    MpnnParams params;
    double train_seconds = 0.0;
    TrainLog log;
    TrainedModel() : params(MpnnParams::zeros(MpnnConfig{})) {}
};

TrainedModel train_default_model(const std::string& out_dir, int workers) {
    TrainConfig config;  // defaults = the shipped training recipe
    config.seed = 20240817;
    config.workers = workers;
    std::printf("-- training MPNN-Sum with the default recipe (seed %llu)\n",
                static_cast<unsigned long long>(config.seed));
    std::fflush(stdout);
    const double start = now_seconds();
    TrainedModel model;
    const auto on_epoch = [](int epoch, const TrainLog& log) {
        if ((epoch + 1) % 10 == 0) {
            std::printf("   epoch %3d: loss %.5f val_mse %.3f val_acc %.2f%%\n", epoch + 1,
                        log.train_loss.back(), log.val_mse.back(), log.val_acc.back());
            std::fflush(stdout);
        }
    };
    TrainResult result = train(config, out_dir, on_epoch);
    model.params = std::move(result.params);
    model.log = std::move(result.log);
    model.train_seconds = now_seconds() - start;
    std::printf("-- training finished in %.0fs\n", model.train_seconds);
    std::fflush(stdout);
    return model;
}

std::function<StepFn()> stepper_factory(const MpnnParams& params) {
    return [&params] {
        auto stepper = std::make_shared<ExecutorStepper>(params);
        return StepFn(
            [stepper](const Mdp& mdp, const ValueFunction& v) { return stepper->step(mdp, v); });
    };
}

// 6. size generalisation thresholds after default training (< 30 min)
Criterion criterion6(const TrainedModel& model, const SuiteResult& sizes) {
    Criterion c{6, "size generalisation: accuracy >= 95% at (20,5), (50,10), (100,20)"};
    if (sizes.table.rows.size() != 3) {
        c.detail = "evaluation failed";
        return c;
    }
    for (const auto& row : sizes.table.rows) {
        if (!row.error.empty()) {
            c.detail = row.error;
            return c;
        }
    }
    const auto& r20 = sizes.table.rows[0];
    const auto& r50 = sizes.table.rows[1];
    const auto& r100 = sizes.table.rows[2];
    const bool acc_ok =
        r20.accuracy_percent >= 95.0 && r50.accuracy_percent >= 95.0 && r100.accuracy_percent >= 95.0;
    const bool finite = std::isfinite(r20.mse) && std::isfinite(r50.mse) && std::isfinite(r100.mse);
    // monotone OOD growth, bounded by 3x the published growth ratios
    const bool monotone = r50.mse > r20.mse && r100.mse > r20.mse;
    const bool bounded =
        r50.mse / r20.mse <= 3.0 * (2.175 / 0.457) && r100.mse / r20.mse <= 3.0 * (5.154 / 0.457);
    const bool time_ok = model.train_seconds < 1800.0;
    c.pass = acc_ok && finite && monotone && bounded && time_ok;
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "acc %.2f/%.2f/%.2f%% (>=95), mse %.3f/%.3f/%.3f (monotone %s), train %.0fs (<1800)",
                  r20.accuracy_percent, r50.accuracy_percent, r100.accuracy_percent, r20.mse,
                  r50.mse, r100.mse, monotone && bounded ? "yes" : "NO", model.train_seconds);
    c.detail = buf;
    return c;
}

// 7. Table-2 structure: BA >= 95%, Line at least 2 points below BA, maze >= 55%
Criterion criterion7(const TrainedModel& model, int workers) {
    Criterion c{7, "environment zoo: BA(20) >= 95%, Line(20) <= BA-2, maze >= 55%"};
    GenSpec ba;
    ba.family = Family::barabasi_albert;
    GenSpec line;
    line.family = Family::line;
    GenSpec maze;
    maze.family = Family::maze;
    maze.num_actions = 8;
    const std::vector<SuiteEntry> suite = {{ba, 100}, {line, 100}, {maze, 100}};
    EvalOptions options;
    options.workers = workers;
    const SuiteResult result =
        evaluate_suite(stepper_factory(model.params), "MPNN-Sum", suite, 20240817, options);
    for (const auto& row : result.table.rows) {
        if (!row.error.empty()) {
            c.detail = row.error;
            return c;
        }
    }
    const double acc_ba = result.table.rows[0].accuracy_percent;
    const double acc_line = result.table.rows[1].accuracy_percent;
    const double acc_maze = result.table.rows[2].accuracy_percent;
    c.pass = acc_ba >= 95.0 && acc_line <= acc_ba - 2.0 && acc_maze >= 55.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "BA %.2f%% (>=95), Line %.2f%% (<=BA-2), maze %.2f%% (>=55)",
                  acc_ba, acc_line, acc_maze);
    c.detail = buf;
    return c;
}

// 8. per-step curves plateau within 2 accuracy points; >= 90% rollouts converge
Criterion criterion8(const SuiteResult& sizes) {
    Criterion c{8, "accuracy curves plateau (2-point band) and >= 90% of rollouts converge"};
    if (sizes.rollouts.empty()) {
        c.detail = "no rollout series kept";
        return c;
    }
    c.pass = true;
    std::string detail;
    for (std::size_t row = 0; row < sizes.rollouts.size(); ++row) {
        const auto& rollouts = sizes.rollouts[row];
        const Curves curves = per_step_curves(rollouts);
        const double plateau = curves.accuracy.back();
        std::size_t reach = curves.accuracy.size();
        for (std::size_t t = 0; t < curves.accuracy.size(); ++t) {
            if (std::fabs(curves.accuracy[t] - plateau) <= 2.0) {
                reach = t;
                break;
            }
        }
        bool holds = reach < curves.accuracy.size();
        for (std::size_t t = reach; t < curves.accuracy.size(); ++t) {
            holds = holds && std::fabs(curves.accuracy[t] - plateau) <= 2.0;
        }
        double converged = 0.0;
        for (const auto& r : rollouts) converged += r.converged ? 1.0 : 0.0;
        converged /= static_cast<double>(rollouts.size());
        c.pass = c.pass && holds && converged >= 0.9;
        char buf[120];
        std::snprintf(buf, sizeof buf, "%s|S|=%d: plateau@%zu holds=%s conv=%.0f%%",
                      row > 0 ? "; " : "", sizes.table.rows[row].spec.num_states, reach + 1,
                      holds ? "yes" : "NO", 100.0 * converged);
        detail += buf;
    }
    c.detail = detail;
    return c;
}

// 9. end-to-end determinism of generate -> train -> evaluate
Criterion criterion9(const std::string& out_dir) {
    Criterion c{9, "identical seeds give byte-identical checkpoints and metrics"};
    namespace fs = std::filesystem;
    const std::string config_path = out_dir + "/determinism_config.json";
    write_file(config_path, R"({
  "version": 1,
  "seed": 977,
  "generate": {"datasets": [{"count": 4, "spec": {"family": "erdos_renyi",
               "num_states": 12, "num_actions": 3}}]},
  "train": {"variant": "MPNN-Sum", "hidden_dim": 16, "num_train_mdps": 24, "t_sup": 8,
            "epochs": 2, "batch_size": 8, "val_mdps": 4, "val_max_steps": 40},
  "evaluate": {"suite": [{"count": 4, "spec": {"family": "erdos_renyi", "num_states": 12,
               "num_actions": 3}}], "max_steps": 60}
})");
    auto run_pipeline = [&](const std::string& dir) {
        fs::remove_all(dir);
        int rc = run_cli({"generate", "--config", config_path, "--out", dir + "/data"});
        if (rc != 0) return rc;
        rc = run_cli({"train", "--config", config_path, "--out", dir + "/run", "--workers", "2"});
        if (rc != 0) return rc;
        return run_cli({"evaluate", "--config", config_path, "--checkpoint",
                        dir + "/run/checkpoint.json", "--out", dir + "/eval", "--workers", "2"});
    };
    const std::string dir_a = out_dir + "/det_a", dir_b = out_dir + "/det_b";
    if (run_pipeline(dir_a) != 0 || run_pipeline(dir_b) != 0) {
        c.detail = "pipeline run failed";
        return c;
    }
    const bool manifests =
        read_file(dir_a + "/data/manifest.json") == read_file(dir_b + "/data/manifest.json");
    const bool checkpoints =
        read_file(dir_a + "/run/checkpoint.json") == read_file(dir_b + "/run/checkpoint.json");
    const bool metrics =
        read_file(dir_a + "/eval/metrics.csv") == read_file(dir_b + "/eval/metrics.csv");
    c.pass = manifests && checkpoints && metrics;
    c.detail = std::string("manifest ") + (manifests ? "ok" : "DIFFERS") + ", checkpoint " +
               (checkpoints ? "ok" : "DIFFERS") + ", metrics " + (metrics ? "ok" : "DIFFERS");
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    std::string out_dir = "acceptance_out";
    int workers = 0;
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc) {
            out_dir = argv[++i];
        } else if (std::strcmp(argv[i], "--workers") == 0 && i + 1 < argc) {
            workers = std::atoi(argv[++i]);
        } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            for (const char* p = argv[++i]; *p != '\0'; ++p) {
                if (*p >= '1' && *p <= '9') only.push_back(*p - '0');
            }
        }
    }
    std::filesystem::create_directories(out_dir);
    auto wanted = [&](int id) {
        return only.empty() || std::find(only.begin(), only.end(), id) != only.end();
    };

    std::vector<Criterion> results;
    if (wanted(1)) results.push_back(criterion1());
    if (wanted(2)) results.push_back(criterion2());
    if (wanted(3)) results.push_back(criterion3());
    if (wanted(4)) results.push_back(criterion4());
    if (wanted(5)) results.push_back(criterion5(workers));

    if (wanted(6) || wanted(7) || wanted(8)) {
        const TrainedModel model = train_default_model(out_dir, workers);
        EvalOptions options;
        options.workers = workers;
        options.keep_rollouts = true;
        const SuiteResult sizes = evaluate_suite(stepper_factory(model.params), "MPNN-Sum",
                                                 size_generalisation_suite(100), 20240817, options);
        write_file(out_dir + "/size_generalisation.csv", metrics_csv(sizes.table));
        if (wanted(6)) results.push_back(criterion6(model, sizes));
        if (wanted(7)) results.push_back(criterion7(model, workers));
        if (wanted(8)) results.push_back(criterion8(sizes));
    }
    if (wanted(9)) results.push_back(criterion9(out_dir));

    bool all_pass = true;
    std::printf("\n");
    for (const auto& c : results) {
        std::printf("[%s] criterion %d: %s\n         %s\n", c.pass ? "PASS" : "FAIL", c.id,
                    c.description.c_str(), c.detail.c_str());
        all_pass = all_pass && c.pass;
    }
    std::printf("\nacceptance: %s (%zu criteria)\n", all_pass ? "PASS" : "FAIL", results.size());
    return all_pass ? 0 : 1;
}
