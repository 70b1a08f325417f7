#include "viexec/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "viexec/checkpoint.hpp"
#include "viexec/errors.hpp"
#include "viexec/gradcheck.hpp"
#include "viexec/rng.hpp"
#include "viexec/textio.hpp"
#include "viexec/vi.hpp"

namespace viexec {

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

std::string cell_slug(const GenSpec& spec) {
    return family_name(spec.family) + "_s" + std::to_string(spec.num_states) + "_a" +
           std::to_string(spec.num_actions);
}

}  // namespace

void cmd_generate(const ExperimentConfig& config, const std::string& out_dir) {
    if (!config.generate.has_value()) throw ConfigError("config has no generate section");
    ensure_dir(out_dir);
    nlohmann::json manifest;
    manifest["format_version"] = 1;
    auto entries = nlohmann::json::array();
    for (std::size_t d = 0; d < config.generate->datasets.size(); ++d) {
        const auto& dataset = config.generate->datasets[d];
        for (int i = 0; i < dataset.count; ++i) {
            const std::uint64_t mdp_seed =
                derive_seed(config.seed, "gen-mdp", (static_cast<std::uint64_t>(d) << 20) + i);
            Rng rng(mdp_seed);
            const Mdp mdp = generate_mdp(dataset.spec, rng);
            char name[128];
            std::snprintf(name, sizeof name, "mdp_d%zu_%04d_%s.json", d, i,
                          family_name(dataset.spec.family).c_str());
            const std::string content = mdp_to_json(mdp);
            write_file(out_dir + "/" + name, content);
            entries.push_back({{"file", name},
                               {"family", family_name(dataset.spec.family)},
                               {"num_states", mdp.num_states},
                               {"num_actions", mdp.num_actions},
                               {"gamma", mdp.gamma},
                               {"seed", mdp_seed},
                               {"hash", "fnv1a64:" + fnv1a_hex(content)}});
        }
    }
    manifest["entries"] = std::move(entries);
    write_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << manifest["entries"].size() << " MDP files to " << out_dir << "\n";
}

void cmd_train(const ExperimentConfig& config, const std::string& out_dir, int workers) {
    if (!config.train.has_value()) throw ConfigError("config has no train section");
    ensure_dir(out_dir);
    TrainConfig train_config = *config.train;
    train_config.workers = workers;
    const auto on_epoch = [](int epoch, const TrainLog& log) {
        std::printf("epoch %3d  loss %.6f  val_mse %.4g  val_acc %.2f%%  (%.1fs)\n", epoch + 1,
                    log.train_loss.back(), log.val_mse.back(), log.val_acc.back(),
                    log.seconds.back());
        std::fflush(stdout);
    };
    const TrainResult result = train(train_config, out_dir, on_epoch);
    write_file(out_dir + "/train_log.csv", train_log_csv(result.log));
    std::cout << "checkpoint written to " << out_dir << "/checkpoint.json\n";
}

namespace {

void dump_oracle_trajectories(const std::vector<SuiteEntry>& suite, std::uint64_t seed,
                              const std::string& dir) {
    ensure_dir(dir);
    for (std::size_t row = 0; row < suite.size(); ++row) {
        Rng rng(derive_seed(seed, "eval-mdp", static_cast<std::uint64_t>(row) << 20));
        const Mdp mdp = generate_mdp(suite[row].spec, rng);
        const ViTrajectory traj = solve(mdp);
        const std::string slug = cell_slug(suite[row].spec);
        write_file(dir + "/" + slug + "_mdp.json", mdp_to_json(mdp));
        nlohmann::json j;
        j["format_version"] = 1;
        j["converged"] = traj.converged;
        j["iterations"] = traj.iterations;
        j["steps"] = traj.steps;
        write_file(dir + "/" + slug + "_oracle.json", j.dump(2) + "\n");
    }
}

}  // namespace

void cmd_evaluate(const ExperimentConfig& config, const EvaluateArgs& args) {
    if (!config.evaluate.has_value()) throw ConfigError("config has no evaluate section");
    const EvaluateSection& section = *config.evaluate;
    ensure_dir(args.out_dir);

    EvalOptions options;
    options.tolerance = section.tolerance;
    options.max_steps = section.max_steps;
    options.workers = args.workers;
    options.keep_rollouts = section.curves;

    MetricsTable table;
    std::vector<std::pair<std::string, Curves>> curve_files;

    if (args.oracle_selftest || section.oracle_selftest) {
        SuiteResult result = oracle_selftest(section.suite, config.seed, args.workers);
        table = std::move(result.table);
    } else {
        if (args.checkpoints.empty()) {
            throw ConfigError("evaluate needs at least one --checkpoint (or --oracle-selftest)");
        }
        for (const auto& path : args.checkpoints) {
            const MpnnParams params = load_checkpoint(path);
            auto make_step = [&params] {
                auto stepper = std::make_shared<ExecutorStepper>(params);
                return StepFn([stepper](const Mdp& mdp, const ValueFunction& v) {
                    return stepper->step(mdp, v);
                });
            };
            SuiteResult result = evaluate_suite(make_step, params.config.variant(), section.suite,
                                                config.seed, options);
            for (auto& row : result.table.rows) table.rows.push_back(row);
            if (section.curves) {
                for (std::size_t r = 0; r < result.rollouts.size(); ++r) {
                    if (result.rollouts[r].empty() || !result.table.rows[r].error.empty()) continue;
                    curve_files.emplace_back("curves_" + params.config.variant() + "_" +
                                                 cell_slug(section.suite[r].spec) + ".csv",
                                             per_step_curves(result.rollouts[r]));
                }
            }
        }
    }

    write_file(args.out_dir + "/metrics.csv", metrics_csv(table));
    for (const auto& [name, curves] : curve_files) {
        write_file(args.out_dir + "/" + name, curves_csv(curves));
    }
    if (!args.dump_oracle_dir.empty()) {
        dump_oracle_trajectories(section.suite, config.seed, args.dump_oracle_dir);
    }

    MetricsTable display = table;
    if (args.table1_placeholders) {
        static const char* variants[] = {"MPNN-Sum", "MPNN-Mean", "MPNN-Max", "MPNN-2-Sum",
                                         "Attn-Sum"};
        for (const char* variant : variants) {
            bool present = false;
            for (const auto& row : table.rows) present = present || row.variant == variant;
            if (!present) {
                MetricsRow placeholder;
                placeholder.spec = section.suite.empty() ? GenSpec{} : section.suite[0].spec;
                placeholder.variant = variant;
                placeholder.error = "missing checkpoint";
                display.rows.push_back(placeholder);
            }
        }
    }
    std::cout << metrics_text_table(display);
}

bool cmd_gradcheck() {
    const auto checks = all_variant_grad_checks();
    bool all_pass = true;
    for (const auto& check : checks) {
        for (const auto& entry : check.report.entries) {
            std::printf("%-10s  %-24s  max_rel_err %.3e  %s\n", check.variant.c_str(),
                        entry.name.c_str(), entry.max_rel_error, entry.pass ? "ok" : "FAIL");
        }
        all_pass = all_pass && check.report.pass;
    }
    std::printf("gradcheck: %s\n", all_pass ? "PASS" : "FAIL");
    return all_pass;
}

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"graph-network executor for value iteration on random MDPs"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", preset, dump_oracle_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    std::vector<std::string> checkpoints;
    bool oracle_selftest = false;

    auto add_common = [&](CLI::App* cmd, bool config_required) {
        auto* opt = cmd->add_option("--config", config_path, "experiment config JSON");
        if (config_required) opt->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "override the config's global seed")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--workers", workers, "worker threads (0 = all processors)");
    };

    CLI::App* generate = app.add_subcommand("generate", "sample MDP dataset files + manifest");
    add_common(generate, true);

    CLI::App* train = app.add_subcommand("train", "teacher-forced training run");
    add_common(train, true);

    CLI::App* evaluate = app.add_subcommand("evaluate", "rollout checkpoints over a test suite");
    add_common(evaluate, false);
    evaluate->add_option("--checkpoint", checkpoints, "checkpoint file (repeatable)");
    evaluate->add_option("--preset", preset, "built-in suite: table1, table2 or figure2");
    evaluate->add_flag("--oracle-selftest", oracle_selftest,
                       "replace the executor by the exact Bellman update");
    evaluate->add_option("--dump-oracle", dump_oracle_dir,
                         "dump one oracle trajectory per suite row to this directory");

    app.add_subcommand("gradcheck", "finite-difference check of all five variants");

    try {
        std::vector<const char*> argv;
        argv.push_back("viexec");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (app.got_subcommand("gradcheck")) {
            return cmd_gradcheck() ? kExitOk : kExitConfigError;
        }
        ExperimentConfig config;
        if (app.got_subcommand("evaluate") && !preset.empty()) {
            if (!config_path.empty()) throw ConfigError("--preset and --config are exclusive");
            if (!seed_set) throw ConfigError("--preset requires --seed");
            config = preset_config(preset, seed);
        } else {
            config = ExperimentConfig::from_file(config_path);
        }
        if (seed_set) {
            config.seed = seed;
            if (config.train.has_value()) config.train->seed = seed;
        }

        if (app.got_subcommand("generate")) {
            cmd_generate(config, out_dir);
        } else if (app.got_subcommand("train")) {
            cmd_train(config, out_dir, workers);
        } else if (app.got_subcommand("evaluate")) {
            EvaluateArgs eval_args;
            eval_args.checkpoints = checkpoints;
            eval_args.out_dir = out_dir;
            eval_args.workers = workers;
            eval_args.oracle_selftest = oracle_selftest;
            eval_args.table1_placeholders = preset == "table1";
            eval_args.dump_oracle_dir = dump_oracle_dir;
            cmd_evaluate(config, eval_args);
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const DivergenceError& e) {
        std::cerr << "training diverged: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const CheckpointMismatch& e) {
        std::cerr << "checkpoint mismatch: " << e.what() << "\n";
        return kExitCheckpointMismatch;
    } catch (const GenerationError& e) {
        std::cerr << "generation failed: " << e.what() << "\n";
        return kExitGenerationError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace viexec
