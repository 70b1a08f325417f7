#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "viexec/config.hpp"

namespace viexec {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitCheckpointMismatch = 4;
inline constexpr int kExitGenerationError = 5;

/// Writes one MDP file per dataset entry plus manifest.json (family, params,
/// seeds, content hashes) under out_dir.
void cmd_generate(const ExperimentConfig& config, const std::string& out_dir);

/// Trains per config.train, writing checkpoint.json and train_log.csv.
void cmd_train(const ExperimentConfig& config, const std::string& out_dir, int workers);

struct EvaluateArgs {
    std::vector<std::string> checkpoints;
    std::string out_dir;
    int workers = 0;
    bool oracle_selftest = false;
    bool table1_placeholders = false;  // mark missing variants in the text table
    std::string dump_oracle_dir;       // when set, dump per-row oracle trajectories
};

/// Rolls out every provided checkpoint over the suite; writes metrics.csv,
/// optional per-cell curve CSVs, and prints the text table to stdout.
void cmd_evaluate(const ExperimentConfig& config, const EvaluateArgs& args);

/// Finite-difference verification of all five variants; prints one line per
/// tensor. Returns true iff every variant passes at tol 1e-4.
bool cmd_gradcheck();

/// Full argument parsing + dispatch; returns the process exit code.
int run_cli(const std::vector<std::string>& args);

}  // namespace viexec
