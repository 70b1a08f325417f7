#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "viexec/evaluation.hpp"
#include "viexec/graphgen.hpp"
#include "viexec/training.hpp"

namespace viexec {

struct GenerateDataset {
    GenSpec spec;
    int count = 1;
};

struct GenerateSection {
    std::vector<GenerateDataset> datasets;
};

struct EvaluateSection {
    std::vector<SuiteEntry> suite;
    double tolerance = 1e-4;
    int max_steps = 200;
    bool curves = false;
    bool oracle_selftest = false;
};

/// Declarative run description parsed from a JSON config file. Unknown keys
/// are rejected; "version" and "seed" are mandatory.
struct ExperimentConfig {
    int version = 1;
    std::uint64_t seed = 0;
    std::optional<GenerateSection> generate;
    std::optional<TrainConfig> train;
    std::optional<EvaluateSection> evaluate;

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
};

/// Built-in experiment presets: "table1" (size generalisation for provided
/// checkpoints), "table2" (environment zoo), "figure2" (per-step curves).
ExperimentConfig preset_config(const std::string& name, std::uint64_t seed);

GenSpec genspec_from_json_text(const std::string& text);

}  // namespace viexec
