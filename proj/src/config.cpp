#include "viexec/config.hpp"

#include <algorithm>

#include <json.hpp>

#include "viexec/errors.hpp"
#include "viexec/textio.hpp"

namespace viexec {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown key \"" + key + "\" in " + where);
        }
    }
}

GenSpec parse_genspec(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    reject_unknown_keys(j,
                        {"family", "num_states", "num_actions", "gamma", "p_edge", "ba_m",
                         "maze_side", "obstacle_density"},
                        where);
    GenSpec spec;
    spec.family = family_from_name(j.at("family").get<std::string>());
    spec.num_states = j.value("num_states", spec.num_states);
    spec.num_actions = j.value("num_actions", spec.num_actions);
    spec.gamma = j.value("gamma", spec.gamma);
    spec.p_edge = j.value("p_edge", spec.p_edge);
    spec.ba_m = j.value("ba_m", spec.ba_m);
    spec.maze_side = j.value("maze_side", spec.maze_side);
    spec.obstacle_density = j.value("obstacle_density", spec.obstacle_density);
    if (spec.num_states < 1 || spec.num_actions < 1) {
        throw ConfigError(where + ": num_states and num_actions must be positive");
    }
    if (!(spec.gamma >= 0.0 && spec.gamma < 1.0)) {
        throw ConfigError(where + ": gamma must lie in [0,1)");
    }
    return spec;
}

MpnnConfig parse_mpnn(const json& j, const std::string& where) {
    MpnnConfig mpnn;
    if (j.contains("variant")) {
        mpnn = MpnnConfig::from_variant(j.at("variant").get<std::string>(),
                                        j.value("hidden_dim", 32));
    } else {
        mpnn.hidden_dim = j.value("hidden_dim", mpnn.hidden_dim);
        if (j.contains("aggregator")) {
            mpnn.aggregator = aggregator_from_name(j.at("aggregator").get<std::string>());
        }
        mpnn.message_depth = j.value("message_depth", mpnn.message_depth);
        mpnn.attention = j.value("attention", mpnn.attention);
        mpnn.validate();
    }
    (void)where;
    return mpnn;
}

TrainConfig parse_train(const json& j) {
    reject_unknown_keys(j,
                        {"variant", "hidden_dim", "aggregator", "message_depth", "attention",
                         "spec", "num_train_mdps", "t_sup", "epochs", "batch_size",
                         "learning_rate", "beta1", "beta2", "epsilon", "val_mdps",
                         "val_tolerance", "val_max_steps", "checkpoint_every"},
                        "train section");
    TrainConfig config;
    config.mpnn = parse_mpnn(j, "train section");
    if (j.contains("spec")) config.spec = parse_genspec(j.at("spec"), "train.spec");
    config.num_train_mdps = j.value("num_train_mdps", config.num_train_mdps);
    config.t_sup = j.value("t_sup", config.t_sup);
    config.epochs = j.value("epochs", config.epochs);
    config.batch_size = j.value("batch_size", config.batch_size);
    config.adam.learning_rate = j.value("learning_rate", config.adam.learning_rate);
    config.adam.beta1 = j.value("beta1", config.adam.beta1);
    config.adam.beta2 = j.value("beta2", config.adam.beta2);
    config.adam.epsilon = j.value("epsilon", config.adam.epsilon);
    config.val_mdps = j.value("val_mdps", config.val_mdps);
    config.val_tolerance = j.value("val_tolerance", config.val_tolerance);
    config.val_max_steps = j.value("val_max_steps", config.val_max_steps);
    config.checkpoint_every = j.value("checkpoint_every", config.checkpoint_every);
    config.validate();
    return config;
}

GenerateSection parse_generate(const json& j) {
    reject_unknown_keys(j, {"datasets"}, "generate section");
    GenerateSection section;
    for (const auto& entry : j.at("datasets")) {
        reject_unknown_keys(entry, {"spec", "count"}, "generate.datasets entry");
        GenerateDataset dataset;
        dataset.spec = parse_genspec(entry.at("spec"), "generate.datasets.spec");
        dataset.count = entry.value("count", 1);
        if (dataset.count < 1) throw ConfigError("generate dataset count must be >= 1");
        section.datasets.push_back(std::move(dataset));
    }
    if (section.datasets.empty()) throw ConfigError("generate section lists no datasets");
    return section;
}

EvaluateSection parse_evaluate(const json& j) {
    reject_unknown_keys(j, {"suite", "tolerance", "max_steps", "curves", "oracle_selftest"},
                        "evaluate section");
    EvaluateSection section;
    for (const auto& entry : j.at("suite")) {
        reject_unknown_keys(entry, {"spec", "count"}, "evaluate.suite entry");
        SuiteEntry cell;
        cell.spec = parse_genspec(entry.at("spec"), "evaluate.suite.spec");
        cell.count = entry.value("count", 100);
        if (cell.count < 1) throw ConfigError("evaluate suite count must be >= 1");
        section.suite.push_back(std::move(cell));
    }
    section.tolerance = j.value("tolerance", section.tolerance);
    section.max_steps = j.value("max_steps", section.max_steps);
    section.curves = j.value("curves", section.curves);
    section.oracle_selftest = j.value("oracle_selftest", section.oracle_selftest);
    return section;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    try {
        reject_unknown_keys(j, {"version", "seed", "generate", "train", "evaluate"}, "config");
        ExperimentConfig config;
        if (!j.contains("version")) throw ConfigError("config is missing \"version\"");
        config.version = j.at("version").get<int>();
        if (config.version != 1) {
            throw ConfigError("unsupported config version " + std::to_string(config.version));
        }
        if (!j.contains("seed")) throw ConfigError("config is missing \"seed\"");
        config.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("generate")) config.generate = parse_generate(j.at("generate"));
        if (j.contains("train")) {
            config.train = parse_train(j.at("train"));
            config.train->seed = config.seed;
        }
        if (j.contains("evaluate")) config.evaluate = parse_evaluate(j.at("evaluate"));
        return config;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return from_json_text(text);
}

ExperimentConfig preset_config(const std::string& name, std::uint64_t seed) {
    ExperimentConfig config;
    config.seed = seed;
    EvaluateSection section;
    if (name == "table1") {
        section.suite = size_generalisation_suite();
    } else if (name == "table2") {
        section.suite = table2_suite();
    } else if (name == "figure2") {
        section.suite = figure2_suite();
        section.curves = true;
    } else {
        throw ConfigError("unknown preset: " + name + " (expected table1, table2 or figure2)");
    }
    config.evaluate = std::move(section);
    return config;
}

GenSpec genspec_from_json_text(const std::string& text) {
    try {
        return parse_genspec(nlohmann::json::parse(text), "spec");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("spec parse error: ") + e.what());
    }
}

}  // namespace viexec
