#include "viexec/checkpoint.hpp"

#include <json.hpp>

#include "viexec/errors.hpp"
#include "viexec/textio.hpp"

namespace viexec {

namespace {
constexpr int kCheckpointFormatVersion = 1;
}

std::string checkpoint_to_json(const MpnnParams& params) {
    nlohmann::json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["config"] = {
        {"hidden_dim", params.config.hidden_dim},
        {"aggregator", aggregator_name(params.config.aggregator)},
        {"message_depth", params.config.message_depth},
        {"attention", params.config.attention},
        {"variant", params.config.variant()},
    };
    auto tensors = nlohmann::json::array();
    for (const ParamTensor* t : params.tensors()) {
        tensors.push_back({{"name", t->name}, {"shape", t->shape}, {"values", t->value}});
    }
    j["tensors"] = std::move(tensors);
    return j.dump(2) + "\n";
}

MpnnParams checkpoint_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointMismatch(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != kCheckpointFormatVersion) {
            throw CheckpointMismatch("unsupported checkpoint format_version");
        }
        const auto& cj = j.at("config");
        MpnnConfig config;
        config.hidden_dim = cj.at("hidden_dim").get<int>();
        config.aggregator = aggregator_from_name(cj.at("aggregator").get<std::string>());
        config.message_depth = cj.at("message_depth").get<int>();
        config.attention = cj.at("attention").get<bool>();
        config.validate();
        if (cj.at("variant").get<std::string>() != config.variant()) {
            throw CheckpointMismatch("checkpoint variant name does not match its switches");
        }

        MpnnParams params = MpnnParams::zeros(config);
        auto tensors = params.tensors();
        const auto& tj = j.at("tensors");
        if (tj.size() != tensors.size()) {
            throw CheckpointMismatch("checkpoint has " + std::to_string(tj.size()) +
                                     " tensors, config requires " + std::to_string(tensors.size()));
        }
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            const auto& entry = tj[i];
            ParamTensor& t = *tensors[i];
            if (entry.at("name").get<std::string>() != t.name) {
                throw CheckpointMismatch("tensor " + std::to_string(i) + " is named " +
                                         entry.at("name").get<std::string>() + ", expected " + t.name);
            }
            if (entry.at("shape").get<std::vector<int>>() != t.shape) {
                throw CheckpointMismatch("tensor " + t.name + " has mismatched shape");
            }
            const auto values = entry.at("values").get<std::vector<double>>();
            if (values.size() != t.size()) {
                throw CheckpointMismatch("tensor " + t.name + " has mismatched value count");
            }
            t.value = values;
        }
        return params;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointMismatch(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::string& path, const MpnnParams& params) {
    write_file(path, checkpoint_to_json(params));
}

MpnnParams load_checkpoint(const std::string& path) {
    return checkpoint_from_json(read_file(path));
}

}  // namespace viexec
