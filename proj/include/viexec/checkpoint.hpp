#pragma once

#include <string>

#include "viexec/executor.hpp"

namespace viexec {

// Checkpoint file format (JSON, format_version 1): the MpnnConfig echo plus
// every tensor's shape and row-major values at full decimal precision.
std::string checkpoint_to_json(const MpnnParams& params);

/// Throws CheckpointMismatch on version, config or shape inconsistencies.
MpnnParams checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::string& path, const MpnnParams& params);
MpnnParams load_checkpoint(const std::string& path);

}  // namespace viexec
