#pragma once

#include "model.hpp"
#include "trainer.hpp"

#include <string>

namespace octo {

struct FullConfig {
    ModelConfig model;
    TrainConfig train;
};

/// JSON config with optional "model" and "train" objects; unknown keys are
/// rejected. Missing keys keep their defaults.
FullConfig parse_config_json(const std::string& text);
FullConfig load_config_file(const std::string& path);
std::string config_to_json(const FullConfig& cfg);

} // namespace octo
