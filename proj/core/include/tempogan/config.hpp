#pragma once

#include "tempogan/train.hpp"

#include <string>

namespace tempogan {

//! Serializes the full run configuration (training schedule, loss weights,
//! generator architecture) to JSON; written into every run directory so a
//! checkpoint can be rebuilt from disk.
std::string model_config_to_json(const ModelBundle& model);
void write_model_config(const ModelBundle& model, const std::string& path);

//! Parses a run configuration. Unknown keys are rejected so hyperparameter
//! typos fail loudly. Overrides ("key=value") are applied on top.
struct RunConfig {
    TrainConfig train;
    LossWeights weights;
    GeneratorConfig gen;
};
RunConfig parse_run_config(const std::string& json_text,
                           const std::vector<std::string>& overrides = {});
RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides = {});

//! Rebuilds networks from a checkpoint plus the config.json stored next to
//! it; rejects architecture-hash mismatches.
ModelBundle load_model(const std::string& checkpoint_path);

} // namespace tempogan
