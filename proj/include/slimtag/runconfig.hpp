#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "slimtag/encoder.hpp"
#include "slimtag/synth.hpp"
#include "slimtag/trainer.hpp"

namespace slimtag {

// Loads a JSON config file, resolving a flat "include" chain first (the
// included file loads before the local keys overlay it; paths are relative
// to the including file).
nlohmann::json load_config_file(const std::string& path);

// Applies `key=value` to a dotted path; the value parses as JSON when
// possible, else as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

// Environment overrides: SLIMTAG_TRAIN__LEARNING_RATE=1e-4 maps to
// train.learning_rate (lower-cased, "__" becomes ".").
void apply_env_overrides(nlohmann::json& config);

EncoderConfig encoder_config_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
KDConfig kd_config_from_json(const nlohmann::json& j);
SynthConfig synth_config_from_json(const nlohmann::json& j);
LabelScheme scheme_from_json(const nlohmann::json& j);

nlohmann::json encoder_config_to_json(const EncoderConfig& c);

// 64-bit FNV-1a, used for content hashes in prep/bundle reports.
uint64_t fnv1a64(const void* data, size_t len);
uint64_t fnv1a64_file(const std::string& path);

}  // namespace slimtag
