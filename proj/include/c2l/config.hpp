#pragma once

#include <map>
#include <string>

#include "c2l/model.hpp"
#include "c2l/optim.hpp"

namespace c2l {

using KvMap = std::map<std::string, std::string>;

// Flat `key = value` file: one pair per line, '#' comments, blank lines
// ignored. Keys mirror the ModelConfig and TrainConfig field names.
KvMap parse_kv_file(const std::string& path);
KvMap parse_kv_text(const std::string& text);

struct RunConfig {
    ModelConfig model;
    TrainConfig train;
};

// Applies the pairs on top of the defaults; unknown keys are configuration
// errors so typos cannot silently fall back to defaults.
RunConfig parse_run_config(const KvMap& kv);

// Canonical serialization of every field, used for hashing and manifests.
std::string canonical_config_text(const RunConfig& cfg);

// FNV-1a of the canonical text, rendered as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

} // namespace c2l
