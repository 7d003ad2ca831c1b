#pragma once

#include "llmloc/eval.hpp"
#include "llmloc/gateway.hpp"
#include "llmloc/pipeline.hpp"

#include <string>
#include <vector>

namespace llmloc {

struct PathsConfig {
    std::string graph = "graph.json";
    std::string patterns = "patterns.json";
    std::string prompts;  // empty: embedded templates
    std::string sessions = "sessions";
    std::string runs = "runs";
};

struct BackendSettings {
    std::string kind = "replay";  // replay | http
    HttpBackendConfig http;
};

struct GlobalConfig {
    PipelineConfig pipeline;
    GatewayConfig gateway;
    BackendSettings backend;
    PathsConfig paths;

    GlobalConfig() { gateway.model = backend.http.model; }

    /// Throws Error(usage) naming the first out-of-range value.
    void validate() const;
};

struct ConfigKey {
    std::string key;  // section.name
    std::string default_value;
    std::string help;
};

/// Every recognised key with its default, for `--help`.
const std::vector<ConfigKey>& config_keys();
std::string describe_config_keys();

/// INI text: `[section]` headers and `key = value` lines. The [prices] section maps
/// a model name to "input_per_1k, output_per_1k". Unknown keys are usage errors.
GlobalConfig parse_config(std::string_view text);
GlobalConfig load_config(const std::string& path);

}  // namespace llmloc
