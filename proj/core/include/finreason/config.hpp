#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finreason/gateway.hpp"

namespace finreason {

struct ProviderConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key_env = "OPENAI_API_KEY";
    int timeout_seconds = 120;

    friend bool operator==(const ProviderConfig&, const ProviderConfig&) = default;
};

struct RoleConfig {
    std::string model;
    std::string provider = "default";
    std::optional<double> temperature;
    std::optional<int> max_tokens;

    friend bool operator==(const RoleConfig&, const RoleConfig&) = default;
};

inline RoleConfig model_role(std::string model) {
    RoleConfig r;
    r.model = std::move(model);
    return r;
}

/// Everything a pipeline run needs. Defaults mirror the published setup:
/// T = 3 generation attempts, 15-token length threshold, 8 rollouts per group.
struct PipelineConfig {
    std::map<std::string, ProviderConfig> providers{{"default", ProviderConfig{}}};

    std::vector<RoleConfig> probes{model_role("llama-3.1-8b-instruct"), model_role("qwen2.5-7b-instruct")};
    RoleConfig converter = model_role("gpt-4o");
    RoleConfig reasoner = model_role("deepseek-r1");
    RoleConfig verifier = model_role("gpt-4o");
    RoleConfig node_agent = model_role("qwen2.5-72b-instruct");
    RoleConfig merger = model_role("gpt-4o");
    RoleConfig judge = model_role("gpt-4o");

    gateway::RetryPolicy attempts{3, {}};   // T, instance-level regeneration
    gateway::RetryPolicy transport{3, {}};  // per-call transport retries

    double temperature = 0.0;
    int max_tokens = 4096;

    std::size_t min_tokens = 15;
    bool ambiguity_filter = true;
    std::size_t group_size = 8;
    double advantage_epsilon = 1e-6;
    double format_weight = 1.0;
    double accuracy_weight = 1.0;

    std::size_t concurrency = 4;
    std::uint64_t seed = 0;

    // Named files (e.g. "workflow"); relative entries resolve against base_dir.
    std::map<std::string, std::string> paths;
    std::filesystem::path base_dir;  // not serialized

    /// Throws ConfigError on T < 1, concurrency < 1, unknown provider
    /// references or unresolvable paths.
    void validate() const;

    std::filesystem::path resolve(const std::string& name) const;

    gateway::Endpoint endpoint(const RoleConfig& role,
                               std::shared_ptr<gateway::Provider> provider) const;

    static PipelineConfig from_json(const nlohmann::json& doc);
    static PipelineConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    friend bool operator==(const PipelineConfig& a, const PipelineConfig& b) {
        return a.to_json() == b.to_json();
    }
};

}  // namespace finreason
