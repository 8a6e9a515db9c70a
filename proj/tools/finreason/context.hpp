#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "finreason/config.hpp"
#include "finreason/gateway.hpp"
#include "finreason/scripted_provider.hpp"

namespace finreason::cli {

enum ExitCode : int { ok = 0, data_error = 1, config_error = 2, provider_exhausted = 3 };

struct GlobalOptions {
    std::string config_path;
    std::string mock_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> concurrency;
    std::string out;
};

/// Resolved configuration plus the providers every subcommand draws on.
class RunContext {
public:
    explicit RunContext(const GlobalOptions& options);

    const PipelineConfig& config() const noexcept { return config_; }
    gateway::Endpoint endpoint(const RoleConfig& role);
    bool mocked() const noexcept { return mock_ != nullptr; }
    std::size_t provider_calls() const;

    /// --out as a directory, created on demand. Throws ConfigError if unset.
    std::filesystem::path out_dir() const;
    bool has_out() const noexcept { return !out_.empty(); }
    std::filesystem::path out_file(std::string_view name) const { return out_dir() / name; }

private:
    PipelineConfig config_;
    std::string out_;
    std::shared_ptr<gateway::ScriptedProvider> mock_;
    std::map<std::string, std::shared_ptr<gateway::Provider>> live_;
};

/// Input path that must exist; missing files are config errors (exit 2).
std::filesystem::path require_input(const std::string& path, std::string_view what);

}  // namespace finreason::cli
