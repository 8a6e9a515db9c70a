#include "context.hpp"

#include "finreason/errors.hpp"
#include "finreason/http_provider.hpp"

namespace finreason::cli {

RunContext::RunContext(const GlobalOptions& options) : out_(options.out) {
    if (!options.config_path.empty()) {
        config_ = PipelineConfig::load(require_input(options.config_path, "config file"));
    }
    if (options.seed) config_.seed = *options.seed;
    if (options.concurrency) config_.concurrency = *options.concurrency;
    config_.validate();
    if (!options.mock_path.empty()) {
        mock_ = gateway::make_scripted_provider(
            gateway::ResponseScript::load(require_input(options.mock_path, "mock script")));
    }
}

gateway::Endpoint RunContext::endpoint(const RoleConfig& role) {
    if (mock_) return config_.endpoint(role, mock_);
    auto it = live_.find(role.provider);
    if (it == live_.end()) {
        const auto& pc = config_.providers.at(role.provider);
        gateway::HttpProviderOptions http;
        http.base_url = pc.base_url;
        http.api_key = gateway::api_key_from_env(pc.api_key_env);
        http.timeout = std::chrono::seconds(pc.timeout_seconds);
        if (http.api_key.empty()) {
            throw ConfigError("environment variable " + pc.api_key_env +
                              " is not set (pass --mock <script> to run offline)");
        }
        it = live_.emplace(role.provider, std::make_shared<gateway::OpenAiCompatibleProvider>(http)).first;
    }
    return config_.endpoint(role, it->second);
}

std::size_t RunContext::provider_calls() const { return mock_ ? mock_->call_count() : 0; }

std::filesystem::path RunContext::out_dir() const {
    if (out_.empty()) throw ConfigError("--out <dir> is required for this subcommand");
    std::filesystem::path dir(out_);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::filesystem::path require_input(const std::string& path, std::string_view what) {
    if (path.empty()) throw ConfigError(std::string(what) + " path is required");
    std::filesystem::path p(path);
    if (!std::filesystem::exists(p)) {
        throw ConfigError(std::string(what) + " not found: " + p.string());
    }
    return p;
}

}  // namespace finreason::cli
