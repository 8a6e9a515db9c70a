#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>

#include "finreason/gateway.hpp"
#include "finreason/scripted_provider.hpp"

namespace finreason::testing {

inline std::filesystem::path data_dir() { return FINREASON_DATA_DIR; }
inline std::filesystem::path golden_dir() { return FINREASON_GOLDEN_DIR; }

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline gateway::Endpoint endpoint(std::shared_ptr<gateway::Provider> provider,
                                  std::string model = "mock-model") {
    gateway::Endpoint e;
    e.provider = std::move(provider);
    e.model = std::move(model);
    e.transport = gateway::RetryPolicy{1, {}};
    return e;
}

inline std::pair<std::shared_ptr<gateway::ScriptedProvider>, gateway::Endpoint> scripted(
    gateway::ResponseScript script, std::string model = "mock-model") {
    auto provider = gateway::make_scripted_provider(std::move(script));
    return {provider, endpoint(provider, std::move(model))};
}

inline gateway::RetryPolicy attempts(int n) { return gateway::RetryPolicy{n, {}}; }

}  // namespace finreason::testing
