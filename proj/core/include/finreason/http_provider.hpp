#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "finreason/gateway.hpp"

namespace finreason::gateway {

/// Client for OpenAI-compatible `POST {base_url}/chat/completions` endpoints.
struct HttpProviderOptions {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::chrono::seconds timeout{120};
};

class OpenAiCompatibleProvider final : public Provider {
public:
    explicit OpenAiCompatibleProvider(HttpProviderOptions options);

    ChatResponse send(const ChatRequest& request) override;

private:
    HttpProviderOptions options_;
    std::string origin_;  // scheme://host[:port]
    std::string path_;    // path prefix + /chat/completions
};

nlohmann::json to_wire(const ChatRequest& request);
ChatResponse from_wire(const nlohmann::json& payload);

/// Reads an API key from the environment; empty string when unset.
std::string api_key_from_env(std::string_view variable);

}  // namespace finreason::gateway
