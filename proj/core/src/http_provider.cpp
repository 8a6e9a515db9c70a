#include "finreason/http_provider.hpp"

#include <cstdlib>

#include <httplib.h>

namespace finreason::gateway {
namespace {

bool retryable_status(int status) {
    return status == 408 || status == 409 || status == 429 || status >= 500;
}

FinishReason finish_from_wire(const nlohmann::json& choice) {
    const auto it = choice.find("finish_reason");
    if (it == choice.end() || !it->is_string()) return FinishReason::stop;
    const auto value = it->get<std::string>();
    if (value == "length") return FinishReason::length;
    if (value == "stop" || value == "eos" || value == "end_turn") return FinishReason::stop;
    if (value == "error") return FinishReason::error;
    return FinishReason::stop;
}

}  // namespace

nlohmann::json to_wire(const ChatRequest& request) {
    auto messages = nlohmann::json::array();
    for (const auto& m : request.messages) {
        messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    return {
        {"model", request.model_id},
        {"messages", std::move(messages)},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
}

ChatResponse from_wire(const nlohmann::json& payload) {
    const auto choices = payload.find("choices");
    if (choices == payload.end() || !choices->is_array() || choices->empty()) {
        throw TransportError("chat completion payload has no choices");
    }
    const auto& choice = choices->front();
    const auto message = choice.find("message");
    if (message == choice.end() || !message->is_object()) {
        throw TransportError("chat completion choice has no message");
    }
    ChatResponse response;
    const auto content = message->find("content");
    if (content != message->end() && content->is_string()) response.text = content->get<std::string>();
    response.finish_reason = finish_from_wire(choice);
    if (response.finish_reason == FinishReason::stop && response.text.empty()) {
        response.finish_reason = FinishReason::error;
    }
    if (const auto usage = payload.find("usage"); usage != payload.end() && usage->is_object()) {
        response.usage.prompt_tokens = usage->value("prompt_tokens", std::int64_t{0});
        response.usage.completion_tokens = usage->value("completion_tokens", std::int64_t{0});
    }
    return response;
}

std::string api_key_from_env(std::string_view variable) {
    const std::string name(variable);
    const char* value = std::getenv(name.c_str());
    return value ? std::string(value) : std::string{};
}

OpenAiCompatibleProvider::OpenAiCompatibleProvider(HttpProviderOptions options)
    : options_(std::move(options)) {
    const auto& url = options_.base_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw InvalidRequest("provider base_url needs a scheme: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    origin_ = url.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? std::string{} : url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    path_ = prefix + "/chat/completions";
}

ChatResponse OpenAiCompatibleProvider::send(const ChatRequest& request) {
    httplib::Client client(origin_);
    const auto timeout = static_cast<time_t>(options_.timeout.count());
    client.set_connection_timeout(timeout, 0);
    client.set_read_timeout(timeout, 0);
    client.set_write_timeout(timeout, 0);

    httplib::Headers headers;
    if (!options_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + options_.api_key);
    }
    const auto body = to_wire(request).dump();
    auto result = client.Post(path_, headers, body, "application/json");
    if (!result) {
        throw TransportError("HTTP transport error: " + httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        std::string message = "HTTP " + std::to_string(result->status) + ": " +
                              result->body.substr(0, 512);
        if (retryable_status(result->status)) throw TransportError(message);
        throw ProviderError(message);
    }
    auto payload = nlohmann::json::parse(result->body, nullptr, false);
    if (payload.is_discarded()) throw TransportError("chat completion body is not JSON");
    return from_wire(payload);
}

}  // namespace finreason::gateway
