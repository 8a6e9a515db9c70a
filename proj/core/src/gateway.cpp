#include "finreason/gateway.hpp"

#include <thread>

#include "finreason/parallel.hpp"

namespace finreason::gateway {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role parse_role(std::string_view name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    throw InvalidRequest("unknown role: " + std::string(name));
}

std::string_view to_string(FinishReason reason) {
    switch (reason) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "error";
}

void ChatRequest::validate() const {
    if (messages.empty()) throw InvalidRequest("chat request has no messages");
    if (messages.back().role != Role::user) {
        throw InvalidRequest("last chat message must come from the user");
    }
    if (!(temperature >= 0.0)) throw InvalidRequest("temperature must be >= 0");
    if (max_tokens <= 0) throw InvalidRequest("max_tokens must be positive");
}

std::string ChatRequest::flattened_text() const {
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty()) out.push_back('\n');
        out += m.content;
    }
    return out;
}

ChatRequest ChatRequest::single_turn(std::string model_id, std::string prompt) {
    ChatRequest req;
    req.model_id = std::move(model_id);
    req.messages.push_back({Role::user, std::move(prompt)});
    return req;
}

void RetryPolicy::validate() const {
    if (max_attempts < 1) throw InvalidRequest("retry policy needs max_attempts >= 1");
    for (const auto& d : backoff) {
        if (d.count() < 0) throw InvalidRequest("retry backoff must be non-negative");
    }
}

std::chrono::milliseconds RetryPolicy::delay_before_retry(int failed_attempts) const {
    if (backoff.empty() || failed_attempts < 1) return std::chrono::milliseconds{0};
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(failed_attempts - 1),
                                           backoff.size() - 1);
    return backoff[idx];
}

ExhaustedRetries::ExhaustedRetries(int attempts, std::string last_error)
    : ProviderError("provider failed after " + std::to_string(attempts) +
                    " attempt(s): " + last_error,
                    attempts),
      last_error_(std::move(last_error)) {}

ChatResponse complete(Provider& provider, const ChatRequest& request, const RetryPolicy& policy) {
    request.validate();
    policy.validate();
    std::string last_error;
    for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        try {
            ChatResponse response = provider.send(request);
            if (response.finish_reason != FinishReason::error) {
                response.attempts = attempt;
                return response;
            }
            last_error = "finish_reason=error";
        } catch (const TransportError& e) {
            last_error = e.what();
        } catch (ProviderError& e) {
            e.set_attempts(attempt);
            throw;
        }
        if (attempt < policy.max_attempts) {
            const auto delay = policy.delay_before_retry(attempt);
            if (delay.count() > 0) std::this_thread::sleep_for(delay);
        }
    }
    throw ExhaustedRetries(policy.max_attempts, last_error);
}

std::vector<BatchItem> complete_batch(Provider& provider, const std::vector<ChatRequest>& requests,
                                      const RetryPolicy& policy, std::size_t limit) {
    if (limit < 1) throw InvalidRequest("complete_batch needs limit >= 1");
    std::vector<BatchItem> results(requests.size());
    parallel_for(requests.size(), limit, [&](std::size_t i) {
        auto& slot = results[i];
        try {
            slot.response = complete(provider, requests[i], policy);
            slot.attempts = slot.response->attempts;
        } catch (const ProviderError& e) {
            slot.error = e.what();
            slot.attempts = e.attempts();
        } catch (const InvalidRequest& e) {
            slot.error = e.what();
        }
    });
    return results;
}

ChatResponse Endpoint::ask(std::string prompt) const {
    if (!provider) throw InvalidRequest("endpoint for model '" + model + "' has no provider");
    auto request = ChatRequest::single_turn(model, std::move(prompt));
    request.temperature = temperature;
    request.max_tokens = max_tokens;
    return complete(*provider, request, transport);
}

}  // namespace finreason::gateway
