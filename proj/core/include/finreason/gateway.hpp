#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finreason/errors.hpp"

namespace finreason::gateway {

enum class Role { system, user, assistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view name);

struct Message {
    Role role = Role::user;
    std::string content;

    friend bool operator==(const Message&, const Message&) = default;
};

struct ChatRequest {
    std::string model_id;
    std::vector<Message> messages;
    double temperature = 0.0;
    int max_tokens = 4096;

    /// Throws InvalidRequest unless messages is non-empty, ends with a user
    /// turn, temperature >= 0 and max_tokens > 0.
    void validate() const;

    /// All message contents joined by newlines; what script matchers see.
    std::string flattened_text() const;

    static ChatRequest single_turn(std::string model_id, std::string prompt);

    friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

enum class FinishReason { stop, length, error };

std::string_view to_string(FinishReason reason);

struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;

    friend bool operator==(const Usage&, const Usage&) = default;
};

struct ChatResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::stop;
    Usage usage;
    // Provider invocations spent producing this response, retries included.
    int attempts = 1;

    friend bool operator==(const ChatResponse&, const ChatResponse&) = default;
};

struct RetryPolicy {
    int max_attempts = 3;
    // Delay before attempt k+2 is backoff[min(k, size-1)]; empty means none.
    std::vector<std::chrono::milliseconds> backoff;

    void validate() const;
    std::chrono::milliseconds delay_before_retry(int failed_attempts) const;

    friend bool operator==(const RetryPolicy&, const RetryPolicy&) = default;
};

class InvalidRequest : public Error {
public:
    using Error::Error;
};

/// A single provider call failed in a way worth retrying (network, 5xx, 429,
/// finish_reason=error).
class TransportError : public Error {
public:
    using Error::Error;
};

/// Terminal failure for one request: no further calls will help.
class ProviderError : public Error {
public:
    explicit ProviderError(const std::string& what, int attempts = 1)
        : Error(what), attempts_(attempts) {}

    // Provider invocations spent on the failed request.
    int attempts() const noexcept { return attempts_; }
    void set_attempts(int attempts) noexcept { attempts_ = attempts; }

private:
    int attempts_;
};

class ExhaustedRetries : public ProviderError {
public:
    ExhaustedRetries(int attempts, std::string last_error);

    const std::string& last_error() const noexcept { return last_error_; }

private:
    std::string last_error_;
};

/// Anything that can answer a chat request. Implementations must be safe to
/// call from several threads at once.
class Provider {
public:
    virtual ~Provider() = default;

    /// One transport attempt. Throws TransportError on retryable failure and
    /// ProviderError when retrying cannot help.
    virtual ChatResponse send(const ChatRequest& request) = 0;
};

/// Validates the request, then calls the provider until a response with
/// finish_reason != error arrives or policy.max_attempts calls are spent.
ChatResponse complete(Provider& provider, const ChatRequest& request,
                      const RetryPolicy& policy);

struct BatchItem {
    std::optional<ChatResponse> response;
    std::string error;
    int attempts = 0;

    bool ok() const noexcept { return response.has_value(); }
};

/// Runs every request through complete() with at most `limit` in flight.
/// Results are positionally aligned; a failing item never aborts the batch.
std::vector<BatchItem> complete_batch(Provider& provider,
                                      const std::vector<ChatRequest>& requests,
                                      const RetryPolicy& policy, std::size_t limit);

/// A provider bound to one model and sampling setup; one per pipeline role.
struct Endpoint {
    std::shared_ptr<Provider> provider;
    std::string model;
    double temperature = 0.0;
    int max_tokens = 4096;
    RetryPolicy transport;

    ChatResponse ask(std::string prompt) const;
};

}  // namespace finreason::gateway
