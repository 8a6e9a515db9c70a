#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finreason/gateway.hpp"

namespace finreason::gateway {

/// One canned reply. An entry with no `contains` and no `model` is a
/// sequential entry; anything else is a matcher entry.
struct ScriptEntry {
    std::vector<std::string> contains;  // every substring must appear in the request text
    std::optional<std::string> model;   // restrict to this model id
    std::string reply;
    bool transport_error = false;       // call fails with TransportError(reply)
    FinishReason finish_reason = FinishReason::stop;
    std::optional<int> times = 1;       // nullopt: unlimited

    bool is_matcher() const noexcept { return !contains.empty() || model.has_value(); }
};

/// Dispatch order: matcher entries in declaration order, then sequential
/// entries in declaration order. Each use consumes one of `times`.
struct ResponseScript {
    std::vector<ScriptEntry> entries;

    static ResponseScript from_json(const nlohmann::json& doc);
    static ResponseScript load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    // Chainable builders for tests.
    ResponseScript& then(std::string reply);
    ResponseScript& then_fail(std::string message = "scripted transport failure");
    ResponseScript& on(std::string substring, std::string reply, std::optional<int> times = 1);
    ResponseScript& add(ScriptEntry entry);
};

class ScriptExhausted : public ProviderError {
public:
    using ProviderError::ProviderError;
};

struct CallRecord {
    std::size_t index = 0;
    ChatRequest request;
    std::string reply;
    bool failed = false;
    std::size_t entry = 0;  // script entry that served the call
};

class ScriptedProvider final : public Provider {
public:
    explicit ScriptedProvider(ResponseScript script);

    ChatResponse send(const ChatRequest& request) override;

    std::vector<CallRecord> calls() const;
    std::size_t call_count() const;
    /// Calls whose request went to `model`.
    std::size_t call_count(std::string_view model) const;

private:
    std::optional<std::size_t> pick(const ChatRequest& request, const std::string& text);

    mutable std::mutex mutex_;
    ResponseScript script_;
    std::vector<std::optional<int>> remaining_;
    std::vector<CallRecord> log_;
};

std::shared_ptr<ScriptedProvider> make_scripted_provider(ResponseScript script);

/// Whitespace-delimited token count used for mock usage figures.
std::int64_t whitespace_tokens(std::string_view text);

}  // namespace finreason::gateway
