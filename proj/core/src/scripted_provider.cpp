#include "finreason/scripted_provider.hpp"

#include <fstream>


namespace finreason::gateway {
namespace {

ScriptEntry entry_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        ScriptEntry e;
        e.reply = j.get<std::string>();
        return e;
    }
    if (!j.is_object()) throw DataError("script entry must be an object or string");
    ScriptEntry e;
    if (auto it = j.find("match"); it != j.end()) {
        if (it->is_string()) {
            e.contains.push_back(it->get<std::string>());
        } else if (it->is_array()) {
            e.contains = it->get<std::vector<std::string>>();
        } else {
            throw DataError("script entry 'match' must be a string or array of strings");
        }
    }
    if (auto it = j.find("model"); it != j.end()) e.model = it->get<std::string>();
    if (auto it = j.find("error"); it != j.end()) {
        e.transport_error = true;
        e.reply = it->get<std::string>();
    } else {
        e.reply = j.value("reply", std::string{});
    }
    if (j.value("finish_reason", std::string{"stop"}) == "length") {
        e.finish_reason = FinishReason::length;
    }
    if (j.value("repeat", false)) {
        e.times = std::nullopt;
    } else if (auto it = j.find("times"); it != j.end()) {
        const int times = it->get<int>();
        if (times < 1) throw DataError("script entry 'times' must be >= 1");
        e.times = times;
    }
    return e;
}

}  // namespace

ResponseScript ResponseScript::from_json(const nlohmann::json& doc) {
    const nlohmann::json* entries = &doc;
    if (doc.is_object()) {
        auto it = doc.find("entries");
        if (it == doc.end()) throw DataError("response script needs an 'entries' array");
        entries = &*it;
    }
    if (!entries->is_array()) throw DataError("response script entries must be an array");
    ResponseScript script;
    try {
        for (const auto& e : *entries) script.entries.push_back(entry_from_json(e));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed response script: ") + e.what());
    }
    return script;
}

ResponseScript ResponseScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mock script: " + path.string());
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw DataError("mock script is not valid JSON: " + path.string());
    return from_json(doc);
}

nlohmann::json ResponseScript::to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json j;
        if (e.contains.size() == 1) {
            j["match"] = e.contains.front();
        } else if (!e.contains.empty()) {
            j["match"] = e.contains;
        }
        if (e.model) j["model"] = *e.model;
        if (e.transport_error) {
            j["error"] = e.reply;
        } else {
            j["reply"] = e.reply;
        }
        if (e.finish_reason == FinishReason::length) j["finish_reason"] = "length";
        if (!e.times) {
            j["repeat"] = true;
        } else if (*e.times != 1) {
            j["times"] = *e.times;
        }
        arr.push_back(std::move(j));
    }
    return {{"entries", std::move(arr)}};
}

ResponseScript& ResponseScript::then(std::string reply) {
    ScriptEntry e;
    e.reply = std::move(reply);
    return add(std::move(e));
}

ResponseScript& ResponseScript::then_fail(std::string message) {
    ScriptEntry e;
    e.reply = std::move(message);
    e.transport_error = true;
    return add(std::move(e));
}

ResponseScript& ResponseScript::on(std::string substring, std::string reply,
                                   std::optional<int> times) {
    ScriptEntry e;
    e.contains.push_back(std::move(substring));
    e.reply = std::move(reply);
    e.times = times;
    return add(std::move(e));
}

ResponseScript& ResponseScript::add(ScriptEntry entry) {
    entries.push_back(std::move(entry));
    return *this;
}

ScriptedProvider::ScriptedProvider(ResponseScript script) : script_(std::move(script)) {
    remaining_.reserve(script_.entries.size());
    for (const auto& e : script_.entries) remaining_.push_back(e.times);
}

std::optional<std::size_t> ScriptedProvider::pick(const ChatRequest& request,
                                                  const std::string& text) {
    auto available = [&](std::size_t i) { return !remaining_[i] || *remaining_[i] > 0; };
    for (std::size_t i = 0; i < script_.entries.size(); ++i) {
        const auto& e = script_.entries[i];
        if (!e.is_matcher() || !available(i)) continue;
        if (e.model && *e.model != request.model_id) continue;
        bool all = true;
        for (const auto& needle : e.contains) {
            if (text.find(needle) == std::string::npos) {
                all = false;
                break;
            }
        }
        if (all) return i;
    }
    for (std::size_t i = 0; i < script_.entries.size(); ++i) {
        if (!script_.entries[i].is_matcher() && available(i)) return i;
    }
    return std::nullopt;
}

ChatResponse ScriptedProvider::send(const ChatRequest& request) {
    const std::string text = request.flattened_text();
    std::lock_guard lock(mutex_);
    CallRecord record;
    record.index = log_.size();
    record.request = request;
    const auto chosen = pick(request, text);
    if (!chosen) {
        record.failed = true;
        record.entry = script_.entries.size();
        log_.push_back(std::move(record));
        throw ScriptExhausted("mock script has no entry left for call #" +
                              std::to_string(log_.size()) + " (model '" + request.model_id + "')");
    }
    auto& left = remaining_[*chosen];
    if (left) --*left;
    const auto& entry = script_.entries[*chosen];
    record.reply = entry.reply;
    record.failed = entry.transport_error;
    record.entry = *chosen;
    log_.push_back(record);
    if (entry.transport_error) throw TransportError(entry.reply);

    ChatResponse response;
    response.text = entry.reply;
    response.finish_reason = entry.finish_reason;
    response.usage.prompt_tokens = whitespace_tokens(text);
    response.usage.completion_tokens = whitespace_tokens(entry.reply);
    return response;
}

std::vector<CallRecord> ScriptedProvider::calls() const {
    std::lock_guard lock(mutex_);
    return log_;
}

std::size_t ScriptedProvider::call_count() const {
    std::lock_guard lock(mutex_);
    return log_.size();
}

std::size_t ScriptedProvider::call_count(std::string_view model) const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& c : log_) n += c.request.model_id == model ? 1 : 0;
    return n;
}

std::shared_ptr<ScriptedProvider> make_scripted_provider(ResponseScript script) {
    return std::make_shared<ScriptedProvider>(std::move(script));
}

std::int64_t whitespace_tokens(std::string_view text) {
    std::int64_t n = 0;
    bool in_token = false;
    for (char c : text) {
        const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
        if (!space && !in_token) ++n;
        in_token = !space;
    }
    return n;
}

}  // namespace finreason::gateway
