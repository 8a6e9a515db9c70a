#include "finreason/config.hpp"

#include <fstream>
#include <set>

namespace finreason {

namespace {

const std::set<std::string, std::less<>> kTopLevelKeys = {
    "providers", "roles",       "attempts", "transport",   "temperature", "max_tokens",
    "filter",    "rewards",     "concurrency", "seed",     "paths"};

const char* const kSingleRoles[] = {"converter", "reasoner", "verifier", "node_agent", "merger", "judge"};

RoleConfig role_from_json(const nlohmann::json& j) {
    RoleConfig r;
    if (j.is_string()) {
        r.model = j.get<std::string>();
        return r;
    }
    r.model = j.at("model").get<std::string>();
    r.provider = j.value("provider", std::string("default"));
    if (j.contains("temperature")) r.temperature = j["temperature"].get<double>();
    if (j.contains("max_tokens")) r.max_tokens = j["max_tokens"].get<int>();
    return r;
}

nlohmann::json role_to_json(const RoleConfig& r) {
    nlohmann::json j{{"model", r.model}, {"provider", r.provider}};
    if (r.temperature) j["temperature"] = *r.temperature;
    if (r.max_tokens) j["max_tokens"] = *r.max_tokens;
    return j;
}

gateway::RetryPolicy policy_from_json(const nlohmann::json& j) {
    gateway::RetryPolicy p;
    if (j.is_number_integer()) {
        p.max_attempts = j.get<int>();
        return p;
    }
    p.max_attempts = j.value("max_attempts", 3);
    for (const auto& ms : j.value("backoff_ms", std::vector<long long>{})) {
        if (ms < 0) throw ConfigError("backoff_ms entries must be non-negative");
        p.backoff.emplace_back(ms);
    }
    return p;
}

nlohmann::json policy_to_json(const gateway::RetryPolicy& p) {
    std::vector<long long> ms;
    for (auto d : p.backoff) ms.push_back(d.count());
    return {{"max_attempts", p.max_attempts}, {"backoff_ms", ms}};
}

RoleConfig* single_role(PipelineConfig& c, std::string_view name) {
    if (name == "converter") return &c.converter;
    if (name == "reasoner") return &c.reasoner;
    if (name == "verifier") return &c.verifier;
    if (name == "node_agent") return &c.node_agent;
    if (name == "merger") return &c.merger;
    if (name == "judge") return &c.judge;
    return nullptr;
}

const RoleConfig* single_role(const PipelineConfig& c, std::string_view name) {
    return single_role(const_cast<PipelineConfig&>(c), name);
}

}  // namespace

void PipelineConfig::validate() const {
    if (attempts.max_attempts < 1) throw ConfigError("attempts (T) must be >= 1");
    if (transport.max_attempts < 1) throw ConfigError("transport.max_attempts must be >= 1");
    if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    if (group_size < 2) throw ConfigError("rewards.group_size must be >= 2");
    if (temperature < 0) throw ConfigError("temperature must be >= 0");
    if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
    if (advantage_epsilon < 0) throw ConfigError("rewards.advantage_epsilon must be >= 0");

    auto check_role = [&](const RoleConfig& r, std::string_view name) {
        if (r.model.empty()) throw ConfigError("role " + std::string(name) + " has no model");
        if (!providers.count(r.provider)) {
            throw ConfigError("role " + std::string(name) + " references unknown provider '" +
                              r.provider + "'");
        }
    };
    for (const auto& p : probes) check_role(p, "probes");
    for (const char* name : kSingleRoles) check_role(*single_role(*this, name), name);

    for (const auto& [name, _] : paths) {
        const auto p = resolve(name);
        if (!std::filesystem::exists(p)) {
            throw ConfigError("path '" + name + "' does not exist: " + p.string());
        }
    }
}

std::filesystem::path PipelineConfig::resolve(const std::string& name) const {
    auto it = paths.find(name);
    if (it == paths.end()) throw ConfigError("config has no path named '" + name + "'");
    std::filesystem::path p(it->second);
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
}

gateway::Endpoint PipelineConfig::endpoint(const RoleConfig& role,
                                           std::shared_ptr<gateway::Provider> provider) const {
    gateway::Endpoint e;
    e.provider = std::move(provider);
    e.model = role.model;
    e.temperature = role.temperature.value_or(temperature);
    e.max_tokens = role.max_tokens.value_or(max_tokens);
    e.transport = transport;
    return e;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : doc.items()) {
        if (!kTopLevelKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    PipelineConfig c;
    try {
        if (doc.contains("providers")) {
            c.providers.clear();
            for (const auto& [name, p] : doc["providers"].items()) {
                ProviderConfig pc;
                pc.base_url = p.value("base_url", pc.base_url);
                pc.api_key_env = p.value("api_key_env", pc.api_key_env);
                pc.timeout_seconds = p.value("timeout_seconds", pc.timeout_seconds);
                c.providers[name] = pc;
            }
        }
        if (doc.contains("roles")) {
            const auto& roles = doc["roles"];
            for (const auto& [name, value] : roles.items()) {
                if (name == "probes") {
                    c.probes.clear();
                    for (const auto& p : value) c.probes.push_back(role_from_json(p));
                } else if (auto* r = single_role(c, name)) {
                    *r = role_from_json(value);
                } else {
                    throw ConfigError("unknown role '" + name + "'");
                }
            }
        }
        if (doc.contains("attempts")) c.attempts = policy_from_json(doc["attempts"]);
        if (doc.contains("transport")) c.transport = policy_from_json(doc["transport"]);
        c.temperature = doc.value("temperature", c.temperature);
        c.max_tokens = doc.value("max_tokens", c.max_tokens);
        if (doc.contains("filter")) {
            const auto& f = doc["filter"];
            c.min_tokens = f.value("min_tokens", c.min_tokens);
            c.ambiguity_filter = f.value("ambiguity", c.ambiguity_filter);
        }
        if (doc.contains("rewards")) {
            const auto& r = doc["rewards"];
            c.group_size = r.value("group_size", c.group_size);
            c.advantage_epsilon = r.value("advantage_epsilon", c.advantage_epsilon);
            c.format_weight = r.value("format_weight", c.format_weight);
            c.accuracy_weight = r.value("accuracy_weight", c.accuracy_weight);
        }
        if (doc.contains("concurrency")) {
            const auto n = doc["concurrency"].get<long long>();
            if (n < 1) throw ConfigError("concurrency must be >= 1");
            c.concurrency = static_cast<std::size_t>(n);
        }
        c.seed = doc.value("seed", c.seed);
        if (doc.contains("paths")) c.paths = doc["paths"].get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    auto c = from_json(doc);
    c.base_dir = path.parent_path();
    return c;
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json provs = nlohmann::json::object();
    for (const auto& [name, p] : providers) {
        provs[name] = {{"base_url", p.base_url},
                       {"api_key_env", p.api_key_env},
                       {"timeout_seconds", p.timeout_seconds}};
    }
    nlohmann::json roles = nlohmann::json::object();
    nlohmann::json probe_list = nlohmann::json::array();
    for (const auto& p : probes) probe_list.push_back(role_to_json(p));
    roles["probes"] = probe_list;
    for (const char* name : kSingleRoles) roles[name] = role_to_json(*single_role(*this, name));
    return {{"providers", provs},
            {"roles", roles},
            {"attempts", policy_to_json(attempts)},
            {"transport", policy_to_json(transport)},
            {"temperature", temperature},
            {"max_tokens", max_tokens},
            {"filter", {{"min_tokens", min_tokens}, {"ambiguity", ambiguity_filter}}},
            {"rewards",
             {{"group_size", group_size},
              {"advantage_epsilon", advantage_epsilon},
              {"format_weight", format_weight},
              {"accuracy_weight", accuracy_weight}}},
            {"concurrency", concurrency},
            {"seed", seed},
            {"paths", paths}};
}

}  // namespace finreason
