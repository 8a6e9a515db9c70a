#include "finreason/samples.hpp"

namespace finreason {

std::string_view to_string(FailureReason reason) {
    switch (reason) {
        case FailureReason::wrong_answer: return "wrong_answer";
        case FailureReason::inconsistent_reasoning: return "inconsistent_reasoning";
        case FailureReason::unparseable: return "unparseable";
        case FailureReason::provider_error: return "provider_error";
    }
    return "unparseable";
}

FailureReason parse_failure_reason(std::string_view name) {
    for (auto r : {FailureReason::wrong_answer, FailureReason::inconsistent_reasoning,
                   FailureReason::unparseable, FailureReason::provider_error}) {
        if (to_string(r) == name) return r;
    }
    throw DataError("unknown failure reason: " + std::string(name));
}

void to_json(nlohmann::json& j, const ReasoningSample& s) {
    j = {{"id", s.id},
         {"source", to_string(s.source)},
         {"language", to_string(s.language)},
         {"input", s.input},
         {"reasoning", s.reasoning},
         {"answer", s.answer},
         {"predicted_answer", s.predicted_answer},
         {"attempts_used", s.attempts_used},
         {"verifier_transcript", s.verifier_transcript}};
}

void from_json(const nlohmann::json& j, ReasoningSample& s) {
    s = ReasoningSample{};
    s.id = j.at("id").get<std::string>();
    s.source = parse_source(j.value("source", std::string("other")));
    s.language = parse_language(j.value("language", std::string("zh")));
    s.input = j.at("input").get<std::string>();
    s.reasoning = j.at("reasoning").get<std::string>();
    s.answer = j.at("answer").get<std::string>();
    s.predicted_answer = j.value("predicted_answer", s.answer);
    s.attempts_used = j.value("attempts_used", 1);
    s.verifier_transcript = j.value("verifier_transcript", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const HardSample& s) {
    std::vector<std::string_view> reasons;
    reasons.reserve(s.failure_reasons.size());
    for (auto r : s.failure_reasons) reasons.push_back(to_string(r));
    j = {{"id", s.id},
         {"source", to_string(s.source)},
         {"language", to_string(s.language)},
         {"input", s.input},
         {"answer", s.answer},
         {"attempts_used", s.attempts_used},
         {"failure_reasons", reasons}};
}

void from_json(const nlohmann::json& j, HardSample& s) {
    s = HardSample{};
    s.id = j.at("id").get<std::string>();
    s.source = parse_source(j.value("source", std::string("other")));
    s.language = parse_language(j.value("language", std::string("zh")));
    s.input = j.at("input").get<std::string>();
    s.answer = j.at("answer").get<std::string>();
    s.attempts_used = j.value("attempts_used", 0);
    for (const auto& r : j.value("failure_reasons", std::vector<std::string>{})) {
        s.failure_reasons.push_back(parse_failure_reason(r));
    }
}

}  // namespace finreason
