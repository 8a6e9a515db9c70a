#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "finreason/corpus.hpp"

namespace finreason {

/// Why one generation attempt was rejected.
enum class FailureReason { wrong_answer, inconsistent_reasoning, unparseable, provider_error };

std::string_view to_string(FailureReason reason);
FailureReason parse_failure_reason(std::string_view name);

/// A verified (x, r, y) triple.
struct ReasoningSample {
    std::string id;
    Source source = Source::other;
    Language language = Language::zh;
    std::string input;             // x
    std::string reasoning;         // r
    std::string answer;            // y, the gold answer
    std::string predicted_answer;  // what the generator answered on the kept attempt
    int attempts_used = 1;
    std::vector<std::string> verifier_transcript;

    friend bool operator==(const ReasoningSample&, const ReasoningSample&) = default;
};

/// An (x, y) pair whose reasoning never passed verification.
struct HardSample {
    std::string id;
    Source source = Source::other;
    Language language = Language::zh;
    std::string input;
    std::string answer;
    int attempts_used = 0;
    std::vector<FailureReason> failure_reasons;

    friend bool operator==(const HardSample&, const HardSample&) = default;
};

using SampleOutcome = std::variant<ReasoningSample, HardSample>;

void to_json(nlohmann::json& j, const ReasoningSample& s);
void from_json(const nlohmann::json& j, ReasoningSample& s);
void to_json(nlohmann::json& j, const HardSample& s);
void from_json(const nlohmann::json& j, HardSample& s);

}  // namespace finreason
