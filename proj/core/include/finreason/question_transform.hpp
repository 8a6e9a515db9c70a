#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "finreason/corpus.hpp"
#include "finreason/gateway.hpp"

namespace finreason::transform {

class NotMcq : public Error {
public:
    using Error::Error;
};

class MalformedConversion : public Error {
public:
    using Error::Error;
};

struct OpenEndedQuestion {
    std::string id;
    std::string question;
    std::string answer;
    std::string origin_id;
    std::string origin_gold;                 // MCQ gold letters, kept for verification
    std::optional<std::string> explanation;  // carried over from the MCQ
    Language language = Language::zh;

    friend bool operator==(const OpenEndedQuestion&, const OpenEndedQuestion&) = default;
};

struct ConversionFields {
    std::string question;
    std::string answer;
};

std::string render_conversion_prompt(const Question& q);

/// First embedded JSON object carrying non-empty "question" and "answer"
/// strings. Throws MalformedConversion when there is none or the question
/// still lists options.
ConversionFields parse_conversion(std::string_view response);

struct ConversionFailure {
    std::string origin_id;
    std::vector<std::string> raw_responses;
    std::vector<std::string> reasons;
    bool provider_failed = false;
};

struct ConvertResult {
    std::variant<OpenEndedQuestion, ConversionFailure> outcome;
    int calls = 0;

    bool ok() const noexcept { return std::holds_alternative<OpenEndedQuestion>(outcome); }
};

/// Retries unparseable replies up to `policy.max_attempts` times.
ConvertResult convert(const Question& q, const gateway::Endpoint& converter,
                      const gateway::RetryPolicy& policy);

struct ConversionBatch {
    std::vector<OpenEndedQuestion> converted;
    std::vector<ConversionFailure> failures;
    std::size_t calls = 0;
    std::size_t provider_failures = 0;
};

/// Non-MCQ inputs are reported as failures; order follows the input.
ConversionBatch convert_corpus(const std::vector<Question>& corpus,
                               const gateway::Endpoint& converter,
                               const gateway::RetryPolicy& policy, std::size_t concurrency);

void to_json(nlohmann::json& j, const OpenEndedQuestion& q);
void from_json(const nlohmann::json& j, OpenEndedQuestion& q);
void to_json(nlohmann::json& j, const ConversionFailure& f);

}  // namespace finreason::transform
