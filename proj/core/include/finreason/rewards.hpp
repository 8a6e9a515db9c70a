#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "finreason/errors.hpp"

namespace finreason::rewards {

inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";
inline constexpr std::string_view kAnswerOpen = "<answer>";
inline constexpr std::string_view kAnswerClose = "</answer>";

struct StructuredOutput {
    std::string think;
    std::string answer;

    std::string render() const;

    friend bool operator==(const StructuredOutput&, const StructuredOutput&) = default;
};

enum class ParseError {
    missing_think,
    missing_answer,
    duplicate_tags,
    extra_content,
    wrong_order,
    empty_answer,
};

std::string_view to_string(ParseError error);

using ParseResult = std::variant<StructuredOutput, ParseError>;

/// Strict parse of `<think>T</think><answer>A</answer>`: whitespace is allowed
/// only before, between and after the two tag pairs; tags are case-sensitive;
/// each tag appears exactly once; A must not be blank. Contents are returned
/// verbatim.
///
/// Checks run in this order, first failure wins: duplicate_tags,
/// missing_think, missing_answer, wrong_order, extra_content, empty_answer.
ParseResult parse_structured(std::string_view output);

int format_reward(std::string_view output);

class InvalidReference : public Error {
public:
    using Error::Error;
};

/// 1 iff the output parses and its answer canonically equals `reference`.
/// References must be MCQ letter sets unless `allow_free_text` is set;
/// otherwise InvalidReference is thrown.
int accuracy_reward(std::string_view output, std::string_view reference,
                    bool allow_free_text = false);

enum class BoxedError { not_found, unbalanced_braces };

std::string_view to_string(BoxedError error);

struct BoxedMatch {
    std::string content;
    std::size_t begin = 0;  // first byte of `boxed` (or of a preceding backslash)
    std::size_t end = 0;    // one past the closing brace
};

/// Last `boxed{...}` occurrence, braces balanced.
std::variant<BoxedMatch, BoxedError> find_last_boxed(std::string_view text);

class ExtractionError : public Error {
public:
    explicit ExtractionError(BoxedError kind);
    BoxedError kind() const noexcept { return kind_; }

private:
    BoxedError kind_;
};

/// Content of the last boxed{} expression; throws ExtractionError.
std::string extract_boxed(std::string_view text);

class GroupTooSmall : public Error {
public:
    using Error::Error;
};

struct AdvantageOptions {
    double epsilon = 1e-6;
};

/// (r_i - mean) / (population std + epsilon); exactly zero when all rewards
/// are equal. Throws GroupTooSmall when fewer than two rewards are given.
std::vector<double> group_advantages(std::span<const double> rewards,
                                     AdvantageOptions options = {});

struct RewardWeights {
    double format = 1.0;
    double accuracy = 1.0;
};

struct RewardVector {
    int format = 0;
    int accuracy = 0;
    double total = 0.0;

    friend bool operator==(const RewardVector&, const RewardVector&) = default;
};

struct ScoringOptions {
    RewardWeights weights;
    AdvantageOptions advantage;
    bool allow_free_text = false;
};

RewardVector score_output(std::string_view output, std::string_view reference,
                          const ScoringOptions& options = {});

struct RolloutGroup {
    std::string prompt_id;
    std::vector<std::string> rollouts;
    std::string reference;
    std::vector<RewardVector> rewards;
    std::vector<double> advantages;
};

/// Fills rewards and advantages (over total rewards) for every rollout.
RolloutGroup score_group(RolloutGroup group, std::string_view reference,
                         const ScoringOptions& options = {});

void to_json(nlohmann::json& j, const RewardVector& r);
void to_json(nlohmann::json& j, const RolloutGroup& g);
void from_json(const nlohmann::json& j, RolloutGroup& g);

}  // namespace finreason::rewards
