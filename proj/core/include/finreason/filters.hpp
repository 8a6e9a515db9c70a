#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "finreason/corpus.hpp"
#include "finreason/gateway.hpp"

namespace finreason::filters {

/// Whitespace-delimited runs count one token each; every CJK codepoint is a
/// token of its own and also ends the surrounding run.
std::size_t count_tokens(std::string_view text);

enum class Decision { keep, drop };

inline constexpr std::size_t kDefaultMinTokens = 15;

Decision length_filter(const Question& q, std::size_t min_tokens = kDefaultMinTokens);

/// Drops the question when every probe answer matches the gold answer (MCQ
/// letter-set equality, numeric equality otherwise). Throws ConfigError on
/// an empty probe list.
Decision difficulty_filter(const Question& q, std::span<const std::string> probe_answers);

/// Answering prompt used to query probe models.
std::string render_probe_prompt(const Question& q);

std::string render_ambiguity_prompt(const Question& q);

/// Reads {"ambiguous": bool} out of a judge reply.
std::optional<bool> parse_ambiguity_verdict(std::string_view reply);

struct AmbiguityVerdict {
    Decision decision = Decision::keep;
    bool flagged = false;  // judge never produced a parseable verdict
    int calls = 0;
    std::vector<std::string> transcript;
};

/// Asks the judge up to `parse_policy.max_attempts` times for a parseable
/// verdict. Unparseable or unreachable judges keep the question and flag it.
AmbiguityVerdict ambiguity_filter(const Question& q, const gateway::Endpoint& judge,
                                  const gateway::RetryPolicy& parse_policy);

enum class DropReason { length, difficulty, ambiguity };

std::string_view to_string(DropReason reason);

struct FilterReport {
    std::size_t input_count = 0;
    std::size_t kept_count = 0;
    std::size_t dropped_by_length = 0;
    std::size_t dropped_by_difficulty = 0;
    std::size_t dropped_by_ambiguity = 0;
    std::vector<std::pair<std::string, DropReason>> drops;  // input order
    std::vector<std::string> flagged;                       // input order
    std::size_t probe_calls = 0;
    std::size_t judge_calls = 0;

    nlohmann::json to_json() const;
    std::string to_table() const;
};

struct FilterConfig {
    std::size_t min_tokens = kDefaultMinTokens;
    bool apply_length = true;
    bool apply_difficulty = true;
    bool apply_ambiguity = true;
    gateway::RetryPolicy judge_policy;
    std::size_t concurrency = 1;
};

struct FilterProviders {
    std::vector<gateway::Endpoint> probes;
    std::optional<gateway::Endpoint> judge;
};

struct FilterResult {
    std::vector<Question> kept;
    FilterReport report;
};

/// Length, then difficulty, then ambiguity. A question is attributed to the
/// first stage that drops it and later stages never see it.
FilterResult run_filter_pipeline(const std::vector<Question>& corpus, const FilterConfig& config,
                                 const FilterProviders& providers);

}  // namespace finreason::filters
