#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "finreason/gateway.hpp"

namespace finreason::eval {

enum class ScoreKind { mcq_single, mcq_multi, numeric_boxed, judge_finqa, judge_ccc };

std::string_view to_string(ScoreKind kind);
ScoreKind parse_score_kind(std::string_view name);
bool is_judge_kind(ScoreKind kind) noexcept;

struct Prediction {
    std::string id;
    std::string output;
    std::string set;  // optional; disambiguates ids shared across test sets
};

struct RuleScore {
    int score = 0;
    bool extraction_failed = false;
    std::string extracted;
};

/// Extracts the final answer (answer tags, then last boxed) and compares it
/// by letter set for MCQ kinds or numerically for numeric_boxed.
RuleScore rule_based_score(const Prediction& pred, std::string_view gold, ScoreKind kind);

std::string render_finqa_judge_prompt(std::string_view candidate, std::string_view gold);
std::string render_ccc_judge_prompt(std::string_view candidate, std::string_view gold);

/// Last boxed{0|1} in the reply (boxed{{1}} tolerated).
std::optional<int> parse_finqa_verdict(std::string_view reply);
/// First JSON object with "answer" equal to 0 or 1, fences tolerated.
std::optional<int> parse_ccc_verdict(std::string_view reply);

struct JudgeScore {
    int score = 0;
    bool flagged = false;  // no parseable verdict within the retry budget
    int calls = 0;
    std::vector<std::string> transcript;
};

JudgeScore judge_score_finqa(std::string_view candidate, std::string_view gold,
                             const gateway::Endpoint& judge, const gateway::RetryPolicy& policy);
JudgeScore judge_score_ccc(std::string_view candidate, std::string_view gold,
                           const gateway::Endpoint& judge, const gateway::RetryPolicy& policy);

struct TestItem {
    std::string id;
    std::string gold;
    std::optional<ScoreKind> kind;  // overrides the set's kind
};

struct TestSet {
    std::string name;
    std::vector<TestItem> items;
    ScoreKind kind = ScoreKind::mcq_single;
};

/// Official test-set sizes; nullopt for unknown names.
std::optional<std::size_t> official_size(std::string_view name);

struct ItemVerdict {
    std::string id;
    int score = 0;
    bool flagged = false;
    std::string extracted;
};

struct SetResult {
    std::string name;
    std::size_t size = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;  // percent, unrounded
    std::size_t judge_calls = 0;
    std::vector<ItemVerdict> verdicts;
};

struct EvalReport {
    std::vector<SetResult> sets;
    double average = 0.0;  // macro average of set accuracies, percent
    std::size_t judge_calls = 0;

    nlohmann::json to_json() const;
    /// One-row results table: Model | set... | Avg.
    std::string to_markdown(std::string_view model_name) const;
};

class MissingPrediction : public Error {
public:
    explicit MissingPrediction(std::vector<std::string> ids);
    const std::vector<std::string>& ids() const noexcept { return ids_; }

private:
    std::vector<std::string> ids_;
};

struct EvalOptions {
    bool enforce_official_sizes = false;
    gateway::RetryPolicy judge_policy;
    std::size_t concurrency = 1;
};

/// Every item needs exactly one prediction. A prediction matches an item by
/// (set, id), or by id alone when its set is empty. Missing ids throw
/// MissingPrediction; duplicate or unmatched predictions throw DataError.
/// Judge kinds need `judge`.
EvalReport evaluate(const std::vector<TestSet>& testsets, const std::vector<Prediction>& predictions,
                    const std::optional<gateway::Endpoint>& judge, const EvalOptions& options = {});

/// Arithmetic mean; 0 for an empty span.
double macro_average(std::span<const double> accuracies);

/// Half-up rounding to two decimals, robust to binary representation.
double round_2dp(double value);

void to_json(nlohmann::json& j, const Prediction& p);
void from_json(const nlohmann::json& j, Prediction& p);
void from_json(const nlohmann::json& j, TestItem& t);

}  // namespace finreason::eval
