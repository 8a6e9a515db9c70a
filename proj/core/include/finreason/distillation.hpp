#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "finreason/corpus.hpp"
#include "finreason/gateway.hpp"
#include "finreason/question_transform.hpp"
#include "finreason/samples.hpp"

namespace finreason::distill {

/// Source-agnostic unit of work for the generate/verify loop.
struct DistillItem {
    std::string id;
    Source source = Source::other;
    Language language = Language::zh;
    std::string question;  // x as the trained model will see it
    std::string gold;      // y
    std::optional<std::string> explanation;
    bool mcq = false;
    std::string reasoner_prompt;

    static DistillItem from_question(const Question& q);
    static DistillItem from_open_ended(const transform::OpenEndedQuestion& q);
};

/// Accepts Question records (with "body") and converted records (with
/// "question" + "answer") on the same stream.
DistillItem item_from_json(const nlohmann::json& row);

class UnparseableReasoning : public Error {
public:
    using Error::Error;
};

struct ReasonerOutput {
    std::string reasoning;
    std::string answer;
};

/// Tagged output splits on the tags; otherwise the answer is the last boxed
/// expression and the reasoning is the rest of the text.
ReasonerOutput split_reasoner_output(std::string_view output);

struct GeneratedReasoning {
    ReasonerOutput output;
    std::string raw;
    int calls = 0;
};

GeneratedReasoning generate_reasoning(std::string_view prompt, const gateway::Endpoint& reasoner);

class JudgeUnparseable : public Error {
public:
    JudgeUnparseable(std::string message, std::string raw, int calls);
    const std::string& raw() const noexcept { return raw_; }
    int calls() const noexcept { return calls_; }

private:
    std::string raw_;
    int calls_;
};

struct VerifyVerdict {
    bool answer_match = false;
    bool reasoning_consistent = false;  // vacuously true without an explanation
    bool judge_called = false;
    int calls = 0;
    std::string transcript;

    bool approved() const noexcept { return answer_match && reasoning_consistent; }
};

std::string render_verifier_prompt(const DistillItem& item, std::string_view reasoning,
                                   std::string_view answer);

/// MCQ answers are compared mechanically first: a mismatch short-circuits to
/// answer_match=false, and a match without an explanation needs no judge.
/// Everything else costs one judge call. Throws JudgeUnparseable.
VerifyVerdict verify(const DistillItem& item, std::string_view reasoning, std::string_view answer,
                     const gateway::Endpoint& verifier);

struct AttemptRecord {
    int attempt = 0;
    std::optional<FailureReason> failure;
    std::string reasoner_output;
    std::string verifier_output;
    int reasoner_calls = 0;
    int verifier_calls = 0;
};

struct DistillOutcome {
    SampleOutcome sample;
    std::vector<AttemptRecord> attempts;
    int reasoner_calls = 0;
    int verifier_calls = 0;
    int verifier_skips = 0;  // attempts settled by the mechanical MCQ check alone

    bool reasoned() const noexcept { return std::holds_alternative<ReasoningSample>(sample); }
};

/// Up to policy.max_attempts fresh generate+verify rounds; the first fully
/// approved one wins.
DistillOutcome distill_one(const DistillItem& item, const gateway::Endpoint& reasoner,
                           const gateway::Endpoint& verifier, const gateway::RetryPolicy& policy);

struct DistillReport {
    std::size_t item_count = 0;
    std::size_t reasoning_count = 0;
    std::size_t hard_count = 0;
    std::map<int, std::size_t> attempts_histogram;  // attempts_used -> reasoning samples
    std::map<std::string, std::size_t> failure_reasons;
    std::size_t reasoner_calls = 0;
    std::size_t verifier_calls = 0;
    std::size_t verifier_skips = 0;
    std::size_t provider_failures = 0;

    nlohmann::json to_json() const;
};

struct DistillResult {
    std::vector<ReasoningSample> reasoning;  // R
    std::vector<HardSample> hard;            // G
    DistillReport report;
};

DistillResult distill_corpus(const std::vector<DistillItem>& items, const gateway::Endpoint& reasoner,
                             const gateway::Endpoint& verifier, const gateway::RetryPolicy& policy,
                             std::size_t parallelism);

}  // namespace finreason::distill
