#include "finreason/distillation.hpp"

#include "finreason/answers.hpp"
#include "finreason/filters.hpp"
#include "finreason/json_extract.hpp"
#include "finreason/parallel.hpp"
#include "finreason/rewards.hpp"
#include "finreason/template.hpp"
#include "finreason/text.hpp"

namespace finreason::distill {

DistillItem DistillItem::from_question(const Question& q) {
    DistillItem item;
    item.id = q.id;
    item.source = q.source;
    item.language = q.language;
    if (q.is_mcq()) {
        item.question = q.body + "\n" + q.render_options();
    } else if (q.context) {
        item.question = *q.context + "\n\n" + q.body;
    } else {
        item.question = q.body;
    }
    item.gold = q.gold_answer;
    item.explanation = q.explanation;
    item.mcq = q.is_mcq();
    item.reasoner_prompt = filters::render_probe_prompt(q);
    return item;
}

DistillItem DistillItem::from_open_ended(const transform::OpenEndedQuestion& q) {
    DistillItem item;
    item.id = q.id;
    item.source = Source::cflue_oe;
    item.language = q.language;
    item.question = q.question;
    item.gold = q.answer;
    item.explanation = q.explanation;
    item.mcq = false;
    item.reasoner_prompt = render_template(prompts::builtin("reasoner_open"), {{"question", q.question}});
    return item;
}

DistillItem item_from_json(const nlohmann::json& row) {
    try {
        if (row.contains("body")) {
            auto q = row.get<Question>();
            q.validate();
            return DistillItem::from_question(q);
        }
        return DistillItem::from_open_ended(row.get<transform::OpenEndedQuestion>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad distillation record: ") + e.what());
    }
}

ReasonerOutput split_reasoner_output(std::string_view output) {
    std::optional<std::string> think;
    const auto think_open = output.find(rewards::kThinkOpen);
    const auto think_close = output.find(rewards::kThinkClose);
    if (think_open != std::string_view::npos && think_close != std::string_view::npos &&
        think_open < think_close) {
        const auto begin = think_open + rewards::kThinkOpen.size();
        think = std::string(text::trim(output.substr(begin, think_close - begin)));
    }

    ReasonerOutput out;
    const auto answer_open = output.rfind(rewards::kAnswerOpen);
    const auto answer_close = answer_open == std::string_view::npos
                                  ? std::string_view::npos
                                  : output.find(rewards::kAnswerClose, answer_open);
    if (answer_close != std::string_view::npos) {
        const auto begin = answer_open + rewards::kAnswerOpen.size();
        const auto span = output.substr(begin, answer_close - begin);
        auto boxed = rewards::find_last_boxed(span);
        if (auto* m = std::get_if<rewards::BoxedMatch>(&boxed)) {
            out.answer = std::string(text::trim(m->content));
        } else {
            out.answer = std::string(text::trim(span));
        }
        out.reasoning = think ? *think : std::string(text::trim(output.substr(0, answer_open)));
    } else {
        auto boxed = rewards::find_last_boxed(output);
        auto* m = std::get_if<rewards::BoxedMatch>(&boxed);
        if (!m) throw UnparseableReasoning("reasoner output has no <answer> tag or boxed{} answer");
        out.answer = std::string(text::trim(m->content));
        if (think) {
            out.reasoning = *think;
        } else {
            std::string rest(output.substr(0, m->begin));
            rest.append(output.substr(m->end));
            out.reasoning = std::string(text::trim(rest));
        }
    }
    if (out.answer.empty()) throw UnparseableReasoning("reasoner answer is empty");
    if (out.reasoning.empty()) throw UnparseableReasoning("reasoner produced no reasoning");
    return out;
}

GeneratedReasoning generate_reasoning(std::string_view prompt, const gateway::Endpoint& reasoner) {
    auto response = reasoner.ask(std::string(prompt));
    GeneratedReasoning g;
    g.output = split_reasoner_output(response.text);
    g.raw = std::move(response.text);
    g.calls = response.attempts;
    return g;
}

JudgeUnparseable::JudgeUnparseable(std::string message, std::string raw, int calls)
    : Error(std::move(message)), raw_(std::move(raw)), calls_(calls) {}

std::string render_verifier_prompt(const DistillItem& item, std::string_view reasoning,
                                   std::string_view answer) {
    TemplateValues values{{"question", item.question},
                          {"reasoning", std::string(reasoning)},
                          {"answer", std::string(answer)},
                          {"gold", item.gold}};
    if (item.explanation) {
        values.emplace("explanation", *item.explanation);
        return render_template(prompts::builtin("verifier"), values);
    }
    return render_template(prompts::builtin("verifier_no_explanation"), values);
}

VerifyVerdict verify(const DistillItem& item, std::string_view reasoning, std::string_view answer,
                     const gateway::Endpoint& verifier) {
    VerifyVerdict verdict;
    if (item.mcq) {
        verdict.answer_match = answers::mcq_equal(answer, item.gold);
        if (!verdict.answer_match) return verdict;
        if (!item.explanation) {
            verdict.reasoning_consistent = true;
            return verdict;
        }
    }

    const bool needs_consistency = item.explanation.has_value();
    const auto response = verifier.ask(render_verifier_prompt(item, reasoning, answer));
    verdict.judge_called = true;
    verdict.calls = response.attempts;
    verdict.transcript = response.text;

    auto obj = find_json_object(response.text, [&](const nlohmann::json& j) {
        const bool has_match = j.contains("answer_match") && j["answer_match"].is_boolean();
        const bool has_consistency =
            j.contains("reasoning_consistent") && j["reasoning_consistent"].is_boolean();
        if (item.mcq) return has_consistency;
        return has_match && (!needs_consistency || has_consistency);
    });
    if (!obj) {
        throw JudgeUnparseable("verifier reply carries no usable verdict for '" + item.id + "'",
                               response.text, response.attempts);
    }
    if (!item.mcq) verdict.answer_match = (*obj)["answer_match"].get<bool>();
    verdict.reasoning_consistent =
        needs_consistency ? (*obj)["reasoning_consistent"].get<bool>() : true;
    return verdict;
}

DistillOutcome distill_one(const DistillItem& item, const gateway::Endpoint& reasoner,
                           const gateway::Endpoint& verifier, const gateway::RetryPolicy& policy) {
    policy.validate();
    DistillOutcome outcome;
    std::vector<std::string> transcript;
    std::vector<FailureReason> reasons;

    for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
        AttemptRecord rec;
        rec.attempt = attempt;
        ReasonerOutput generated;
        try {
            const auto response = reasoner.ask(item.reasoner_prompt);
            rec.reasoner_calls = response.attempts;
            rec.reasoner_output = response.text;
            generated = split_reasoner_output(response.text);
        } catch (const UnparseableReasoning&) {
            rec.failure = FailureReason::unparseable;
        } catch (const gateway::ProviderError& e) {
            rec.reasoner_calls = e.attempts();
            rec.failure = FailureReason::provider_error;
        }

        if (!rec.failure) {
            try {
                const auto verdict = verify(item, generated.reasoning, generated.answer, verifier);
                rec.verifier_calls = verdict.calls;
                rec.verifier_output = verdict.transcript;
                if (!verdict.judge_called) ++outcome.verifier_skips;
                if (verdict.judge_called) transcript.push_back(verdict.transcript);
                if (!verdict.answer_match) {
                    rec.failure = FailureReason::wrong_answer;
                } else if (!verdict.reasoning_consistent) {
                    rec.failure = FailureReason::inconsistent_reasoning;
                }
            } catch (const JudgeUnparseable& e) {
                rec.verifier_calls = e.calls();
                rec.verifier_output = e.raw();
                transcript.push_back(e.raw());
                rec.failure = FailureReason::unparseable;
            } catch (const gateway::ProviderError& e) {
                rec.verifier_calls = e.attempts();
                rec.failure = FailureReason::provider_error;
            }
        }

        outcome.reasoner_calls += rec.reasoner_calls;
        outcome.verifier_calls += rec.verifier_calls;
        const auto failure = rec.failure;
        outcome.attempts.push_back(std::move(rec));

        if (!failure) {
            outcome.sample = ReasoningSample{item.id,          item.source,
                                             item.language,    item.question,
                                             generated.reasoning, item.gold,
                                             generated.answer, attempt,
                                             std::move(transcript)};
            return outcome;
        }
        reasons.push_back(*failure);
    }

    outcome.sample = HardSample{item.id,   item.source,         item.language, item.question,
                                item.gold, policy.max_attempts, std::move(reasons)};
    return outcome;
}

nlohmann::json DistillReport::to_json() const {
    nlohmann::json histogram = nlohmann::json::object();
    for (const auto& [attempts, count] : attempts_histogram) {
        histogram[std::to_string(attempts)] = count;
    }
    nlohmann::json reasons = nlohmann::json::object();
    for (const auto& [name, count] : failure_reasons) reasons[name] = count;
    return {{"item_count", item_count},
            {"reasoning_count", reasoning_count},
            {"hard_count", hard_count},
            {"attempts_histogram", histogram},
            {"failure_reasons", reasons},
            {"reasoner_calls", reasoner_calls},
            {"verifier_calls", verifier_calls},
            {"verifier_skips", verifier_skips},
            {"provider_failures", provider_failures}};
}

DistillResult distill_corpus(const std::vector<DistillItem>& items,
                             const gateway::Endpoint& reasoner, const gateway::Endpoint& verifier,
                             const gateway::RetryPolicy& policy, std::size_t parallelism) {
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    policy.validate();
    std::vector<DistillOutcome> outcomes(items.size());
    parallel_for(items.size(), parallelism, [&](std::size_t i) {
        outcomes[i] = distill_one(items[i], reasoner, verifier, policy);
    });

    DistillResult result;
    auto& report = result.report;
    report.item_count = items.size();
    for (auto& o : outcomes) {
        report.reasoner_calls += static_cast<std::size_t>(o.reasoner_calls);
        report.verifier_calls += static_cast<std::size_t>(o.verifier_calls);
        report.verifier_skips += static_cast<std::size_t>(o.verifier_skips);
        for (const auto& rec : o.attempts) {
            if (!rec.failure) continue;
            ++report.failure_reasons[std::string(to_string(*rec.failure))];
            if (*rec.failure == FailureReason::provider_error) ++report.provider_failures;
        }
        if (auto* r = std::get_if<ReasoningSample>(&o.sample)) {
            ++report.attempts_histogram[r->attempts_used];
            result.reasoning.push_back(std::move(*r));
        } else {
            result.hard.push_back(std::get<HardSample>(std::move(o.sample)));
        }
    }
    report.reasoning_count = result.reasoning.size();
    report.hard_count = result.hard.size();
    return result;
}

}  // namespace finreason::distill
