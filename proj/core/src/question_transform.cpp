#include "finreason/question_transform.hpp"

#include <set>

#include "finreason/json_extract.hpp"
#include "finreason/parallel.hpp"
#include "finreason/template.hpp"
#include "finreason/text.hpp"

namespace finreason::transform {

namespace {

bool label_boundary(std::string_view s, std::size_t pos) {
    if (pos == 0) return true;
    const char prev = s[pos - 1];
    return prev == ' ' || prev == '\n' || prev == '\t' || prev == '(' ||
           static_cast<unsigned char>(prev) >= 0x80;
}

// Two or more distinct "A." / "B、" / "C．" style labels means options leaked.
bool lists_options(std::string_view s) {
    std::set<char> labels;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const char c = s[i];
        if (c < 'A' || c > 'F' || !label_boundary(s, i)) continue;
        const auto rest = s.substr(i + 1);
        if (rest.front() == '.' || text::starts_with(rest, "、") || text::starts_with(rest, "．")) {
            labels.insert(c);
        }
    }
    return labels.size() >= 2;
}

}  // namespace

std::string render_conversion_prompt(const Question& q) {
    if (!q.is_mcq()) throw NotMcq("question '" + q.id + "' has no choices to convert");
    return render_template(prompts::builtin("conversion"), {{"question", q.body},
                                                            {"options", q.render_options()},
                                                            {"correct_answer", q.gold_answer}});
}

ConversionFields parse_conversion(std::string_view response) {
    auto obj = find_json_object(response, [](const nlohmann::json& j) {
        return j.contains("question") && j.contains("answer");
    });
    if (!obj) throw MalformedConversion("no JSON object with \"question\" and \"answer\"");
    const auto& question = (*obj)["question"];
    const auto& answer = (*obj)["answer"];
    if (!question.is_string() || !answer.is_string()) {
        throw MalformedConversion("\"question\" and \"answer\" must be strings");
    }
    ConversionFields fields{std::string(text::trim(question.get<std::string>())),
                            std::string(text::trim(answer.get<std::string>()))};
    if (fields.question.empty()) throw MalformedConversion("empty \"question\"");
    if (fields.answer.empty()) throw MalformedConversion("empty \"answer\"");
    if (lists_options(fields.question)) {
        throw MalformedConversion("converted question still lists options");
    }
    return fields;
}

ConvertResult convert(const Question& q, const gateway::Endpoint& converter,
                      const gateway::RetryPolicy& policy) {
    policy.validate();
    const auto prompt = render_conversion_prompt(q);
    ConvertResult result;
    ConversionFailure failure;
    failure.origin_id = q.id;
    for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
        try {
            const auto response = converter.ask(prompt);
            result.calls += response.attempts;
            failure.raw_responses.push_back(response.text);
            auto fields = parse_conversion(response.text);
            result.outcome = OpenEndedQuestion{q.id + "-oe", std::move(fields.question),
                                               std::move(fields.answer), q.id, q.gold_answer,
                                               q.explanation, q.language};
            return result;
        } catch (const MalformedConversion& e) {
            failure.reasons.emplace_back(e.what());
        } catch (const gateway::ProviderError& e) {
            result.calls += e.attempts();
            failure.reasons.emplace_back(e.what());
            failure.provider_failed = true;
            break;
        }
    }
    result.outcome = std::move(failure);
    return result;
}

ConversionBatch convert_corpus(const std::vector<Question>& corpus,
                               const gateway::Endpoint& converter,
                               const gateway::RetryPolicy& policy, std::size_t concurrency) {
    if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    std::vector<ConvertResult> results(corpus.size());
    parallel_for(corpus.size(), concurrency, [&](std::size_t i) {
        if (!corpus[i].is_mcq()) {
            results[i].outcome =
                ConversionFailure{corpus[i].id, {}, {"not a multiple-choice question"}, false};
            return;
        }
        results[i] = convert(corpus[i], converter, policy);
    });

    ConversionBatch batch;
    for (auto& r : results) {
        batch.calls += static_cast<std::size_t>(r.calls);
        if (auto* oe = std::get_if<OpenEndedQuestion>(&r.outcome)) {
            batch.converted.push_back(std::move(*oe));
        } else {
            auto& failure = std::get<ConversionFailure>(r.outcome);
            if (failure.provider_failed) ++batch.provider_failures;
            batch.failures.push_back(std::move(failure));
        }
    }
    return batch;
}

void to_json(nlohmann::json& j, const OpenEndedQuestion& q) {
    j = {{"id", q.id},
         {"question", q.question},
         {"answer", q.answer},
         {"origin_id", q.origin_id},
         {"origin_gold", q.origin_gold}};
    if (q.explanation) j["explanation"] = *q.explanation;
    j["language"] = to_string(q.language);
}

void from_json(const nlohmann::json& j, OpenEndedQuestion& q) {
    q = OpenEndedQuestion{};
    q.id = j.at("id").get<std::string>();
    q.question = j.at("question").get<std::string>();
    q.answer = j.at("answer").get<std::string>();
    q.origin_id = j.value("origin_id", q.id);
    q.origin_gold = j.value("origin_gold", std::string());
    if (j.contains("explanation") && j["explanation"].is_string()) {
        q.explanation = j["explanation"].get<std::string>();
    }
    q.language = parse_language(j.value("language", std::string("zh")));
}

void to_json(nlohmann::json& j, const ConversionFailure& f) {
    j = {{"origin_id", f.origin_id},
         {"raw_responses", f.raw_responses},
         {"reasons", f.reasons},
         {"provider_failed", f.provider_failed}};
}

}  // namespace finreason::transform
