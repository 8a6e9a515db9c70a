#include "finreason/filters.hpp"

#include <sstream>

#include "finreason/answers.hpp"
#include "finreason/json_extract.hpp"
#include "finreason/parallel.hpp"
#include "finreason/template.hpp"
#include "finreason/text.hpp"

namespace finreason::filters {

std::size_t count_tokens(std::string_view s) {
    std::size_t count = 0;
    bool in_run = false;
    for (std::size_t pos = 0; pos < s.size();) {
        const auto cp = text::decode_utf8(s, pos);
        pos += cp.length;
        if (text::is_space(cp.value)) {
            in_run = false;
        } else if (text::is_cjk(cp.value)) {
            ++count;
            in_run = false;
        } else if (!in_run) {
            ++count;
            in_run = true;
        }
    }
    return count;
}

Decision length_filter(const Question& q, std::size_t min_tokens) {
    return count_tokens(q.body) >= min_tokens ? Decision::keep : Decision::drop;
}

Decision difficulty_filter(const Question& q, std::span<const std::string> probe_answers) {
    if (probe_answers.empty()) {
        throw ConfigError("difficulty filter needs at least one probe answer");
    }
    for (const auto& answer : probe_answers) {
        const bool correct = q.is_mcq() ? answers::mcq_equal(answer, q.gold_answer)
                                        : answers::numeric_equal(answer, q.gold_answer);
        if (!correct) return Decision::keep;
    }
    return Decision::drop;
}

std::string render_probe_prompt(const Question& q) {
    if (q.is_mcq()) {
        return render_template(prompts::builtin(q.is_multi_answer() ? "cflue_multi" : "cflue_single"),
                               {{"question", q.body}, {"choices", q.render_options()}});
    }
    if (q.context) {
        return render_template(prompts::builtin("finqa_answer"),
                               {{"context", *q.context}, {"question", q.body}});
    }
    return render_template(prompts::builtin("reasoner_open"), {{"question", q.body}});
}

std::string render_ambiguity_prompt(const Question& q) {
    return render_template(prompts::builtin("ambiguity_judge"),
                           {{"question", q.body},
                            {"choices", q.is_mcq() ? q.render_options() : std::string("(none)")},
                            {"correct_answer", q.gold_answer}});
}

std::optional<bool> parse_ambiguity_verdict(std::string_view reply) {
    auto obj = find_json_object(reply, [](const nlohmann::json& j) {
        return j.contains("ambiguous") && j["ambiguous"].is_boolean();
    });
    if (!obj) return std::nullopt;
    return (*obj)["ambiguous"].get<bool>();
}

AmbiguityVerdict ambiguity_filter(const Question& q, const gateway::Endpoint& judge,
                                  const gateway::RetryPolicy& parse_policy) {
    parse_policy.validate();
    AmbiguityVerdict verdict;
    const auto prompt = render_ambiguity_prompt(q);
    for (int attempt = 0; attempt < parse_policy.max_attempts; ++attempt) {
        try {
            const auto response = judge.ask(prompt);
            verdict.calls += response.attempts;
            verdict.transcript.push_back(response.text);
            if (auto ambiguous = parse_ambiguity_verdict(response.text)) {
                verdict.decision = *ambiguous ? Decision::drop : Decision::keep;
                return verdict;
            }
        } catch (const gateway::ProviderError& e) {
            verdict.calls += e.attempts();
            break;
        }
    }
    verdict.decision = Decision::keep;
    verdict.flagged = true;
    return verdict;
}

std::string_view to_string(DropReason reason) {
    switch (reason) {
        case DropReason::length: return "length";
        case DropReason::difficulty: return "difficulty";
        case DropReason::ambiguity: return "ambiguity";
    }
    return "length";
}

nlohmann::json FilterReport::to_json() const {
    nlohmann::json drop_map = nlohmann::json::object();
    for (const auto& [id, reason] : drops) drop_map[id] = to_string(reason);
    return {{"input_count", input_count},
            {"kept_count", kept_count},
            {"dropped_by_length", dropped_by_length},
            {"dropped_by_difficulty", dropped_by_difficulty},
            {"dropped_by_ambiguity", dropped_by_ambiguity},
            {"drops", drop_map},
            {"flagged", flagged},
            {"probe_calls", probe_calls},
            {"judge_calls", judge_calls}};
}

std::string FilterReport::to_table() const {
    std::ostringstream out;
    out << "| stage      | count |\n"
        << "|------------|-------|\n"
        << "| input      | " << input_count << " |\n"
        << "| length     | " << dropped_by_length << " |\n"
        << "| difficulty | " << dropped_by_difficulty << " |\n"
        << "| ambiguity  | " << dropped_by_ambiguity << " |\n"
        << "| kept       | " << kept_count << " |\n";
    out << "flagged: " << flagged.size() << ", probe calls: " << probe_calls
        << ", judge calls: " << judge_calls << "\n";
    return out.str();
}

namespace {

struct ItemResult {
    std::optional<DropReason> drop;
    bool flagged = false;
    std::size_t probe_calls = 0;
    std::size_t judge_calls = 0;
};

ItemResult filter_one(const Question& q, const FilterConfig& config,
                      const FilterProviders& providers) {
    ItemResult result;
    if (config.apply_length && length_filter(q, config.min_tokens) == Decision::drop) {
        result.drop = DropReason::length;
        return result;
    }
    if (config.apply_difficulty) {
        const auto prompt = render_probe_prompt(q);
        std::vector<std::string> probe_answers;
        probe_answers.reserve(providers.probes.size());
        for (const auto& probe : providers.probes) {
            try {
                const auto response = probe.ask(prompt);
                result.probe_calls += static_cast<std::size_t>(response.attempts);
                probe_answers.push_back(answers::extract_final_answer(response.text).value_or(""));
            } catch (const gateway::ProviderError& e) {
                result.probe_calls += static_cast<std::size_t>(e.attempts());
                result.flagged = true;
                probe_answers.emplace_back();
            }
        }
        if (difficulty_filter(q, probe_answers) == Decision::drop) {
            result.drop = DropReason::difficulty;
            return result;
        }
    }
    if (config.apply_ambiguity) {
        const auto verdict = ambiguity_filter(q, *providers.judge, config.judge_policy);
        result.judge_calls += static_cast<std::size_t>(verdict.calls);
        result.flagged = result.flagged || verdict.flagged;
        if (verdict.decision == Decision::drop) result.drop = DropReason::ambiguity;
    }
    return result;
}

}  // namespace

FilterResult run_filter_pipeline(const std::vector<Question>& corpus, const FilterConfig& config,
                                 const FilterProviders& providers) {
    if (config.apply_difficulty && providers.probes.empty()) {
        throw ConfigError("difficulty filter enabled but no probe models configured");
    }
    if (config.apply_ambiguity && !providers.judge) {
        throw ConfigError("ambiguity filter enabled but no judge model configured");
    }
    if (config.concurrency < 1) throw ConfigError("concurrency must be >= 1");

    std::vector<ItemResult> items(corpus.size());
    parallel_for(corpus.size(), config.concurrency,
                 [&](std::size_t i) { items[i] = filter_one(corpus[i], config, providers); });

    FilterResult out;
    auto& report = out.report;
    report.input_count = corpus.size();
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& item = items[i];
        report.probe_calls += item.probe_calls;
        report.judge_calls += item.judge_calls;
        if (item.flagged) report.flagged.push_back(corpus[i].id);
        if (!item.drop) {
            out.kept.push_back(corpus[i]);
            continue;
        }
        report.drops.emplace_back(corpus[i].id, *item.drop);
        switch (*item.drop) {
            case DropReason::length: ++report.dropped_by_length; break;
            case DropReason::difficulty: ++report.dropped_by_difficulty; break;
            case DropReason::ambiguity: ++report.dropped_by_ambiguity; break;
        }
    }
    report.kept_count = out.kept.size();
    return out;
}

}  // namespace finreason::filters
