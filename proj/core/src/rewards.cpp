#include "finreason/rewards.hpp"

#include <algorithm>
#include <cmath>

#include "finreason/answers.hpp"
#include "finreason/text.hpp"

namespace finreason::rewards {

std::string StructuredOutput::render() const {
    std::string out;
    out.reserve(think.size() + answer.size() + 32);
    out.append(kThinkOpen).append(think).append(kThinkClose);
    out.append(kAnswerOpen).append(answer).append(kAnswerClose);
    return out;
}

std::string_view to_string(ParseError error) {
    switch (error) {
        case ParseError::missing_think: return "missing_think";
        case ParseError::missing_answer: return "missing_answer";
        case ParseError::duplicate_tags: return "duplicate_tags";
        case ParseError::extra_content: return "extra_content";
        case ParseError::wrong_order: return "wrong_order";
        case ParseError::empty_answer: return "empty_answer";
    }
    return "extra_content";
}

ParseResult parse_structured(std::string_view output) {
    const auto s = text::trim(output);
    const std::size_t n_think_open = text::count_occurrences(s, kThinkOpen);
    const std::size_t n_think_close = text::count_occurrences(s, kThinkClose);
    const std::size_t n_answer_open = text::count_occurrences(s, kAnswerOpen);
    const std::size_t n_answer_close = text::count_occurrences(s, kAnswerClose);

    if (n_think_open > 1 || n_think_close > 1 || n_answer_open > 1 || n_answer_close > 1) {
        return ParseError::duplicate_tags;
    }
    if (n_think_open == 0 || n_think_close == 0) return ParseError::missing_think;
    if (n_answer_open == 0 || n_answer_close == 0) return ParseError::missing_answer;

    const auto think_open = s.find(kThinkOpen);
    const auto think_close = s.find(kThinkClose);
    const auto answer_open = s.find(kAnswerOpen);
    const auto answer_close = s.find(kAnswerClose);
    if (!(think_open < think_close && think_close < answer_open && answer_open < answer_close)) {
        return ParseError::wrong_order;
    }

    const auto think_end = think_close + kThinkClose.size();
    if (think_open != 0 || answer_close + kAnswerClose.size() != s.size() ||
        !text::is_blank(s.substr(think_end, answer_open - think_end))) {
        return ParseError::extra_content;
    }

    const auto think_begin = think_open + kThinkOpen.size();
    const auto answer_begin = answer_open + kAnswerOpen.size();
    StructuredOutput parsed{std::string(s.substr(think_begin, think_close - think_begin)),
                            std::string(s.substr(answer_begin, answer_close - answer_begin))};
    if (text::is_blank(parsed.answer)) return ParseError::empty_answer;
    return parsed;
}

int format_reward(std::string_view output) {
    return std::holds_alternative<StructuredOutput>(parse_structured(output)) ? 1 : 0;
}

int accuracy_reward(std::string_view output, std::string_view reference, bool allow_free_text) {
    if (!allow_free_text && !answers::mcq_letter_set(reference)) {
        throw InvalidReference("accuracy reward only covers multiple-choice references, got '" +
                               std::string(reference) + "'");
    }
    const auto parsed = parse_structured(output);
    const auto* ok = std::get_if<StructuredOutput>(&parsed);
    if (!ok) return 0;
    return answers::canonicalize(ok->answer) == answers::canonicalize(reference) ? 1 : 0;
}

std::string_view to_string(BoxedError error) {
    return error == BoxedError::not_found ? "not_found" : "unbalanced_braces";
}

std::variant<BoxedMatch, BoxedError> find_last_boxed(std::string_view text) {
    constexpr std::string_view kToken = "boxed{";
    const auto pos = text.rfind(kToken);
    if (pos == std::string_view::npos) return BoxedError::not_found;
    const auto content_begin = pos + kToken.size();
    int depth = 1;
    for (std::size_t i = content_begin; i < text.size(); ++i) {
        if (text[i] == '{') {
            ++depth;
        } else if (text[i] == '}' && --depth == 0) {
            BoxedMatch m;
            m.content = std::string(text.substr(content_begin, i - content_begin));
            m.begin = (pos > 0 && text[pos - 1] == '\\') ? pos - 1 : pos;
            m.end = i + 1;
            return m;
        }
    }
    return BoxedError::unbalanced_braces;
}

ExtractionError::ExtractionError(BoxedError kind)
    : Error(std::string("boxed extraction failed: ") + std::string(to_string(kind))), kind_(kind) {}

std::string extract_boxed(std::string_view text) {
    auto found = find_last_boxed(text);
    if (auto* err = std::get_if<BoxedError>(&found)) throw ExtractionError(*err);
    return std::get<BoxedMatch>(std::move(found)).content;
}

std::vector<double> group_advantages(std::span<const double> rewards, AdvantageOptions options) {
    if (rewards.size() < 2) {
        throw GroupTooSmall("group advantages need at least 2 rewards, got " +
                            std::to_string(rewards.size()));
    }
    if (std::any_of(rewards.begin(), rewards.end(), [](double r) { return !std::isfinite(r); })) {
        throw DataError("group rewards must be finite");
    }
    const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
    std::vector<double> advantages(rewards.size(), 0.0);
    if (*lo == *hi) return advantages;

    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    const double denom = std::sqrt(var / n) + options.epsilon;
    for (std::size_t i = 0; i < rewards.size(); ++i) advantages[i] = (rewards[i] - mean) / denom;
    return advantages;
}

RewardVector score_output(std::string_view output, std::string_view reference,
                          const ScoringOptions& options) {
    RewardVector v;
    v.format = format_reward(output);
    v.accuracy = accuracy_reward(output, reference, options.allow_free_text);
    v.total = options.weights.format * v.format + options.weights.accuracy * v.accuracy;
    return v;
}

RolloutGroup score_group(RolloutGroup group, std::string_view reference,
                         const ScoringOptions& options) {
    if (group.rollouts.size() < 2) {
        throw GroupTooSmall("rollout group '" + group.prompt_id + "' has " +
                            std::to_string(group.rollouts.size()) + " rollout(s)");
    }
    group.reference = std::string(reference);
    group.rewards.clear();
    std::vector<double> totals;
    totals.reserve(group.rollouts.size());
    for (const auto& rollout : group.rollouts) {
        group.rewards.push_back(score_output(rollout, reference, options));
        totals.push_back(group.rewards.back().total);
    }
    group.advantages = group_advantages(totals, options.advantage);
    return group;
}

void to_json(nlohmann::json& j, const RewardVector& r) {
    j = {{"format", r.format}, {"accuracy", r.accuracy}, {"total", r.total}};
}

void to_json(nlohmann::json& j, const RolloutGroup& g) {
    j = {{"prompt_id", g.prompt_id}, {"rollouts", g.rollouts}, {"reference", g.reference}};
    if (!g.rewards.empty()) j["rewards"] = g.rewards;
    if (!g.advantages.empty()) j["advantages"] = g.advantages;
}

void from_json(const nlohmann::json& j, RolloutGroup& g) {
    g = RolloutGroup{};
    g.prompt_id = j.at("prompt_id").get<std::string>();
    g.rollouts = j.at("rollouts").get<std::vector<std::string>>();
    g.reference = j.at("reference").get<std::string>();
}

}  // namespace finreason::rewards
