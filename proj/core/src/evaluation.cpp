#include "finreason/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "finreason/answers.hpp"
#include "finreason/json_extract.hpp"
#include "finreason/parallel.hpp"
#include "finreason/rewards.hpp"
#include "finreason/template.hpp"
#include "finreason/text.hpp"

namespace finreason::eval {

std::string_view to_string(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::mcq_single: return "mcq_single";
        case ScoreKind::mcq_multi: return "mcq_multi";
        case ScoreKind::numeric_boxed: return "numeric_boxed";
        case ScoreKind::judge_finqa: return "judge_finqa";
        case ScoreKind::judge_ccc: return "judge_ccc";
    }
    return "mcq_single";
}

ScoreKind parse_score_kind(std::string_view name) {
    for (auto k : {ScoreKind::mcq_single, ScoreKind::mcq_multi, ScoreKind::numeric_boxed,
                   ScoreKind::judge_finqa, ScoreKind::judge_ccc}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown score kind: '" + std::string(name) + "'");
}

bool is_judge_kind(ScoreKind kind) noexcept {
    return kind == ScoreKind::judge_finqa || kind == ScoreKind::judge_ccc;
}

RuleScore rule_based_score(const Prediction& pred, std::string_view gold, ScoreKind kind) {
    if (is_judge_kind(kind)) {
        throw ConfigError("rule_based_score cannot score judge kind " + std::string(to_string(kind)));
    }
    RuleScore result;
    const auto answer = answers::extract_final_answer(pred.output);
    if (!answer) {
        result.extraction_failed = true;
        return result;
    }
    result.extracted = *answer;
    const bool correct = kind == ScoreKind::numeric_boxed ? answers::numeric_equal(*answer, gold)
                                                          : answers::mcq_equal(*answer, gold);
    result.score = correct ? 1 : 0;
    return result;
}

std::string render_finqa_judge_prompt(std::string_view candidate, std::string_view gold) {
    return render_template(prompts::builtin("judge_finqa"),
                           {{"candidate_answer", std::string(candidate)},
                            {"correct_answer", std::string(gold)}});
}

std::string render_ccc_judge_prompt(std::string_view candidate, std::string_view gold) {
    return render_template(prompts::builtin("judge_ccc"),
                           {{"candidate_answer", std::string(candidate)},
                            {"correct_answer", std::string(gold)}});
}

std::optional<int> parse_finqa_verdict(std::string_view reply) {
    auto found = rewards::find_last_boxed(reply);
    const auto* m = std::get_if<rewards::BoxedMatch>(&found);
    if (!m) return std::nullopt;
    std::string_view content = text::trim(m->content);
    while (content.size() >= 2 && content.front() == '{' && content.back() == '}') {
        content = text::trim(content.substr(1, content.size() - 2));
    }
    if (content == "1") return 1;
    if (content == "0") return 0;
    return std::nullopt;
}

namespace {

std::optional<int> binary_value(const nlohmann::json& v) {
    if (v.is_number_integer() || v.is_number_unsigned()) {
        const auto n = v.get<long long>();
        if (n == 0 || n == 1) return static_cast<int>(n);
    } else if (v.is_number_float()) {
        const auto d = v.get<double>();
        if (d == 0.0 || d == 1.0) return static_cast<int>(d);
    } else if (v.is_string()) {
        const auto s = text::trim(v.get_ref<const std::string&>());
        if (s == "0" || s == "1") return s == "1" ? 1 : 0;
    }
    return std::nullopt;
}

template <typename Parser>
JudgeScore run_judge(const std::string& prompt, const gateway::Endpoint& judge,
                     const gateway::RetryPolicy& policy, Parser parse) {
    policy.validate();
    JudgeScore result;
    for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
        try {
            const auto response = judge.ask(prompt);
            result.calls += response.attempts;
            result.transcript.push_back(response.text);
            if (auto verdict = parse(response.text)) {
                result.score = *verdict;
                return result;
            }
        } catch (const gateway::ProviderError& e) {
            result.calls += e.attempts();
            break;
        }
    }
    result.flagged = true;
    result.score = 0;
    return result;
}

}  // namespace

std::optional<int> parse_ccc_verdict(std::string_view reply) {
    auto obj = find_json_object(reply, [](const nlohmann::json& j) {
        return j.contains("answer") && binary_value(j["answer"]).has_value();
    });
    if (!obj) return std::nullopt;
    return binary_value((*obj)["answer"]);
}

JudgeScore judge_score_finqa(std::string_view candidate, std::string_view gold,
                             const gateway::Endpoint& judge, const gateway::RetryPolicy& policy) {
    return run_judge(render_finqa_judge_prompt(candidate, gold), judge, policy,
                     [](std::string_view r) { return parse_finqa_verdict(r); });
}

JudgeScore judge_score_ccc(std::string_view candidate, std::string_view gold,
                           const gateway::Endpoint& judge, const gateway::RetryPolicy& policy) {
    return run_judge(render_ccc_judge_prompt(candidate, gold), judge, policy,
                     [](std::string_view r) { return parse_ccc_verdict(r); });
}

std::optional<std::size_t> official_size(std::string_view name) {
    static const std::pair<std::string_view, std::size_t> kSizes[] = {
        {"CFLUE", 3864}, {"FINQA", 1147}, {"CCC", 200}, {"MATH-500", 500}, {"GPQA-DIAMOND", 198}};
    const auto upper = text::to_upper_ascii(name);
    for (const auto& [key, size] : kSizes) {
        if (upper == key) return size;
    }
    return std::nullopt;
}

MissingPrediction::MissingPrediction(std::vector<std::string> ids)
    : Error([&] {
          std::string msg = "missing predictions for " + std::to_string(ids.size()) + " item(s):";
          for (std::size_t i = 0; i < ids.size() && i < 20; ++i) msg += " " + ids[i];
          if (ids.size() > 20) msg += " ...";
          return msg;
      }()),
      ids_(std::move(ids)) {}

double macro_average(std::span<const double> accuracies) {
    if (accuracies.empty()) return 0.0;
    double sum = 0.0;
    for (double a : accuracies) sum += a;
    return sum / static_cast<double>(accuracies.size());
}

double round_2dp(double value) {
    const double scaled = value * 100.0;
    const double nudge = 1e-9 * std::max(1.0, std::fabs(scaled));
    const double rounded = scaled >= 0 ? std::floor(scaled + 0.5 + nudge)
                                       : -std::floor(-scaled + 0.5 + nudge);
    return rounded / 100.0;
}

namespace {

std::string fixed_2dp(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", round_2dp(v));
    return buf;
}

struct Job {
    std::size_t set;
    std::size_t item;
    const Prediction* prediction;
};

}  // namespace

nlohmann::json EvalReport::to_json() const {
    nlohmann::json out_sets = nlohmann::json::array();
    for (const auto& s : sets) {
        nlohmann::json verdicts = nlohmann::json::array();
        for (const auto& v : s.verdicts) {
            verdicts.push_back(
                {{"id", v.id}, {"score", v.score}, {"flagged", v.flagged}, {"extracted", v.extracted}});
        }
        out_sets.push_back({{"name", s.name},
                            {"size", s.size},
                            {"correct", s.correct},
                            {"accuracy", round_2dp(s.accuracy)},
                            {"accuracy_raw", s.accuracy},
                            {"judge_calls", s.judge_calls},
                            {"verdicts", verdicts}});
    }
    return {{"sets", out_sets},
            {"average", round_2dp(average)},
            {"average_raw", average},
            {"judge_calls", judge_calls}};
}

std::string EvalReport::to_markdown(std::string_view model_name) const {
    std::ostringstream out;
    out << "| Model |";
    for (const auto& s : sets) out << ' ' << s.name << " |";
    out << " Avg |\n|---|";
    for (std::size_t i = 0; i < sets.size(); ++i) out << "---|";
    out << "---|\n| " << model_name << " |";
    for (const auto& s : sets) out << ' ' << fixed_2dp(s.accuracy) << " |";
    out << ' ' << fixed_2dp(average) << " |\n";
    return out.str();
}

EvalReport evaluate(const std::vector<TestSet>& testsets, const std::vector<Prediction>& predictions,
                    const std::optional<gateway::Endpoint>& judge, const EvalOptions& options) {
    if (options.concurrency < 1) throw ConfigError("concurrency must be >= 1");

    std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> index;
    std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> by_id;
    for (std::size_t s = 0; s < testsets.size(); ++s) {
        const auto& set = testsets[s];
        if (options.enforce_official_sizes) {
            if (auto expected = official_size(set.name); expected && *expected != set.items.size()) {
                throw DataError("test set " + set.name + " has " + std::to_string(set.items.size()) +
                                " items, official split has " + std::to_string(*expected));
            }
        }
        for (std::size_t i = 0; i < set.items.size(); ++i) {
            const auto& item = set.items[i];
            const auto kind = item.kind.value_or(set.kind);
            if (is_judge_kind(kind) && !judge) {
                throw ConfigError("test set " + set.name + " needs a judge model");
            }
            if (!index.emplace(std::pair{set.name, item.id}, std::pair{s, i}).second) {
                throw DataError("test set " + set.name + " repeats item id '" + item.id + "'");
            }
            by_id[item.id].emplace_back(s, i);
        }
    }

    std::vector<std::vector<const Prediction*>> matched(testsets.size());
    for (std::size_t s = 0; s < testsets.size(); ++s) matched[s].assign(testsets[s].items.size(), nullptr);
    for (const auto& p : predictions) {
        std::pair<std::size_t, std::size_t> slot;
        if (!p.set.empty()) {
            auto it = index.find({p.set, p.id});
            if (it == index.end()) {
                throw DataError("prediction '" + p.set + "/" + p.id + "' matches no test item");
            }
            slot = it->second;
        } else {
            auto it = by_id.find(p.id);
            if (it == by_id.end()) throw DataError("prediction '" + p.id + "' matches no test item");
            if (it->second.size() > 1) {
                throw DataError("prediction '" + p.id + "' is ambiguous across test sets; give its set");
            }
            slot = it->second.front();
        }
        auto& cell = matched[slot.first][slot.second];
        if (cell) throw DataError("duplicate prediction for '" + p.id + "'");
        cell = &p;
    }

    std::vector<std::string> missing;
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < testsets.size(); ++s) {
        for (std::size_t i = 0; i < testsets[s].items.size(); ++i) {
            if (!matched[s][i]) {
                missing.push_back(testsets[s].name + "/" + testsets[s].items[i].id);
            } else {
                jobs.push_back({s, i, matched[s][i]});
            }
        }
    }
    if (!missing.empty()) throw MissingPrediction(std::move(missing));

    EvalReport report;
    report.sets.resize(testsets.size());
    for (std::size_t s = 0; s < testsets.size(); ++s) {
        report.sets[s].name = testsets[s].name;
        report.sets[s].size = testsets[s].items.size();
        report.sets[s].verdicts.resize(testsets[s].items.size());
    }
    std::vector<int> calls(jobs.size(), 0);

    parallel_for(jobs.size(), options.concurrency, [&](std::size_t j) {
        const auto& job = jobs[j];
        const auto& item = testsets[job.set].items[job.item];
        const auto kind = item.kind.value_or(testsets[job.set].kind);
        auto& verdict = report.sets[job.set].verdicts[job.item];
        verdict.id = item.id;
        if (!is_judge_kind(kind)) {
            const auto rule = rule_based_score(*job.prediction, item.gold, kind);
            verdict.score = rule.score;
            verdict.flagged = rule.extraction_failed;
            verdict.extracted = rule.extracted;
            return;
        }
        const auto extracted = answers::extract_final_answer(job.prediction->output);
        const std::string candidate =
            extracted ? *extracted : std::string(text::trim(job.prediction->output));
        const auto score = kind == ScoreKind::judge_finqa
                               ? judge_score_finqa(candidate, item.gold, *judge, options.judge_policy)
                               : judge_score_ccc(candidate, item.gold, *judge, options.judge_policy);
        verdict.score = score.score;
        verdict.flagged = score.flagged;
        verdict.extracted = candidate;
        calls[j] = score.calls;
    });

    for (std::size_t j = 0; j < jobs.size(); ++j) {
        report.sets[jobs[j].set].judge_calls += static_cast<std::size_t>(calls[j]);
    }
    std::vector<double> accuracies;
    for (auto& set : report.sets) {
        for (const auto& v : set.verdicts) set.correct += static_cast<std::size_t>(v.score);
        set.accuracy = set.size ? 100.0 * static_cast<double>(set.correct) / static_cast<double>(set.size)
                                : 0.0;
        accuracies.push_back(set.accuracy);
        report.judge_calls += set.judge_calls;
    }
    report.average = macro_average(accuracies);
    return report;
}

void to_json(nlohmann::json& j, const Prediction& p) {
    j = {{"id", p.id}, {"output", p.output}};
    if (!p.set.empty()) j["set"] = p.set;
}

void from_json(const nlohmann::json& j, Prediction& p) {
    p = Prediction{};
    p.id = j.at("id").get<std::string>();
    p.output = j.at("output").get<std::string>();
    p.set = j.value("set", std::string());
}

void from_json(const nlohmann::json& j, TestItem& t) {
    t = TestItem{};
    t.id = j.at("id").get<std::string>();
    if (j.contains("gold")) {
        t.gold = j["gold"].is_string() ? j["gold"].get<std::string>() : j["gold"].dump();
    } else {
        t.gold = j.at("answer").get<std::string>();
    }
    if (j.contains("kind")) t.kind = parse_score_kind(j["kind"].get<std::string>());
}

}  // namespace finreason::eval
