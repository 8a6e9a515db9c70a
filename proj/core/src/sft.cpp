#include "finreason/sft.hpp"

#include <set>

#include "finreason/filters.hpp"
#include "finreason/rewards.hpp"
#include "finreason/text.hpp"

namespace finreason::sft {

namespace {

bool has_tag(std::string_view s) {
    for (auto tag : {rewards::kThinkOpen, rewards::kThinkClose, rewards::kAnswerOpen,
                     rewards::kAnswerClose}) {
        if (s.find(tag) != std::string_view::npos) return true;
    }
    return false;
}

}  // namespace

SftInstance to_sft_instance(const ReasoningSample& sample) {
    if (text::is_blank(sample.input)) throw EmptyField("sample '" + sample.id + "' has empty input");
    if (text::is_blank(sample.reasoning)) {
        throw EmptyField("sample '" + sample.id + "' has empty reasoning");
    }
    if (text::is_blank(sample.answer)) throw EmptyField("sample '" + sample.id + "' has empty answer");
    if (has_tag(sample.reasoning)) {
        throw TagCollision("sample '" + sample.id + "' reasoning contains a literal tag");
    }
    if (has_tag(sample.answer)) {
        throw TagCollision("sample '" + sample.id + "' answer contains a literal tag");
    }
    SftInstance inst;
    inst.id = sample.id;
    inst.input = sample.input;
    inst.target = rewards::StructuredOutput{sample.reasoning, sample.answer}.render();
    inst.source = to_string(sample.source);
    inst.language = to_string(sample.language);
    return inst;
}

std::vector<SftInstance> build_mixture(const std::vector<NamedCorpus>& corpora, std::uint64_t seed) {
    std::vector<SftInstance> out;
    for (const auto& [name, items] : corpora) {
        for (auto inst : items) {
            if (inst.source.empty()) inst.source = name;
            out.push_back(std::move(inst));
        }
    }
    seeded_shuffle(out, seed);
    return out;
}

double mean_2dp(std::uint64_t sum, std::uint64_t count) {
    if (count == 0) return 0.0;
    const std::uint64_t cents = (sum * 200 + count) / (2 * count);
    return static_cast<double>(cents) / 100.0;
}

CorpusStats corpus_stats(std::span<const StatsRecord> records) {
    std::uint64_t q = 0;
    std::uint64_t r = 0;
    std::uint64_t a = 0;
    for (const auto& rec : records) {
        q += filters::count_tokens(rec.question);
        r += filters::count_tokens(rec.reasoning);
        a += filters::count_tokens(rec.answer);
    }
    const auto n = static_cast<std::uint64_t>(records.size());
    return {records.size(), mean_2dp(q, n), mean_2dp(r, n), mean_2dp(a, n)};
}

namespace {

std::vector<rewards::StructuredOutput> split_targets(const std::vector<SftInstance>& instances) {
    std::vector<rewards::StructuredOutput> parts;
    parts.reserve(instances.size());
    for (const auto& inst : instances) {
        auto parsed = rewards::parse_structured(inst.target);
        if (auto* err = std::get_if<rewards::ParseError>(&parsed)) {
            throw DataError("instance '" + inst.id + "' target does not parse (" +
                            std::string(rewards::to_string(*err)) + ")");
        }
        parts.push_back(std::get<rewards::StructuredOutput>(std::move(parsed)));
    }
    return parts;
}

}  // namespace

CorpusStats corpus_stats(const std::vector<SftInstance>& instances) {
    const auto parts = split_targets(instances);
    std::vector<StatsRecord> records;
    records.reserve(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        records.push_back({instances[i].input, parts[i].think, parts[i].answer});
    }
    return corpus_stats(records);
}

std::vector<StatsRow> stats_by_source(const std::vector<SftInstance>& instances) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<SftInstance>> groups;
    for (const auto& inst : instances) {
        auto [it, inserted] = groups.try_emplace(inst.source);
        if (inserted) order.push_back(inst.source);
        it->second.push_back(inst);
    }
    std::vector<StatsRow> rows;
    for (const auto& source : order) {
        const auto& group = groups[source];
        std::set<std::string> languages;
        for (const auto& inst : group) languages.insert(inst.language);
        std::string language;
        for (const auto& l : languages) language += (language.empty() ? "" : "+") + l;
        rows.push_back({source, language, corpus_stats(group)});
    }
    return rows;
}

nlohmann::json stats_document(const std::vector<StatsRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json j = row.stats;
        j["dataset"] = row.dataset;
        j["language"] = row.language;
        out.push_back(std::move(j));
    }
    return {{"columns", {"dataset", "language", "size", "q_tokens", "r_tokens", "a_tokens"}},
            {"rows", out}};
}

void to_json(nlohmann::json& j, const SftInstance& s) {
    j = {{"id", s.id}, {"input", s.input}, {"target", s.target}, {"source", s.source}};
    if (!s.language.empty()) j["language"] = s.language;
}

void from_json(const nlohmann::json& j, SftInstance& s) {
    s = SftInstance{};
    s.id = j.value("id", std::string());
    s.input = j.at("input").get<std::string>();
    s.target = j.at("target").get<std::string>();
    s.source = j.value("source", std::string());
    s.language = j.value("language", std::string());
}

void to_json(nlohmann::json& j, const CorpusStats& s) {
    j = {{"size", s.size}, {"q_tokens", s.q_tokens}, {"r_tokens", s.r_tokens}, {"a_tokens", s.a_tokens}};
}

}  // namespace finreason::sft
