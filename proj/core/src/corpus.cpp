#include "finreason/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "finreason/answers.hpp"
#include "finreason/text.hpp"

namespace finreason {

std::string_view to_string(Language language) {
    return language == Language::zh ? "zh" : "en";
}

std::string_view to_string(Source source) {
    switch (source) {
        case Source::cflue_mcq: return "CFLUE_MCQ";
        case Source::cflue_oe: return "CFLUE_OE";
        case Source::finqa: return "FinQA";
        case Source::ccc: return "CCC";
        case Source::other: return "other";
    }
    return "other";
}

Language parse_language(std::string_view name) {
    if (name == "zh") return Language::zh;
    if (name == "en") return Language::en;
    throw DataError("unknown language: " + std::string(name));
}

Source parse_source(std::string_view name) {
    if (name == "CFLUE_MCQ") return Source::cflue_mcq;
    if (name == "CFLUE_OE") return Source::cflue_oe;
    if (name == "FinQA") return Source::finqa;
    if (name == "CCC") return Source::ccc;
    if (name == "other") return Source::other;
    throw DataError("unknown source: " + std::string(name));
}

bool Question::is_multi_answer() const {
    const auto letters = answers::mcq_letter_set(gold_answer);
    return letters && letters->size() > 1;
}

std::string Question::render_options() const {
    std::string out;
    for (const auto& c : choices) {
        if (!out.empty()) out.push_back('\n');
        out += c.label + ". " + c.text;
    }
    return out;
}

void Question::validate() const {
    if (id.empty()) throw DataError("question without id");
    if (text::is_blank(gold_answer)) throw DataError("question " + id + " has no gold answer");
    if (!is_mcq()) return;
    std::set<std::string> labels;
    for (const auto& c : choices) {
        if (c.label.empty()) throw DataError("question " + id + " has an unlabeled choice");
        if (!labels.insert(text::to_upper_ascii(c.label)).second) {
            throw DataError("question " + id + " repeats choice label " + c.label);
        }
    }
    const auto gold = answers::mcq_letter_set(gold_answer);
    if (!gold || gold->empty()) {
        throw DataError("question " + id + ": MCQ gold must be choice letters, got '" +
                        gold_answer + "'");
    }
    for (char letter : *gold) {
        if (!labels.contains(std::string(1, letter))) {
            throw DataError("question " + id + ": gold label " + std::string(1, letter) +
                            " is not among the choices");
        }
    }
}

void to_json(nlohmann::json& j, const Question& q) {
    j = nlohmann::json{{"id", q.id}, {"body", q.body}, {"gold_answer", q.gold_answer}};
    if (q.is_mcq()) {
        auto choices = nlohmann::json::array();
        for (const auto& c : q.choices) choices.push_back({{"label", c.label}, {"text", c.text}});
        j["choices"] = std::move(choices);
    }
    if (q.explanation) j["explanation"] = *q.explanation;
    if (q.context) j["context"] = *q.context;
    j["language"] = to_string(q.language);
    j["source"] = to_string(q.source);
}

void from_json(const nlohmann::json& j, Question& q) {
    q = Question{};
    q.id = j.at("id").get<std::string>();
    q.body = j.at("body").get<std::string>();
    q.gold_answer = j.at("gold_answer").get<std::string>();
    if (auto it = j.find("choices"); it != j.end() && !it->is_null()) {
        for (const auto& c : *it) {
            q.choices.push_back({c.at("label").get<std::string>(), c.at("text").get<std::string>()});
        }
    }
    if (auto it = j.find("explanation"); it != j.end() && it->is_string()) {
        q.explanation = it->get<std::string>();
    }
    if (auto it = j.find("context"); it != j.end() && it->is_string()) {
        q.context = it->get<std::string>();
    }
    q.language = parse_language(j.value("language", std::string{"zh"}));
    q.source = parse_source(j.value("source", std::string{"other"}));
}

std::vector<JsonlRow> parse_jsonl_rows(std::string_view content) {
    std::vector<JsonlRow> rows;
    std::size_t line_no = 0;
    for (auto line : text::split_lines(content)) {
        ++line_no;
        if (text::is_blank(line)) continue;
        auto value = nlohmann::json::parse(line, nullptr, false);
        if (value.is_discarded()) {
            throw DataError("line " + std::to_string(line_no) + ": invalid JSON");
        }
        rows.push_back({line_no, std::move(value)});
    }
    return rows;
}

std::vector<nlohmann::json> parse_jsonl(std::string_view content) {
    std::vector<nlohmann::json> values;
    for (auto& row : parse_jsonl_rows(content)) values.push_back(std::move(row.value));
    return values;
}

std::vector<JsonlRow> read_jsonl_rows(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_jsonl_rows(buffer.str());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
    std::vector<nlohmann::json> values;
    for (auto& row : read_jsonl_rows(path)) values.push_back(std::move(row.value));
    return values;
}

std::string dump_line(const nlohmann::json& value) {
    return value.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    for (const auto& row : rows) out << dump_line(row) << '\n';
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << doc.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw DataError(path.string() + ": invalid JSON");
    return doc;
}

std::vector<Question> load_questions(const std::filesystem::path& path) {
    return load_records<Question>(path, [](const Question& q) { q.validate(); });
}

}  // namespace finreason
