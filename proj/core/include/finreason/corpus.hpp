#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "finreason/errors.hpp"

namespace finreason {

enum class Language { zh, en };
enum class Source { cflue_mcq, cflue_oe, finqa, ccc, other };

std::string_view to_string(Language language);
std::string_view to_string(Source source);
Language parse_language(std::string_view name);
Source parse_source(std::string_view name);

struct Choice {
    std::string label;
    std::string text;

    friend bool operator==(const Choice&, const Choice&) = default;
};

/// One QA item. Multiple-choice iff `choices` is non-empty, in which case
/// gold_answer is a string of choice labels such as "B" or "ABD".
struct Question {
    std::string id;
    std::string body;
    std::vector<Choice> choices;
    std::string gold_answer;
    std::optional<std::string> explanation;
    std::optional<std::string> context;  // FinQA-style supporting passage
    Language language = Language::zh;
    Source source = Source::other;

    bool is_mcq() const noexcept { return !choices.empty(); }
    bool is_multi_answer() const;

    /// "A. text" lines joined by newlines.
    std::string render_options() const;

    /// Throws DataError when the MCQ/gold invariants do not hold.
    void validate() const;

    friend bool operator==(const Question&, const Question&) = default;
};

void to_json(nlohmann::json& j, const Question& q);
void from_json(const nlohmann::json& j, Question& q);

struct JsonlRow {
    std::size_t line = 0;  // 1-based
    nlohmann::json value;
};

/// Reads one JSON value per non-blank line. Throws DataError naming the
/// 1-based line number on malformed input.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
std::vector<nlohmann::json> parse_jsonl(std::string_view content);
std::vector<JsonlRow> read_jsonl_rows(const std::filesystem::path& path);
std::vector<JsonlRow> parse_jsonl_rows(std::string_view content);

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

/// Compact single-line dump with UTF-8 passed through.
std::string dump_line(const nlohmann::json& value);

template <typename T>
std::vector<T> records_from(const std::vector<nlohmann::json>& rows) {
    std::vector<T> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        try {
            out.push_back(rows[i].get<T>());
        } catch (const nlohmann::json::exception& e) {
            throw DataError("record " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

template <typename T>
std::vector<nlohmann::json> rows_from(const std::vector<T>& records) {
    std::vector<nlohmann::json> out;
    out.reserve(records.size());
    for (const auto& r : records) out.emplace_back(r);
    return out;
}

/// Decodes every row of a JSONL file as T, then runs `check` on it. Errors
/// become DataError naming the file and line.
template <typename T, typename Check>
std::vector<T> load_records(const std::filesystem::path& path, Check check) {
    std::vector<T> out;
    for (const auto& row : read_jsonl_rows(path)) {
        try {
            auto record = row.value.template get<T>();
            check(record);
            out.push_back(std::move(record));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + ": line " + std::to_string(row.line) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(path.string() + ": line " + std::to_string(row.line) + ": " + e.what());
        }
    }
    return out;
}

template <typename T>
std::vector<T> load_records(const std::filesystem::path& path) {
    return load_records<T>(path, [](const T&) {});
}

std::vector<Question> load_questions(const std::filesystem::path& path);

}  // namespace finreason
