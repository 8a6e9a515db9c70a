#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "finreason/samples.hpp"

namespace finreason::sft {

class EmptyField : public Error {
public:
    using Error::Error;
};

class TagCollision : public Error {
public:
    using Error::Error;
};

struct SftInstance {
    std::string id;
    std::string input;   // x
    std::string target;  // <think>r</think><answer>y</answer>
    std::string source;
    std::string language;

    friend bool operator==(const SftInstance&, const SftInstance&) = default;
};

/// Throws EmptyField on blank x, r or y and TagCollision when r or y contain a
/// literal think/answer tag.
SftInstance to_sft_instance(const ReasoningSample& sample);

/// Fisher-Yates driven by mt19937_64 with rejection sampling, so the order
/// depends only on the seed and never on the standard library vendor.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto below = [&rng](std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x = rng();
        while (x >= limit) x = rng();
        return x % bound;
    };
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[below(i)]);
    }
}

using NamedCorpus = std::pair<std::string, std::vector<SftInstance>>;

/// Concatenates the corpora in order, then applies seeded_shuffle.
std::vector<SftInstance> build_mixture(const std::vector<NamedCorpus>& corpora, std::uint64_t seed);

struct StatsRecord {
    std::string_view question;
    std::string_view reasoning;
    std::string_view answer;
};

struct CorpusStats {
    std::size_t size = 0;
    double q_tokens = 0.0;
    double r_tokens = 0.0;
    double a_tokens = 0.0;

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

/// Mean token counts, rounded half-up to two decimals.
CorpusStats corpus_stats(std::span<const StatsRecord> records);
CorpusStats corpus_stats(const std::vector<SftInstance>& instances);

/// Exact half-up rounding of sum/count to two decimals.
double mean_2dp(std::uint64_t sum, std::uint64_t count);

struct StatsRow {
    std::string dataset;
    std::string language;
    CorpusStats stats;
};

/// One row per source in first-seen order, shaped like the dataset overview
/// table (Dataset, Language, Size, Q/R/A token means).
std::vector<StatsRow> stats_by_source(const std::vector<SftInstance>& instances);
nlohmann::json stats_document(const std::vector<StatsRow>& rows);

void to_json(nlohmann::json& j, const SftInstance& s);
void from_json(const nlohmann::json& j, SftInstance& s);
void to_json(nlohmann::json& j, const CorpusStats& s);

}  // namespace finreason::sft
