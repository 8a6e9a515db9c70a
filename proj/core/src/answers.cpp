#include "finreason/answers.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "finreason/rewards.hpp"
#include "finreason/text.hpp"

namespace finreason::answers {
namespace {

constexpr std::string_view kSeparators[] = {" ", ",", ";", "/", "\t", "、", "，", "；"};

std::string strip_spaces(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c != ' ' && c != '\t' && c != '\n' && c != '\r') out.push_back(c);
    }
    return out;
}

}  // namespace

std::optional<std::string> mcq_letter_set(std::string_view s) {
    s = text::trim(s);
    std::string letters;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z')) {
            letters.push_back(static_cast<char>(c >= 'a' ? c - 'a' + 'A' : c));
            ++i;
            continue;
        }
        bool matched = false;
        for (auto sep : kSeparators) {
            if (s.substr(i).starts_with(sep)) {
                i += sep.size();
                matched = true;
                break;
            }
        }
        if (!matched) return std::nullopt;
    }
    if (letters.empty()) return std::nullopt;
    std::sort(letters.begin(), letters.end());
    letters.erase(std::unique(letters.begin(), letters.end()), letters.end());
    return letters;
}

std::string canonicalize(std::string_view s) {
    if (auto letters = mcq_letter_set(s)) return *letters;
    return text::to_upper_ascii(text::trim(s));
}

bool mcq_equal(std::string_view a, std::string_view b) {
    const auto la = mcq_letter_set(a);
    const auto lb = mcq_letter_set(b);
    return la && lb && *la == *lb;
}

std::optional<double> parse_number(std::string_view s) {
    s = text::trim(s);
    if (s.size() >= 2 && s.front() == '$' && s.back() == '$') s = text::trim(s.substr(1, s.size() - 2));
    std::string cleaned;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == ',' ) continue;
        if (c == '$' && cleaned.empty()) continue;
        cleaned.push_back(c);
    }
    if (cleaned.empty()) return std::nullopt;
    if (cleaned.front() == '+') cleaned.erase(0, 1);
    double value = 0.0;
    const auto* first = cleaned.data();
    const auto* last = cleaned.data() + cleaned.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
    return value;
}

bool numeric_equal(std::string_view a, std::string_view b) {
    const auto na = parse_number(a);
    const auto nb = parse_number(b);
    if (na && nb) {
        const double scale = std::max({1.0, std::fabs(*na), std::fabs(*nb)});
        return std::fabs(*na - *nb) <= 1e-9 * scale;
    }
    return strip_spaces(a) == strip_spaces(b);
}

std::optional<std::string> extract_final_answer(std::string_view output) {
    const auto open = output.rfind(rewards::kAnswerOpen);
    if (open != std::string_view::npos) {
        const auto start = open + rewards::kAnswerOpen.size();
        const auto close = output.find(rewards::kAnswerClose, start);
        if (close != std::string_view::npos) {
            const auto inner = output.substr(start, close - start);
            auto boxed = rewards::find_last_boxed(inner);
            if (auto* m = std::get_if<rewards::BoxedMatch>(&boxed)) return m->content;
            const auto trimmed = text::trim(inner);
            if (!trimmed.empty()) return std::string(trimmed);
        }
    }
    auto boxed = rewards::find_last_boxed(output);
    if (auto* m = std::get_if<rewards::BoxedMatch>(&boxed)) return m->content;
    return std::nullopt;
}

}  // namespace finreason::answers
