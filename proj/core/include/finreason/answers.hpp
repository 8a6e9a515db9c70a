#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace finreason::answers {

/// Sorted, de-duplicated uppercase letters when `s` consists only of ASCII
/// letters and list separators (space, comma, 、, ，, ;, /); nullopt otherwise.
std::optional<std::string> mcq_letter_set(std::string_view s);

/// Trim, uppercase, and sort MCQ letters: "bd", "DB" and " B D" all map to "BD".
/// Non-letter answers come back trimmed and uppercased.
std::string canonicalize(std::string_view s);

/// Letter-set equality; false unless both sides are letter sets.
bool mcq_equal(std::string_view a, std::string_view b);

/// Parses "1,234.5", "$3", " -0.25 ". Percent signs are not stripped.
std::optional<double> parse_number(std::string_view s);

/// Numeric equality (relative 1e-9) when both parse as numbers, otherwise
/// whitespace-insensitive string equality.
bool numeric_equal(std::string_view a, std::string_view b);

/// `<answer>` content if a tag pair is present, otherwise the last boxed{}
/// expression. An `<answer>` span that itself holds boxed{} yields the boxed
/// content.
std::optional<std::string> extract_final_answer(std::string_view output);

}  // namespace finreason::answers
