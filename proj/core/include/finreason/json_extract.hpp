#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace finreason {

/// Every top-level JSON object embedded in free text, in order of appearance.
/// Surrounding prose and markdown code fences are skipped; candidate spans
/// that fail to parse are ignored.
std::vector<nlohmann::json> find_json_objects(std::string_view text);

/// First embedded object for which `accept` returns true.
template <typename Pred>
std::optional<nlohmann::json> find_json_object(std::string_view text, Pred accept) {
    for (auto& obj : find_json_objects(text)) {
        if (accept(obj)) return std::move(obj);
    }
    return std::nullopt;
}

}  // namespace finreason
