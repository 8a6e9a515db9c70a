#include "finreason/json_extract.hpp"

namespace finreason {
namespace {

// End (one past) of the balanced {...} span starting at `open`, honouring
// JSON string literals; npos if the braces never balance.
std::size_t balanced_end(std::string_view text, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

}  // namespace

std::vector<nlohmann::json> find_json_objects(std::string_view text) {
    std::vector<nlohmann::json> found;
    std::size_t pos = text.find('{');
    while (pos != std::string_view::npos) {
        const auto end = balanced_end(text, pos);
        if (end != std::string_view::npos) {
            auto parsed = nlohmann::json::parse(text.substr(pos, end - pos), nullptr, false);
            if (!parsed.is_discarded() && parsed.is_object()) {
                found.push_back(std::move(parsed));
                pos = text.find('{', end);
                continue;
            }
        }
        pos = text.find('{', pos + 1);
    }
    return found;
}

}  // namespace finreason
