#include "finreason/template.hpp"

#include <algorithm>

namespace finreason {
namespace {

// Visits the template: literal text via on_text, placeholder names via on_name.
template <typename OnText, typename OnName>
void scan(std::string_view tmpl, OnText on_text, OnName on_name) {
    std::size_t i = 0;
    while (i < tmpl.size()) {
        const char c = tmpl[i];
        if (c == '{') {
            if (i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
                on_text(std::string_view("{"));
                i += 2;
                continue;
            }
            const auto close = tmpl.find('}', i + 1);
            if (close == std::string_view::npos) {
                throw TemplateError("unterminated placeholder at offset " + std::to_string(i));
            }
            const auto name = tmpl.substr(i + 1, close - i - 1);
            if (name.empty() || name.find('{') != std::string_view::npos) {
                throw TemplateError("malformed placeholder at offset " + std::to_string(i));
            }
            on_name(name);
            i = close + 1;
        } else if (c == '}') {
            if (i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
                on_text(std::string_view("}"));
                i += 2;
                continue;
            }
            throw TemplateError("stray '}' at offset " + std::to_string(i));
        } else {
            const auto next = tmpl.find_first_of("{}", i);
            const auto end = next == std::string_view::npos ? tmpl.size() : next;
            on_text(tmpl.substr(i, end - i));
            i = end;
        }
    }
}

}  // namespace

std::string render_template(std::string_view tmpl, const TemplateValues& values) {
    std::string out;
    out.reserve(tmpl.size());
    scan(
        tmpl, [&](std::string_view text) { out.append(text); },
        [&](std::string_view name) {
            const auto it = values.find(name);
            if (it == values.end()) {
                throw TemplateError("no value for placeholder {" + std::string(name) + "}");
            }
            out.append(it->second);
        });
    return out;
}

std::vector<std::string> template_placeholders(std::string_view tmpl) {
    std::vector<std::string> names;
    scan(
        tmpl, [](std::string_view) {},
        [&](std::string_view name) {
            if (std::find(names.begin(), names.end(), name) == names.end()) {
                names.emplace_back(name);
            }
        });
    return names;
}

}  // namespace finreason
