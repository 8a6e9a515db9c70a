#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "finreason/errors.hpp"

namespace finreason {

class TemplateError : public Error {
public:
    using Error::Error;
};

using TemplateValues = std::map<std::string, std::string, std::less<>>;

/// Renders `{name}` placeholders; `{{` and `}}` are literal braces. Unknown
/// or unterminated placeholders throw TemplateError.
std::string render_template(std::string_view tmpl, const TemplateValues& values);

/// Placeholder names referenced by a template, in first-use order.
std::vector<std::string> template_placeholders(std::string_view tmpl);

namespace prompts {

/// Built-in prompt template by file stem (e.g. "judge_finqa").
std::string_view builtin(std::string_view name);
std::vector<std::string_view> builtin_names();

}  // namespace prompts
}  // namespace finreason
