#include <catch2/catch_amalgamated.hpp>

#include "finreason/answers.hpp"
#include "finreason/json_extract.hpp"
#include "finreason/template.hpp"
#include "finreason/text.hpp"

using namespace finreason;

TEST_CASE("trim and blank checks", "[text]") {
    CHECK(text::trim("  a b \n") == "a b");
    CHECK(text::trim("") == "");
    CHECK(text::is_blank(" \t\n"));
    CHECK_FALSE(text::is_blank(" x "));
}

TEST_CASE("utf-8 decoding", "[text]") {
    const std::string s = "a资";
    CHECK(text::decode_utf8(s, 0).value == U'a');
    const auto cp = text::decode_utf8(s, 1);
    CHECK(cp.value == U'资');
    CHECK(cp.length == 3);
    const std::string broken = "\xE8\xB5";
    CHECK(text::decode_utf8(broken, 0).value == 0xFFFD);
    CHECK(text::decode_utf8(broken, 0).length == 1);
}

TEST_CASE("cjk and space classes", "[text]") {
    CHECK(text::is_cjk(U'资'));
    CHECK(text::is_cjk(U'，'));
    CHECK(text::is_cjk(U'。'));
    CHECK_FALSE(text::is_cjk(U'a'));
    CHECK_FALSE(text::is_cjk(0x3000));
    CHECK(text::is_space(0x3000));
}

TEST_CASE("template rendering", "[text]") {
    CHECK(render_template("x={a}, y={b}", {{"a", "1"}, {"b", "2"}}) == "x=1, y=2");
    CHECK(render_template("{{literal}} {a}", {{"a", "v"}}) == "{literal} v");
    CHECK(render_template("{a}", {{"a", "{b}"}}) == "{b}");
    CHECK_THROWS_AS(render_template("{missing}", {}), TemplateError);
    CHECK_THROWS_AS(render_template("{open", {{"open", "x"}}), TemplateError);
    CHECK(template_placeholders("{b} {a} {b} {{c}}") == std::vector<std::string>{"b", "a"});
}

TEST_CASE("every builtin prompt renders with its own placeholders", "[text]") {
    for (auto name : prompts::builtin_names()) {
        const auto tmpl = prompts::builtin(name);
        TemplateValues values;
        for (const auto& p : template_placeholders(tmpl)) values[p] = "<" + p + ">";
        CHECK_NOTHROW(render_template(tmpl, values));
    }
    CHECK_THROWS(prompts::builtin("no_such_prompt"));
}

TEST_CASE("json objects embedded in prose", "[text]") {
    auto objs = find_json_objects("before {\"a\": 1} middle ```json\n{\"b\": {\"c\": 2}}\n``` after");
    REQUIRE(objs.size() == 2);
    CHECK(objs[0]["a"] == 1);
    CHECK(objs[1]["b"]["c"] == 2);
    CHECK(find_json_objects("{not json} and {\"s\": \"}\"}").size() == 1);
    CHECK(find_json_objects("no braces").empty());
    auto hit = find_json_object("{\"x\":1} {\"y\":2}", [](const nlohmann::json& j) { return j.contains("y"); });
    REQUIRE(hit);
    CHECK((*hit)["y"] == 2);
}

TEST_CASE("mcq letter canonicalization", "[text]") {
    CHECK(answers::canonicalize("db") == "BD");
    CHECK(answers::canonicalize(" B D ") == "BD");
    CHECK(answers::mcq_letter_set("A、C") == "AC");
    CHECK(answers::mcq_letter_set("A,a") == "A");
    CHECK_FALSE(answers::mcq_letter_set("12%").has_value());
    CHECK_FALSE(answers::mcq_letter_set("").has_value());
    CHECK(answers::mcq_equal("ADB", "ABD"));
    CHECK_FALSE(answers::mcq_equal("AB", "ABD"));
    CHECK_FALSE(answers::mcq_equal("7", "7"));
}

TEST_CASE("numeric comparison", "[text]") {
    CHECK(answers::parse_number("1,234.5") == Catch::Approx(1234.5));
    CHECK(answers::parse_number("$3") == Catch::Approx(3.0));
    CHECK(answers::parse_number(" -0.25 ") == Catch::Approx(-0.25));
    CHECK_FALSE(answers::parse_number("12%").has_value());
    CHECK(answers::numeric_equal("7.0", "7"));
    CHECK_FALSE(answers::numeric_equal("7.96", "8"));
    CHECK(answers::numeric_equal("净 利润", "净利润"));
}

TEST_CASE("final answer extraction", "[text]") {
    CHECK(answers::extract_final_answer("<think>x</think><answer>B</answer>") == "B");
    CHECK(answers::extract_final_answer("<answer>so boxed{C}</answer>") == "C");
    CHECK(answers::extract_final_answer("first boxed{A} then boxed{D}") == "D");
    CHECK_FALSE(answers::extract_final_answer("nothing here").has_value());
}
