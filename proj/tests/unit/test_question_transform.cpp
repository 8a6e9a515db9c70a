#include <catch2/catch_amalgamated.hpp>

#include "finreason/question_transform.hpp"
#include "support/fixtures.hpp"

using namespace finreason;
using namespace finreason::transform;
using finreason::gateway::ResponseScript;
using finreason::testing::attempts;
using finreason::testing::scripted;

namespace {

Question car_question() {
    Question q;
    q.id = "cflue-001";
    q.body = "资本充足率是指下列哪两项之比？";
    q.choices = {{"A", "资本与风险加权资产"}, {"B", "资本与总负债"}, {"C", "贷款与存款"}, {"D", "流动资产与流动负债"}};
    q.gold_answer = "A";
    q.explanation = "资本充足率是资本与风险加权资产的比率。";
    q.source = Source::cflue_mcq;
    return q;
}

const char* kValid = R"({"question":"什么是资本充足率的定义?","answer":"资本与风险加权资产之比"})";

}  // namespace

TEST_CASE("conversion prompt contents", "[transform]") {
    const auto prompt = render_conversion_prompt(car_question());
    for (const auto& c : car_question().choices) CHECK(prompt.find(c.text) != std::string::npos);
    CHECK(prompt.find("### Correct Answer\nA") != std::string::npos);

    Question oe;
    oe.id = "oe";
    oe.body = "什么是资本充足率？";
    oe.gold_answer = "资本与风险加权资产之比";
    CHECK_THROWS_AS(render_conversion_prompt(oe), NotMcq);
}

TEST_CASE("conversion prompt golden", "[transform]") {
    const auto golden = finreason::testing::read_file(finreason::testing::golden_dir() / "conversion_prompt_rendered.txt");
    CHECK(render_conversion_prompt(car_question()) == golden);
}

TEST_CASE("parse_conversion", "[transform]") {
    const auto direct = parse_conversion(kValid);
    CHECK(direct.question == "什么是资本充足率的定义?");
    CHECK(direct.answer == "资本与风险加权资产之比");

    const auto fenced = parse_conversion(std::string("Here you go:\n```json\n") + kValid + "\n```\n");
    CHECK(fenced.question == direct.question);
    CHECK(fenced.answer == direct.answer);

    CHECK_THROWS_AS(parse_conversion(R"({"question":"..."} )"), MalformedConversion);
    CHECK_THROWS_AS(parse_conversion("no json at all"), MalformedConversion);
    CHECK_THROWS_AS(parse_conversion(R"({"question":"x","answer":""})"), MalformedConversion);
    CHECK_THROWS_AS(parse_conversion(R"({"question":"x","answer":3})"), MalformedConversion);
    CHECK_THROWS_AS(parse_conversion(R"({"question":"哪项正确？A. 资本 B. 负债","answer":"A"})"), MalformedConversion);
}

TEST_CASE("convert with retries", "[transform]") {
    const auto q = car_question();
    {
        auto [mock, ep] = scripted(ResponseScript{}.then(kValid));
        const auto r = convert(q, ep, attempts(3));
        REQUIRE(r.ok());
        CHECK(r.calls == 1);
        const auto& oe = std::get<OpenEndedQuestion>(r.outcome);
        CHECK(oe.id == "cflue-001-oe");
        CHECK(oe.origin_id == "cflue-001");
        CHECK(oe.origin_gold == "A");
        CHECK(oe.explanation == q.explanation);
        CHECK(oe.answer == "资本与风险加权资产之比");
    }
    {
        auto [mock, ep] = scripted(ResponseScript{}.then("sorry, no").then(kValid));
        const auto r = convert(q, ep, attempts(3));
        CHECK(r.ok());
        CHECK(r.calls == 2);
        CHECK(mock->call_count() == 2);
    }
    {
        auto [mock, ep] = scripted(ResponseScript{}.then("a").then("b").then("c"));
        const auto r = convert(q, ep, attempts(3));
        REQUIRE_FALSE(r.ok());
        const auto& f = std::get<ConversionFailure>(r.outcome);
        CHECK(f.raw_responses == std::vector<std::string>{"a", "b", "c"});
        CHECK(f.reasons.size() == 3);
        CHECK_FALSE(f.provider_failed);
        CHECK(r.calls == 3);
    }
    {
        auto [mock, ep] = scripted(ResponseScript{}.then_fail());
        const auto r = convert(q, ep, attempts(3));
        REQUIRE_FALSE(r.ok());
        CHECK(std::get<ConversionFailure>(r.outcome).provider_failed);
    }
}

TEST_CASE("convert_corpus keeps input order", "[transform]") {
    auto q1 = car_question();
    auto q2 = car_question();
    q2.id = "cflue-002";
    q2.body = "第二题？";
    Question oe;
    oe.id = "plain";
    oe.body = "open";
    oe.gold_answer = "x";
    ResponseScript script;
    script.on("第二题", R"({"question":"第二题的答案是什么？","answer":"资本与风险加权资产"})");
    script.on("资本充足率是指", kValid);
    auto [mock, ep] = scripted(script);
    const auto batch = convert_corpus({q1, oe, q2}, ep, attempts(3), 2);
    REQUIRE(batch.converted.size() == 2);
    CHECK(batch.converted[0].id == "cflue-001-oe");
    CHECK(batch.converted[1].id == "cflue-002-oe");
    REQUIRE(batch.failures.size() == 1);
    CHECK(batch.failures[0].origin_id == "plain");
    CHECK(batch.calls == 2);

    const nlohmann::json j = batch.converted[0];
    CHECK(j.get<OpenEndedQuestion>() == batch.converted[0]);
}
