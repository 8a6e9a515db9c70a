#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "finreason/corpus.hpp"
#include "finreason/evaluation.hpp"
#include "support/fixtures.hpp"

using namespace finreason;
using namespace finreason::eval;
using finreason::gateway::ResponseScript;
using finreason::testing::attempts;
using finreason::testing::scripted;

namespace {

// Judge that answers per the numeric-equivalence criteria for the pairs it knows.
ResponseScript faithful_finqa_judge() {
    ResponseScript s;
    s.on("### Candidate Answer:\n0.88\n\n### Correct Answer:\n88%", "Same value in a different format. boxed{1}",
         std::nullopt);
    s.on("### Candidate Answer:\n7.96\n\n### Correct Answer:\n8\n", "Rounds to the same value. boxed{1}", std::nullopt);
    s.on("### Candidate Answer:", "boxed{0}", std::nullopt);
    return s;
}

TestSet set(std::string name, ScoreKind kind, std::vector<std::pair<std::string, std::string>> items) {
    TestSet t;
    t.name = std::move(name);
    t.kind = kind;
    for (auto& [id, gold] : items) t.items.push_back({id, gold, std::nullopt});
    return t;
}

}  // namespace

TEST_CASE("rule-based scoring", "[eval]") {
    CHECK(rule_based_score({"1", "so boxed{B}", ""}, "B", ScoreKind::mcq_single).score == 1);
    CHECK(rule_based_score({"1", "so boxed{ABD}", ""}, "ADB", ScoreKind::mcq_multi).score == 1);
    const auto none = rule_based_score({"1", "I think B", ""}, "B", ScoreKind::mcq_single);
    CHECK(none.score == 0);
    CHECK(none.extraction_failed);
    CHECK(rule_based_score({"1", "<answer>C</answer>", ""}, "C", ScoreKind::mcq_single).extracted == "C");
    CHECK(rule_based_score({"1", "boxed{1,250}", ""}, "1250", ScoreKind::numeric_boxed).score == 1);
    CHECK_THROWS_AS(rule_based_score({"1", "x", ""}, "B", ScoreKind::judge_finqa), ConfigError);
}

TEST_CASE("judge prompt goldens", "[eval]") {
    const auto dir = finreason::testing::golden_dir();
    CHECK(render_finqa_judge_prompt("0.88", "88%") == finreason::testing::read_file(dir / "judge_finqa_rendered.txt"));
    CHECK(render_ccc_judge_prompt("violation", "no_violation") ==
          finreason::testing::read_file(dir / "judge_ccc_rendered.txt"));
    const auto finqa = render_finqa_judge_prompt("a", "b");
    CHECK(finqa.find("a candidate answer of 0.88 is consistent with a correct answer of 88%") != std::string::npos);
    CHECK(finqa.find("if the correct answer is 8 and the candidate answer is 7.96, return 1") != std::string::npos);
}

TEST_CASE("finqa judge with a faithful judge", "[eval]") {
    auto [mock, judge] = scripted(faithful_finqa_judge());
    CHECK(judge_score_finqa("0.88", "88%", judge, attempts(2)).score == 1);
    CHECK(judge_score_finqa("7.96", "8", judge, attempts(2)).score == 1);
    CHECK(judge_score_finqa("3", "8", judge, attempts(2)).score == 0);
    auto [m2, zero] = scripted(ResponseScript{}.then("boxed{0}"));
    CHECK(judge_score_finqa("x", "y", zero, attempts(1)).score == 0);
    auto [m3, junk] = scripted(ResponseScript{}.then("no idea").then("still no idea"));
    const auto flagged = judge_score_finqa("x", "y", junk, attempts(2));
    CHECK(flagged.flagged);
    CHECK(flagged.score == 0);
    CHECK(flagged.calls == 2);
}

TEST_CASE("ccc judge replies", "[eval]") {
    auto score = [](std::string reply) {
        auto [mock, judge] = scripted(ResponseScript{}.then(std::move(reply)));
        return judge_score_ccc("violation", "violation", judge, attempts(1)).score;
    };
    CHECK(score(R"({"answer": 1})") == 1);
    CHECK(score(R"({"answer": 0})") == 0);
    CHECK(score("Here is my verdict:\n```json\n{\"answer\": 1}\n```") == 1);
}

TEST_CASE("verdict parser fixtures", "[eval]") {
    const auto cases = read_json(finreason::testing::golden_dir() / "judge_verdicts.json");
    REQUIRE(cases.size() == 30);
    for (const auto& c : cases) {
        const auto reply = c["reply"].get<std::string>();
        INFO(reply);
        const auto got = c["kind"] == "finqa" ? parse_finqa_verdict(reply) : parse_ccc_verdict(reply);
        if (c["expected"].is_null()) {
            CHECK_FALSE(got.has_value());
        } else {
            CHECK(got == c["expected"].get<int>());
        }
    }
}

TEST_CASE("macro average of the results table", "[eval]") {
    const std::vector<double> gpt4o{71.68, 79.16, 50.00, 77.93, 39.56};
    CHECK(round_2dp(macro_average(gpt4o)) == 63.67);
    const std::vector<double> best{86.74, 80.82, 96.00, 88.20, 58.59};
    CHECK(round_2dp(macro_average(best)) == 82.07);
    CHECK(macro_average(std::span<const double>{}) == 0.0);
    CHECK(round_2dp(0.125) == 0.13);
    CHECK(round_2dp(1.005) == 1.01);

    std::size_t agree = 0, rows = 0;
    for (const auto& row : read_json(finreason::testing::golden_dir() / "results_table.json")) {
        std::vector<double> accs;
        for (const auto& [name, acc] : row["sets"].items()) accs.push_back(acc.get<double>());
        ++rows;
        if (std::abs(macro_average(accs) - row["printed_average"].get<double>()) <= 0.01) ++agree;
    }
    CHECK(rows == 12);
    // Every row except DeepSeek-V3, whose printed average is off by 1.00.
    CHECK(agree == 11);
}

TEST_CASE("evaluate a single set", "[eval]") {
    const auto t = set("CFLUE", ScoreKind::mcq_single, {{"1", "A"}, {"2", "B"}, {"3", "C"}, {"4", "D"}});
    const std::vector<Prediction> preds{{"1", "boxed{A}", ""}, {"2", "boxed{B}", ""}, {"3", "boxed{C}", ""}, {"4", "boxed{A}", ""}};
    const auto report = evaluate({t}, preds, std::nullopt);
    REQUIRE(report.sets.size() == 1);
    CHECK(report.sets[0].accuracy == 75.0);
    CHECK(report.average == 75.0);
    CHECK(report.to_json()["sets"][0]["accuracy"] == 75.0);
    CHECK(report.to_markdown("m").find("| m | 75.00 | 75.00 |") != std::string::npos);
}

TEST_CASE("evaluate input checks", "[eval]") {
    const auto t = set("CFLUE", ScoreKind::mcq_single, {{"1", "A"}, {"2", "B"}});
    try {
        evaluate({t}, {{"1", "boxed{A}", ""}}, std::nullopt);
        FAIL("expected MissingPrediction");
    } catch (const MissingPrediction& e) {
        CHECK(e.ids() == std::vector<std::string>{"CFLUE/2"});
    }
    CHECK_THROWS_AS(evaluate({t}, {{"1", "a", ""}, {"1", "b", ""}, {"2", "c", ""}}, std::nullopt), DataError);
    CHECK_THROWS_AS(evaluate({t}, {{"1", "a", ""}, {"2", "b", ""}, {"9", "c", ""}}, std::nullopt), DataError);

    const auto judged = set("FinQA", ScoreKind::judge_finqa, {{"1", "8"}});
    CHECK_THROWS_AS(evaluate({judged}, {{"1", "7.96", ""}}, std::nullopt), ConfigError);

    EvalOptions strict;
    strict.enforce_official_sizes = true;
    CHECK_THROWS(evaluate({t}, {{"1", "boxed{A}", ""}, {"2", "boxed{B}", ""}}, std::nullopt, strict));
    CHECK(official_size("gpqa-diamond") == 198u);
    CHECK_FALSE(official_size("unknown").has_value());
}

TEST_CASE("evaluate with judge kinds is deterministic", "[eval]") {
    const auto finqa = set("FinQA", ScoreKind::judge_finqa, {{"f1", "88%"}, {"f2", "8"}, {"f3", "5"}});
    const auto mcq = set("CFLUE", ScoreKind::mcq_single, {{"f1", "A"}});
    const std::vector<Prediction> preds{{"f1", "<think>t</think><answer>0.88</answer>", "FinQA"},
                                        {"f2", "The result is boxed{7.96}", "FinQA"},
                                        {"f3", "It is 3", "FinQA"},
                                        {"f1", "boxed{A}", "CFLUE"}};
    auto run = [&] {
        auto [mock, judge] = scripted(faithful_finqa_judge());
        EvalOptions opts;
        opts.concurrency = 2;
        return evaluate({finqa, mcq}, preds, judge, opts);
    };
    const auto report = run();
    CHECK(report.sets[0].correct == 2);
    CHECK(report.sets[0].judge_calls == 3);
    CHECK(report.judge_calls == 3);
    CHECK(report.sets[1].accuracy == 100.0);
    CHECK(report.average == Catch::Approx((200.0 / 3.0 + 100.0) / 2.0));
    CHECK(run().to_json() == report.to_json());
}
