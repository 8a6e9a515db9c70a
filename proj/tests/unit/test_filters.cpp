#include <catch2/catch_amalgamated.hpp>

#include "finreason/filters.hpp"
#include "support/fixtures.hpp"

using namespace finreason;
using namespace finreason::filters;
using finreason::gateway::ResponseScript;
using finreason::gateway::ScriptEntry;
using finreason::testing::attempts;
using finreason::testing::scripted;

namespace {

Question make_mcq(std::string id, std::string body, std::string gold = "B") {
    Question q;
    q.id = std::move(id);
    q.body = std::move(body);
    q.choices = {{"A", "alpha"}, {"B", "beta"}, {"C", "gamma"}, {"D", "delta"}};
    q.gold_answer = std::move(gold);
    return q;
}

std::string words(int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += (i ? " w" : "w") + std::to_string(i);
    return s;
}

ScriptEntry match(std::vector<std::string> contains, std::string model, std::string reply) {
    ScriptEntry e;
    e.contains = std::move(contains);
    e.model = std::move(model);
    e.reply = std::move(reply);
    e.times = std::nullopt;
    return e;
}

}  // namespace

TEST_CASE("token counting", "[filters]") {
    CHECK(count_tokens("") == 0);
    CHECK(count_tokens("what is CAR") == 3);
    CHECK(count_tokens("资本充足率是什么") == 8);
    CHECK(count_tokens("CAR是8%") == 3);
    CHECK(count_tokens("  a\t\tb\n") == 2);
    CHECK(count_tokens("资本，充足") == 5);
    CHECK(count_tokens("a\xE3\x80\x80" "b") == 2);
}

TEST_CASE("length filter boundary", "[filters]") {
    CHECK(length_filter(make_mcq("a", words(14))) == Decision::drop);
    CHECK(length_filter(make_mcq("b", words(15))) == Decision::keep);
    CHECK(length_filter(make_mcq("c", "")) == Decision::drop);
    CHECK(length_filter(make_mcq("d", words(5)), 5) == Decision::keep);
}

TEST_CASE("difficulty filter", "[filters]") {
    const auto q = make_mcq("q", words(20));
    const std::vector<std::string> both{"B", "B"}, one{"B", "C"};
    CHECK(difficulty_filter(q, both) == Decision::drop);
    CHECK(difficulty_filter(q, one) == Decision::keep);
    const auto multi = make_mcq("m", words(20), "ABD");
    const std::vector<std::string> partial{"AB", "ABD"}, reordered{"dba", "A, B, D"};
    CHECK(difficulty_filter(multi, partial) == Decision::keep);
    CHECK(difficulty_filter(multi, reordered) == Decision::drop);
    CHECK_THROWS_AS(difficulty_filter(q, std::vector<std::string>{}), ConfigError);

    Question numeric;
    numeric.id = "n";
    numeric.body = words(20);
    numeric.gold_answer = "1,250";
    const std::vector<std::string> nums{"1250", "1250.0"};
    CHECK(difficulty_filter(numeric, nums) == Decision::drop);
}

TEST_CASE("probe and ambiguity prompts", "[filters]") {
    const auto q = make_mcq("q", "哪一项正确？");
    const auto probe = render_probe_prompt(q);
    CHECK(probe.find("哪一项正确？") != std::string::npos);
    CHECK(probe.find("D. delta") != std::string::npos);
    CHECK(probe.find("boxed{}") != std::string::npos);
    const auto amb = render_ambiguity_prompt(q);
    CHECK(amb.find("哪一项正确？") != std::string::npos);
    CHECK(amb.find("A. alpha") != std::string::npos);

    CHECK(parse_ambiguity_verdict(R"({"ambiguous": true})") == true);
    CHECK(parse_ambiguity_verdict("verdict: ```json\n{\"ambiguous\": false}\n```") == false);
    CHECK_FALSE(parse_ambiguity_verdict("I think it is fine").has_value());
    CHECK_FALSE(parse_ambiguity_verdict(R"({"ambiguous": "yes"})").has_value());
}

TEST_CASE("ambiguity filter outcomes", "[filters]") {
    const auto q = make_mcq("q", words(20));
    {
        auto [mock, judge] = scripted(ResponseScript{}.then(R"({"ambiguous": true})"));
        const auto v = ambiguity_filter(q, judge, attempts(3));
        CHECK(v.decision == Decision::drop);
        CHECK(v.calls == 1);
    }
    {
        auto [mock, judge] = scripted(ResponseScript{}.then(R"({"ambiguous": false})"));
        CHECK(ambiguity_filter(q, judge, attempts(3)).decision == Decision::keep);
    }
    {
        auto [mock, judge] = scripted(ResponseScript{}.then("garbage").then("more garbage").then(R"({"ambiguous": false})"));
        const auto v = ambiguity_filter(q, judge, attempts(3));
        CHECK(v.decision == Decision::keep);
        CHECK_FALSE(v.flagged);
        CHECK(v.calls == 3);
        CHECK(mock->call_count() == 3);
        CHECK(v.transcript.size() == 3);
    }
    {
        auto [mock, judge] = scripted(ResponseScript{}.then("x").then("y").then("z"));
        const auto v = ambiguity_filter(q, judge, attempts(3));
        CHECK(v.decision == Decision::keep);
        CHECK(v.flagged);
        CHECK(v.calls == 3);
    }
}

TEST_CASE("pipeline on an empty corpus", "[filters]") {
    auto [mock, judge] = scripted(ResponseScript{});
    FilterProviders providers{{judge}, judge};
    const auto result = run_filter_pipeline({}, FilterConfig{}, providers);
    CHECK(result.kept.empty());
    const auto j = result.report.to_json();
    CHECK(j["input_count"] == 0);
    CHECK(j["kept_count"] == 0);
    CHECK(j["dropped_by_length"] == 0);
    CHECK(j["dropped_by_difficulty"] == 0);
    CHECK(j["dropped_by_ambiguity"] == 0);
    CHECK(j["probe_calls"] == 0);
    CHECK(j["judge_calls"] == 0);
}

TEST_CASE("pipeline attributes one drop per stage", "[filters]") {
    std::vector<Question> corpus{
        make_mcq("short", words(5)),
        make_mcq("easy", "EASY " + words(20)),
        make_mcq("vague", "VAGUE " + words(20)),
        make_mcq("hard1", "HARD1 " + words(20)),
        make_mcq("hard2", "HARD2 " + words(20)),
    };
    ResponseScript probe_script, judge_script;
    probe_script.add(match({"EASY"}, "p1", "boxed{B}")).add(match({"EASY"}, "p2", "boxed{B}"));
    probe_script.add(match({}, "p1", "boxed{A}")).add(match({}, "p2", "boxed{B}"));
    judge_script.add(match({"VAGUE"}, "judge", R"({"ambiguous": true})"));
    judge_script.add(match({}, "judge", R"({"ambiguous": false})"));
    auto probes = gateway::make_scripted_provider(probe_script);
    auto judges = gateway::make_scripted_provider(judge_script);

    FilterProviders providers;
    providers.probes = {finreason::testing::endpoint(probes, "p1"), finreason::testing::endpoint(probes, "p2")};
    providers.judge = finreason::testing::endpoint(judges, "judge");
    FilterConfig config;
    config.concurrency = 3;
    const auto result = run_filter_pipeline(corpus, config, providers);

    CHECK(result.report.kept_count == 2);
    CHECK(result.report.dropped_by_length == 1);
    CHECK(result.report.dropped_by_difficulty == 1);
    CHECK(result.report.dropped_by_ambiguity == 1);
    REQUIRE(result.kept.size() == 2);
    CHECK(result.kept[0].id == "hard1");
    CHECK(result.kept[1].id == "hard2");
    REQUIRE(result.report.drops.size() == 3);
    CHECK(result.report.drops[0] == std::pair<std::string, DropReason>{"short", DropReason::length});
    CHECK(result.report.drops[1] == std::pair<std::string, DropReason>{"easy", DropReason::difficulty});
    CHECK(result.report.drops[2] == std::pair<std::string, DropReason>{"vague", DropReason::ambiguity});
    CHECK(result.report.probe_calls == 8);
    CHECK(result.report.judge_calls == 3);
    CHECK(probes->call_count() == 8);
    CHECK(result.report.to_table().find("| ambiguity  | 1 |") != std::string::npos);
}

TEST_CASE("first failing stage wins", "[filters]") {
    ResponseScript judge_script;
    judge_script.add(match({}, "judge", R"({"ambiguous": true})"));
    auto judges = gateway::make_scripted_provider(judge_script);
    auto probes = gateway::make_scripted_provider(ResponseScript{});
    FilterProviders providers{{finreason::testing::endpoint(probes)}, finreason::testing::endpoint(judges, "judge")};
    const auto result = run_filter_pipeline({make_mcq("tiny", words(5))}, FilterConfig{}, providers);
    CHECK(result.report.dropped_by_length == 1);
    CHECK(result.report.dropped_by_ambiguity == 0);
    CHECK(judges->call_count() == 0);
    CHECK(probes->call_count() == 0);
}

TEST_CASE("pipeline configuration errors", "[filters]") {
    auto [mock, judge] = scripted(ResponseScript{});
    CHECK_THROWS_AS(run_filter_pipeline({make_mcq("q", words(20))}, FilterConfig{}, FilterProviders{{}, judge}),
                    ConfigError);
    CHECK_THROWS_AS(run_filter_pipeline({make_mcq("q", words(20))}, FilterConfig{}, FilterProviders{{judge}, std::nullopt}),
                    ConfigError);
    FilterConfig length_only;
    length_only.apply_difficulty = false;
    length_only.apply_ambiguity = false;
    CHECK(run_filter_pipeline({make_mcq("q", words(20))}, length_only, FilterProviders{}).kept.size() == 1);
}

TEST_CASE("unreachable probe keeps and flags", "[filters]") {
    ScriptEntry down;
    down.transport_error = true;
    down.reply = "down";
    down.times = std::nullopt;
    auto probes = gateway::make_scripted_provider(ResponseScript{}.add(down));
    FilterConfig config;
    config.apply_ambiguity = false;
    FilterProviders providers{{finreason::testing::endpoint(probes)}, std::nullopt};
    const auto result = run_filter_pipeline({make_mcq("q", words(20))}, config, providers);
    CHECK(result.kept.size() == 1);
    CHECK(result.report.flagged == std::vector<std::string>{"q"});
}
