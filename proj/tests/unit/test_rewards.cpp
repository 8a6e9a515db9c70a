#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "finreason/corpus.hpp"
#include "finreason/rewards.hpp"
#include "support/fixtures.hpp"

using namespace finreason;
using namespace finreason::rewards;

TEST_CASE("parse_structured examples", "[rewards]") {
    const auto ok = parse_structured("<think>x</think><answer>B</answer>");
    REQUIRE(std::holds_alternative<StructuredOutput>(ok));
    CHECK(std::get<StructuredOutput>(ok) == StructuredOutput{"x", "B"});
    CHECK(std::get<ParseError>(parse_structured("preamble <think>x</think><answer>B</answer>")) ==
          ParseError::extra_content);
    CHECK(std::get<ParseError>(parse_structured("<think>x</think><think>y</think><answer>B</answer>")) ==
          ParseError::duplicate_tags);
}

TEST_CASE("parse_structured keeps contents verbatim", "[rewards]") {
    const auto r = parse_structured("<think>  a\n b </think><answer> C </answer>");
    REQUIRE(std::holds_alternative<StructuredOutput>(r));
    CHECK(std::get<StructuredOutput>(r).think == "  a\n b ");
    CHECK(std::get<StructuredOutput>(r).answer == " C ");
}

TEST_CASE("format_reward examples", "[rewards]") {
    CHECK(format_reward("<think>x</think><answer>B</answer>") == 1);
    CHECK(format_reward("<answer>B</answer><think>x</think>") == 0);
    CHECK(format_reward("<think>x</think><answer>B</answer> extra") == 0);
}

TEST_CASE("accuracy_reward examples", "[rewards]") {
    CHECK(accuracy_reward("<think>x</think><answer>B</answer>", "B") == 1);
    CHECK(accuracy_reward("<think>x</think><answer>C</answer>", "B") == 0);
    CHECK(accuracy_reward("<think>x</think><answer>db</answer>", "BD") == 1);
    CHECK(accuracy_reward("no tags B", "B") == 0);
    CHECK_THROWS_AS(accuracy_reward("<think>x</think><answer>12%</answer>", "12%"), InvalidReference);
    CHECK(accuracy_reward("<think>x</think><answer>12%</answer>", "12%", true) == 1);
}

TEST_CASE("reward golden cases", "[rewards]") {
    const auto cases = read_json(finreason::testing::golden_dir() / "reward_cases.json");
    REQUIRE(cases.size() >= 25);
    for (const auto& c : cases) {
        const auto output = c["output"].get<std::string>();
        INFO(c["name"].get<std::string>());
        const auto parsed = parse_structured(output);
        const std::string got = std::holds_alternative<StructuredOutput>(parsed)
                                    ? std::string("ok")
                                    : std::string(to_string(std::get<ParseError>(parsed)));
        CHECK(got == c["parse"].get<std::string>());
        CHECK(format_reward(output) == c["format"].get<int>());
        CHECK(accuracy_reward(output, c["reference"].get<std::string>()) == c["accuracy"].get<int>());
    }
}

TEST_CASE("boxed extraction", "[rewards]") {
    CHECK(extract_boxed("thus boxed{B}") == "B");
    CHECK(extract_boxed("boxed{A} then revised: boxed{C}") == "C");
    CHECK(extract_boxed("boxed{12\\%}") == "12\\%");
    CHECK(extract_boxed("\\boxed{\\frac{1}{2}}") == "\\frac{1}{2}");
    const auto m = find_last_boxed("x \\boxed{7} y");
    REQUIRE(std::holds_alternative<BoxedMatch>(m));
    CHECK(std::get<BoxedMatch>(m).begin == 2);
    CHECK(std::get<BoxedMatch>(m).end == 11);
    try {
        extract_boxed("nothing");
        FAIL("expected ExtractionError");
    } catch (const ExtractionError& e) {
        CHECK(e.kind() == BoxedError::not_found);
    }
    try {
        extract_boxed("boxed{a{b}");
        FAIL("expected ExtractionError");
    } catch (const ExtractionError& e) {
        CHECK(e.kind() == BoxedError::unbalanced_braces);
    }
}

TEST_CASE("group advantages", "[rewards]") {
    const std::vector<double> flat{1, 1, 1, 1};
    CHECK(group_advantages(flat) == std::vector<double>{0, 0, 0, 0});

    const std::vector<double> r{1, 0, 0, 1};
    const auto a = group_advantages(r, {0.0});
    const std::vector<double> expected{1, -1, -1, 1};
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == Catch::Approx(expected[i]).margin(1e-12));

    const auto with_eps = group_advantages(r);
    CHECK(with_eps[0] == Catch::Approx(0.5 / (0.5 + 1e-6)).margin(1e-12));

    const std::vector<double> shifted{2, 1, 1, 2};
    const auto b = group_advantages(shifted, {0.0});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);

    CHECK_THROWS_AS(group_advantages(std::vector<double>{1.0}), GroupTooSmall);
    CHECK_THROWS_AS(group_advantages(std::vector<double>{1.0, NAN}), DataError);
}

TEST_CASE("score_group composes the two rewards", "[rewards]") {
    RolloutGroup g;
    g.prompt_id = "p";
    for (int i = 0; i < 3; ++i) g.rollouts.push_back("<think>r</think><answer>B</answer>");
    for (int i = 0; i < 5; ++i) g.rollouts.push_back("B");
    const auto scored = score_group(g, "B");
    std::vector<double> totals;
    for (const auto& rv : scored.rewards) totals.push_back(rv.total);
    CHECK(totals == std::vector<double>{2, 2, 2, 0, 0, 0, 0, 0});
    CHECK(std::abs(std::accumulate(scored.advantages.begin(), scored.advantages.end(), 0.0)) < 1e-9);

    RolloutGroup bad;
    bad.rollouts.assign(8, "malformed");
    auto all_bad = score_group(bad, "B");
    CHECK(all_bad.advantages == std::vector<double>(8, 0.0));

    RolloutGroup good;
    good.rollouts.assign(8, "<think>r</think><answer>B</answer>");
    CHECK(score_group(good, "B").advantages == std::vector<double>(8, 0.0));

    RolloutGroup single;
    single.rollouts = {"x"};
    CHECK_THROWS_AS(score_group(single, "B"), GroupTooSmall);
}

TEST_CASE("weighted totals and json", "[rewards]") {
    ScoringOptions opts;
    opts.weights = {0.5, 2.0};
    const auto rv = score_output("<think>r</think><answer>B</answer>", "B", opts);
    CHECK(rv == RewardVector{1, 1, 2.5});
    const nlohmann::json j = rv;
    CHECK(j == nlohmann::json{{"format", 1}, {"accuracy", 1}, {"total", 2.5}});

    const auto doc = nlohmann::json::parse(R"({"prompt_id": "p1", "rollouts": ["a", "b"], "reference": "A"})");
    const auto group = doc.get<RolloutGroup>();
    CHECK(group.rollouts.size() == 2);
    CHECK(group.reference == "A");
}
