#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "finreason/corpus.hpp"
#include "finreason/workflow.hpp"
#include "support/fixtures.hpp"

using namespace finreason;
using namespace finreason::workflow;
using finreason::gateway::ResponseScript;
using finreason::testing::attempts;
using finreason::testing::scripted;

namespace {

nlohmann::json minimal_graph() {
    return nlohmann::json::parse(R"({"nodes": {
        "start": {"kind": "start", "next": "c1"},
        "c1": {"kind": "condition", "prompt": "Did the agent promise returns? {meta}",
               "branches": {"yes": "violation", "no": "no_violation"}},
        "violation": {"kind": "outcome", "outcome": "violation"},
        "no_violation": {"kind": "outcome", "outcome": "no_violation"}
    }})");
}

Dialogue dialogue(std::string id = "d1") {
    Dialogue d;
    d.id = std::move(id);
    d.turns = {{Speaker::customer, "这个理财保本吗？"}, {Speaker::agent, "保证收益，您放心。"}};
    d.meta = {{"channel", "phone"}};
    return d;
}

GraphErrorKind violation_kind(const nlohmann::json& doc) {
    try {
        load_workflow(doc);
    } catch (const InvalidWorkflow& e) {
        return e.kind();
    }
    FAIL("graph unexpectedly valid");
    return GraphErrorKind::cycle_detected;
}

class EchoProvider final : public gateway::Provider {
public:
    gateway::ChatResponse send(const gateway::ChatRequest& request) override {
        gateway::ChatResponse r;
        r.text = request.messages.back().content;
        return r;
    }
};

}  // namespace

TEST_CASE("minimal graph is valid", "[workflow]") {
    const auto g = load_workflow(minimal_graph());
    CHECK(g.condition_count() == 1);
    CHECK(g.start().next == "c1");
    CHECK(g.follow("c1", "yes") == "violation");
    CHECK_FALSE(g.follow("c1", "maybe").has_value());
    CHECK(g.resolve_label(g.node("c1"), "YES") == "yes");
    CHECK(load_workflow(to_json(g)).nodes().size() == 4);
}

TEST_CASE("graph validation errors", "[workflow]") {
    auto dangling = minimal_graph();
    dangling["nodes"]["c1"]["branches"]["no"] = "c9";
    try {
        load_workflow(dangling);
        FAIL("expected InvalidWorkflow");
    } catch (const InvalidWorkflow& e) {
        CHECK(e.kind() == GraphErrorKind::dangling_branch);
        CHECK(std::string(e.what()).find("c9") != std::string::npos);
    }

    auto loop = minimal_graph();
    loop["nodes"]["c1"]["branches"]["no"] = "c2";
    loop["nodes"]["c2"] = {{"kind", "condition"}, {"prompt", "again?"},
                           {"branches", {{"yes", "c1"}, {"no", "no_violation"}}}};
    try {
        load_workflow(loop);
        FAIL("expected InvalidWorkflow");
    } catch (const InvalidWorkflow& e) {
        CHECK(e.kind() == GraphErrorKind::cycle_detected);
        const auto& ids = e.violations().front().node_ids;
        CHECK(std::find(ids.begin(), ids.end(), "c1") != ids.end());
        CHECK(std::find(ids.begin(), ids.end(), "c2") != ids.end());
    }

    auto two_starts = minimal_graph();
    two_starts["nodes"]["start2"] = {{"kind", "start"}, {"next", "c1"}};
    CHECK(violation_kind(two_starts) == GraphErrorKind::multiple_starts);

    auto one_outcome = minimal_graph();
    one_outcome["nodes"].erase("no_violation");
    one_outcome["nodes"]["c1"]["branches"]["no"] = "violation";
    CHECK(violation_kind(one_outcome) == GraphErrorKind::outcome_count_invalid);

    auto unreachable = minimal_graph();
    unreachable["nodes"]["c1"]["branches"]["no"] = "violation";
    CHECK(violation_kind(unreachable) == GraphErrorKind::unreachable_outcome);
}

TEST_CASE("node answer parsing", "[workflow]") {
    const auto a = parse_node_answer("The agent promised returns.\nANSWER: yes");
    REQUIRE(a);
    CHECK(a->cot == "The agent promised returns.");
    CHECK(a->label == "yes");
    CHECK(parse_node_answer("reason\nAnswer： **No**.")->label == "No");
    CHECK(parse_node_answer("ANSWER: yes\n\n")->cot.empty());
    CHECK_FALSE(parse_node_answer("yes").has_value());
    CHECK_FALSE(parse_node_answer("ANSWER: yes\nthen more").has_value());
}

TEST_CASE("dialogue rendering", "[workflow]") {
    const auto d = dialogue();
    CHECK(d.render_turns() == "Customer: 这个理财保本吗？\nAgent: 保证收益，您放心。");
    CHECK(d.render_meta() == "channel: phone");
    CHECK(d.render() == "### Dialogue:\n" + d.render_turns() + "\n\n### Meta Information:\n" + d.render_meta());
    const auto prompt = render_node_prompt(load_workflow(minimal_graph()).node("c1"), d);
    CHECK(prompt.find("Did the agent promise returns? channel: phone") != std::string::npos);
    CHECK(prompt.find("yes") != std::string::npos);
    const nlohmann::json j = d;
    CHECK(j.get<Dialogue>().render() == d.render());
}

TEST_CASE("execute on the minimal graph", "[workflow]") {
    const auto g = load_workflow(minimal_graph());
    auto [mock, agent] = scripted(ResponseScript{}.then("Promised guaranteed returns.\nANSWER: yes"));
    const auto trace = execute(g, dialogue(), agent);
    REQUIRE(trace.steps.size() == 1);
    CHECK(trace.n_calls() == 1);
    CHECK(trace.final_answer == Outcome::violation);
    CHECK(trace.path() == std::vector<std::string>{"c1", "violation"});
    CHECK(trace.steps[0].cot == "Promised guaranteed returns.");
    CHECK(mock->call_count() == 1);
}

TEST_CASE("execute retries unparseable node answers", "[workflow]") {
    const auto g = load_workflow(minimal_graph());
    {
        auto [mock, agent] = scripted(ResponseScript{}.then("ANSWER: perhaps").then("ok\nANSWER: no"));
        ExecuteOptions opts;
        opts.node_policy = attempts(3);
        const auto trace = execute(g, dialogue(), agent, opts);
        CHECK(trace.n_calls() == 1);
        CHECK(trace.extra_calls() == 1);
        CHECK(trace.total_calls() == mock->call_count());
        CHECK(trace.final_answer == Outcome::no_violation);
    }
    {
        auto [mock, agent] = scripted(ResponseScript{}.then("?").then("??"));
        ExecuteOptions opts;
        opts.node_policy = attempts(2);
        try {
            execute(g, dialogue(), agent, opts);
            FAIL("expected UnparseableNodeAnswer");
        } catch (const UnparseableNodeAnswer& e) {
            CHECK(e.node_id() == "c1");
            CHECK(e.calls() == 2);
        }
    }
}

TEST_CASE("replay follows recorded answers", "[workflow]") {
    const auto g = load_workflow_file(finreason::testing::data_dir() / "workflow" / "synthetic_graph.json");
    const std::vector<std::string> answers{"no", "yes", "yes", "no"};
    CHECK(replay(g, answers) == std::vector<std::string>{"c1", "c3", "c4", "c5", "no_violation"});
}

TEST_CASE("synthetic graph matches the hand-traced golden", "[workflow]") {
    const auto dir = finreason::testing::data_dir() / "workflow";
    const auto g = load_workflow_file(dir / "synthetic_graph.json");
    CHECK(g.nodes().size() == 12);
    const auto dialogues = load_records<Dialogue>(dir / "dialogues.jsonl");
    const auto golden = read_json(finreason::testing::golden_dir() / "workflow_traces.json");
    REQUIRE(dialogues.size() == 40);
    REQUIRE(golden.size() == 40);

    auto provider = gateway::make_scripted_provider(gateway::ResponseScript::load(dir / "agent_script.json"));
    auto agent = finreason::testing::endpoint(provider, "qwen2.5-72b-instruct");
    ExecuteOptions opts;
    opts.node_policy = attempts(3);
    const auto results = execute_batch(g, dialogues, agent, opts, 4);
    std::size_t golden_calls = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        INFO(dialogues[i].id);
        REQUIRE(results[i].trace);
        const auto& trace = *results[i].trace;
        CHECK(trace.path() == golden[i]["path"].get<std::vector<std::string>>());
        CHECK(trace.n_calls() == golden[i]["n_calls"].get<std::size_t>());
        CHECK(trace.extra_calls() == golden[i]["extra_calls"].get<std::size_t>());
        CHECK(std::string(to_string(trace.final_answer)) == golden[i]["final_answer"].get<std::string>());
        golden_calls += golden[i]["n_calls"].get<std::size_t>();
    }
    const auto summary = summarize(dialogues, results);
    CHECK(summary.mean_calls == Catch::Approx(static_cast<double>(golden_calls) / 40.0));
    CHECK(summary.accuracy == Catch::Approx(92.5));
    CHECK(summary.to_table("agent").find("| agent | 92.50 | 3.75 |") != std::string::npos);
}

TEST_CASE("constructed batch averages 8.15 calls", "[workflow]") {
    const auto dir = finreason::testing::data_dir() / "workflow";
    const auto g = load_workflow_file(dir / "synthetic_graph.json");
    const auto dialogues = load_records<Dialogue>(dir / "batch_815_dialogues.jsonl");
    auto provider = gateway::make_scripted_provider(gateway::ResponseScript::load(dir / "batch_815_script.json"));
    const auto results = execute_batch(g, dialogues, finreason::testing::endpoint(provider, "qwen2.5-72b-instruct"), {}, 4);
    const auto summary = summarize(dialogues, results);
    CHECK(summary.completed == 20);
    CHECK(summary.mean_calls == Catch::Approx(8.15).margin(0.01));
    CHECK(summary.total_calls == 163);
    CHECK(provider->call_count() == 163);
}

TEST_CASE("merging intermediate chains of thought", "[workflow]") {
    auto echo = std::make_shared<EchoProvider>();
    auto merger = finreason::testing::endpoint(echo);
    const std::vector<TraceStep> one{{"c1", "first-cot", "yes", 1}};
    CHECK(merge_cots(one, Outcome::violation, merger, attempts(1)).cot.find("first-cot") != std::string::npos);

    const std::vector<TraceStep> three{{"c1", "alpha-cot", "yes", 1}, {"c2", "beta-cot", "no", 1}, {"c3", "gamma-cot", "yes", 1}};
    const auto merged = merge_cots(three, Outcome::no_violation, merger, attempts(1)).cot;
    const auto a = merged.find("alpha-cot"), b = merged.find("beta-cot"), c = merged.find("gamma-cot");
    REQUIRE(a != std::string::npos);
    REQUIRE(b != std::string::npos);
    REQUIRE(c != std::string::npos);
    CHECK(a < b);
    CHECK(b < c);

    auto [mock, blank] = scripted(ResponseScript{}.then("").then("  "));
    try {
        merge_cots(one, Outcome::violation, blank, attempts(2));
        FAIL("expected MergerUnparseable");
    } catch (const MergerUnparseable& e) {
        CHECK(e.calls() == 2);
    }
    CHECK_THROWS_AS(merge_cots({}, Outcome::violation, merger, attempts(1)), DataError);
}

TEST_CASE("synthesis retries whole executions", "[workflow]") {
    const auto g = load_workflow(minimal_graph());
    SynthesisPolicy policy;
    policy.attempts = attempts(3);
    policy.merge_policy = attempts(1);
    {
        auto [am, agent] = scripted(ResponseScript{}.then("promised\nANSWER: yes"));
        auto [mm, merger] = scripted(ResponseScript{}.then("merged reasoning"));
        const auto out = synthesize(dialogue(), Outcome::violation, g, agent, merger, policy);
        REQUIRE(out.reasoned());
        const auto& s = std::get<ReasoningSample>(out.sample);
        CHECK(s.reasoning == "merged reasoning");
        CHECK(s.answer == "violation");
        CHECK(s.attempts_used == 1);
        CHECK(s.source == Source::ccc);
        CHECK(s.input == dialogue().render());
    }
    {
        auto [am, agent] = scripted(ResponseScript{}.then("a\nANSWER: no").then("b\nANSWER: no").then("c\nANSWER: yes"));
        auto [mm, merger] = scripted(ResponseScript{}.then("merged"));
        const auto out = synthesize(dialogue(), Outcome::violation, g, agent, merger, policy);
        REQUIRE(out.reasoned());
        CHECK(std::get<ReasoningSample>(out.sample).attempts_used == 3);
        CHECK(out.traces.size() == 3);
        CHECK(out.agent_calls == 3);
        CHECK(out.merger_calls == 1);
    }
    {
        auto [am, agent] = scripted(ResponseScript{}.then("a\nANSWER: no").then("b\nANSWER: no").then("c\nANSWER: no"));
        auto [mm, merger] = scripted(ResponseScript{});
        const auto out = synthesize(dialogue(), Outcome::violation, g, agent, merger, policy);
        REQUIRE_FALSE(out.reasoned());
        CHECK(std::get<HardSample>(out.sample).attempts_used == 3);
        CHECK(mm->call_count() == 0);
    }
}
