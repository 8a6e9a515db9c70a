#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "finreason/corpus.hpp"
#include "finreason/filters.hpp"
#include "finreason/json_extract.hpp"
#include "finreason/rewards.hpp"
#include "finreason/scripted_provider.hpp"
#include "finreason/sft.hpp"
#include "finreason/workflow.hpp"

using namespace finreason;

namespace {

std::string mixed_text(std::size_t repeats) {
    std::string s;
    for (std::size_t i = 0; i < repeats; ++i) s += "资本充足率 capital adequacy ratio 是 8% ";
    return s;
}

void BM_CountTokens(benchmark::State& state) {
    const auto text = mixed_text(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(filters::count_tokens(text));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_CountTokens)->Range(8, 4096);

void BM_ParseStructured(benchmark::State& state) {
    const auto output = "<think>" + mixed_text(static_cast<std::size_t>(state.range(0))) + "</think><answer>B</answer>";
    for (auto _ : state) benchmark::DoNotOptimize(rewards::parse_structured(output));
}
BENCHMARK(BM_ParseStructured)->Range(8, 4096);

void BM_GroupAdvantages(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(0, 2);
    std::vector<double> rewards(static_cast<std::size_t>(state.range(0)));
    for (auto& r : rewards) r = d(rng);
    for (auto _ : state) benchmark::DoNotOptimize(rewards::group_advantages(rewards));
}
BENCHMARK(BM_GroupAdvantages)->Arg(8)->Arg(64)->Arg(1024);

void BM_FindJsonObjects(benchmark::State& state) {
    const std::string reply = "Some reasoning first. " + mixed_text(20) +
                              "\n```json\n{\"question\": \"什么是资本充足率?\", \"answer\": \"资本与风险加权资产之比\"}\n```\n";
    for (auto _ : state) benchmark::DoNotOptimize(find_json_objects(reply));
}
BENCHMARK(BM_FindJsonObjects);

void BM_SeededShuffle(benchmark::State& state) {
    std::vector<int> base(static_cast<std::size_t>(state.range(0)));
    for (std::size_t i = 0; i < base.size(); ++i) base[i] = static_cast<int>(i);
    for (auto _ : state) {
        auto v = base;
        sft::seeded_shuffle(v, 42);
        benchmark::DoNotOptimize(v.data());
    }
}
BENCHMARK(BM_SeededShuffle)->Range(64, 65536);

void BM_WorkflowBatch(benchmark::State& state) {
    const std::string dir = std::string(FINREASON_DATA_DIR) + "/workflow/";
    const auto graph = workflow::load_workflow_file(dir + "synthetic_graph.json");
    const auto dialogues = load_records<workflow::Dialogue>(dir + "batch_815_dialogues.jsonl");
    const auto script = gateway::ResponseScript::load(dir + "batch_815_script.json");
    for (auto _ : state) {
        gateway::Endpoint agent;
        agent.provider = gateway::make_scripted_provider(script);
        agent.model = "qwen2.5-72b-instruct";
        benchmark::DoNotOptimize(workflow::execute_batch(graph, dialogues, agent, {}, 1));
    }
}
BENCHMARK(BM_WorkflowBatch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
