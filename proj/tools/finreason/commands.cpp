#include "commands.hpp"

#include <fstream>
#include <iostream>
#include <set>

#include "finreason/corpus.hpp"
#include "finreason/distillation.hpp"
#include "finreason/evaluation.hpp"
#include "finreason/filters.hpp"
#include "finreason/parallel.hpp"
#include "finreason/question_transform.hpp"
#include "finreason/rewards.hpp"
#include "finreason/sft.hpp"
#include "finreason/workflow.hpp"

namespace finreason::cli {

namespace {

void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << body;
}

template <typename T>
void write_records(const std::filesystem::path& path, const std::vector<T>& records) {
    write_jsonl(path, rows_from(records));
}

}  // namespace

int run_filter(RunContext& ctx, const FilterArgs& args) {
    const auto& cfg = ctx.config();
    const auto corpus = load_questions(require_input(args.in, "input corpus"));

    filters::FilterConfig fc;
    fc.min_tokens = cfg.min_tokens;
    fc.apply_ambiguity = cfg.ambiguity_filter;
    fc.judge_policy = cfg.attempts;
    fc.concurrency = cfg.concurrency;
    filters::FilterProviders providers;
    for (const auto& probe : cfg.probes) providers.probes.push_back(ctx.endpoint(probe));
    if (fc.apply_ambiguity) providers.judge = ctx.endpoint(cfg.judge);

    const auto result = filters::run_filter_pipeline(corpus, fc, providers);
    write_records(ctx.out_file("kept.jsonl"), result.kept);
    write_json(ctx.out_file("filter_report.json"), result.report.to_json());
    write_text(ctx.out_file("filter_report.md"), result.report.to_table());
    std::cout << result.report.to_table();
    return ok;
}

int run_convert(RunContext& ctx, const ConvertArgs& args) {
    const auto& cfg = ctx.config();
    const auto corpus = load_questions(require_input(args.in, "input corpus"));
    const auto batch = transform::convert_corpus(corpus, ctx.endpoint(cfg.converter), cfg.attempts,
                                                 cfg.concurrency);
    write_records(ctx.out_file("open_ended.jsonl"), batch.converted);
    write_records(ctx.out_file("conversion_failures.jsonl"), batch.failures);
    const nlohmann::json report{{"input_count", corpus.size()},
                                {"converted", batch.converted.size()},
                                {"failed", batch.failures.size()},
                                {"calls", batch.calls},
                                {"provider_failures", batch.provider_failures}};
    write_json(ctx.out_file("convert_report.json"), report);
    std::cout << "converted " << batch.converted.size() << "/" << corpus.size() << " questions, "
              << batch.calls << " calls\n";
    return batch.provider_failures ? provider_exhausted : ok;
}

int run_distill(RunContext& ctx, const DistillArgs& args) {
    const auto& cfg = ctx.config();
    std::vector<distill::DistillItem> items;
    std::set<std::string> ids;
    for (const auto& in : args.in) {
        const auto path = require_input(in, "input corpus");
        for (const auto& row : read_jsonl_rows(path)) {
            try {
                auto item = distill::item_from_json(row.value);
                if (!ids.insert(item.id).second) throw DataError("duplicate id '" + item.id + "'");
                items.push_back(std::move(item));
            } catch (const DataError& e) {
                throw DataError(path.string() + ": line " + std::to_string(row.line) + ": " + e.what());
            }
        }
    }
    const auto result = distill::distill_corpus(items, ctx.endpoint(cfg.reasoner),
                                                ctx.endpoint(cfg.verifier), cfg.attempts,
                                                cfg.concurrency);
    write_records(ctx.out_file("reasoning.jsonl"), result.reasoning);
    write_records(ctx.out_file("hard.jsonl"), result.hard);
    write_json(ctx.out_file("distill_report.json"), result.report.to_json());
    std::cout << "reasoning " << result.reasoning.size() << ", hard " << result.hard.size()
              << ", reasoner calls " << result.report.reasoner_calls << ", verifier calls "
              << result.report.verifier_calls << "\n";
    return result.report.provider_failures ? provider_exhausted : ok;
}

int run_workflow(RunContext& ctx, const WorkflowArgs& args) {
    const auto& cfg = ctx.config();
    const auto graph_path =
        args.graph.empty() ? cfg.resolve("workflow") : require_input(args.graph, "workflow graph");
    const auto graph = workflow::load_workflow_file(graph_path);
    const auto dialogues = load_records<workflow::Dialogue>(require_input(args.in, "dialogues"));
    const auto agent = ctx.endpoint(cfg.node_agent);
    workflow::ExecuteOptions exec;
    exec.node_policy = cfg.attempts;
    const std::string system = args.system_name.empty() ? cfg.node_agent.model : args.system_name;

    if (!args.synthesize) {
        const auto results = workflow::execute_batch(graph, dialogues, agent, exec, cfg.concurrency);
        std::vector<nlohmann::json> rows;
        for (const auto& r : results) {
            nlohmann::json row{{"dialogue_id", r.dialogue_id}};
            if (r.trace) {
                row["trace"] = *r.trace;
            } else {
                row["error"] = r.error;
            }
            rows.push_back(std::move(row));
        }
        const auto summary = workflow::summarize(dialogues, results);
        write_jsonl(ctx.out_file("traces.jsonl"), rows);
        write_json(ctx.out_file("workflow_summary.json"), summary.to_json());
        write_text(ctx.out_file("workflow_table.md"), summary.to_table(system));
        std::cout << summary.to_table(system);
        return ok;
    }

    for (const auto& d : dialogues) {
        if (!d.gold) throw DataError("dialogue '" + d.id + "' has no gold label to synthesize against");
    }
    workflow::SynthesisPolicy policy;
    policy.attempts = cfg.attempts;
    policy.execute = exec;
    policy.merge_policy = cfg.attempts;
    const auto merger = ctx.endpoint(cfg.merger);
    std::vector<workflow::SynthesisOutcome> outcomes(dialogues.size());
    parallel_for(dialogues.size(), cfg.concurrency, [&](std::size_t i) {
        outcomes[i] = workflow::synthesize(dialogues[i], *dialogues[i].gold, graph, agent, merger, policy);
    });

    std::vector<ReasoningSample> reasoning;
    std::vector<HardSample> hard;
    std::vector<nlohmann::json> traces;
    std::size_t agent_calls = 0;
    std::size_t merger_calls = 0;
    bool provider_failed = false;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        auto& o = outcomes[i];
        agent_calls += static_cast<std::size_t>(o.agent_calls);
        merger_calls += static_cast<std::size_t>(o.merger_calls);
        traces.push_back({{"dialogue_id", dialogues[i].id}, {"traces", o.traces}});
        if (auto* r = std::get_if<ReasoningSample>(&o.sample)) {
            reasoning.push_back(std::move(*r));
        } else {
            auto& h = std::get<HardSample>(o.sample);
            for (auto reason : h.failure_reasons) provider_failed |= reason == FailureReason::provider_error;
            hard.push_back(std::move(h));
        }
    }
    write_records(ctx.out_file("reasoning.jsonl"), reasoning);
    write_records(ctx.out_file("hard.jsonl"), hard);
    write_jsonl(ctx.out_file("traces.jsonl"), traces);
    const nlohmann::json report{{"dialogues", dialogues.size()},
                                {"reasoning_count", reasoning.size()},
                                {"hard_count", hard.size()},
                                {"agent_calls", agent_calls},
                                {"merger_calls", merger_calls}};
    write_json(ctx.out_file("synthesis_report.json"), report);
    std::cout << "reasoning " << reasoning.size() << ", hard " << hard.size() << ", agent calls "
              << agent_calls << ", merger calls " << merger_calls << "\n";
    return provider_failed ? provider_exhausted : ok;
}

int run_build_sft(RunContext& ctx, const BuildSftArgs& args) {
    std::vector<sft::NamedCorpus> corpora;
    std::vector<nlohmann::json> rejected;
    for (const auto& in : args.in) {
        const auto path = require_input(in, "reasoning samples");
        sft::NamedCorpus corpus{path.stem().string(), {}};
        for (const auto& sample : load_records<ReasoningSample>(path)) {
            try {
                corpus.second.push_back(sft::to_sft_instance(sample));
            } catch (const Error& e) {
                rejected.push_back({{"id", sample.id}, {"reason", e.what()}});
            }
        }
        corpora.push_back(std::move(corpus));
    }
    const auto mixture = sft::build_mixture(corpora, ctx.config().seed);
    write_records(ctx.out_file("sft.jsonl"), mixture);
    auto stats = sft::stats_document(sft::stats_by_source(mixture));
    stats["total"] = sft::corpus_stats(mixture);
    stats["rejected"] = rejected;
    stats["seed"] = ctx.config().seed;
    write_json(ctx.out_file("sft_stats.json"), stats);
    std::cout << "sft instances " << mixture.size() << ", rejected " << rejected.size() << "\n";
    return ok;
}

int run_score(RunContext& ctx, const ScoreArgs& args) {
    const auto& cfg = ctx.config();
    rewards::ScoringOptions opts;
    opts.weights = {cfg.format_weight, cfg.accuracy_weight};
    opts.advantage.epsilon = cfg.advantage_epsilon;

    const auto path = require_input(args.in, "rollouts");
    std::vector<nlohmann::json> out;
    std::size_t skipped = 0;
    for (const auto& row : read_jsonl_rows(path)) {
        try {
            auto group = row.value.get<rewards::RolloutGroup>();
            const auto reference = group.reference;
            out.emplace_back(rewards::score_group(std::move(group), reference, opts));
        } catch (const std::exception& e) {
            const std::string msg = path.string() + ": line " + std::to_string(row.line) + ": " + e.what();
            if (args.strict) throw DataError(msg);
            std::cerr << "skipping " << msg << "\n";
            ++skipped;
        }
    }
    write_jsonl(ctx.out_file("scored.jsonl"), out);
    std::cout << "scored " << out.size() << " groups, skipped " << skipped << "\n";
    return ok;
}

int run_eval(RunContext& ctx, const EvalArgs& args) {
    const auto& cfg = ctx.config();
    const auto manifest_path = require_input(args.testsets, "test-set manifest");
    const auto manifest = read_json(manifest_path);
    std::vector<eval::TestSet> sets;
    bool needs_judge = false;
    try {
        for (const auto& entry : manifest.at("sets")) {
            eval::TestSet set;
            set.name = entry.at("name").get<std::string>();
            set.kind = eval::parse_score_kind(entry.value("kind", std::string("mcq_single")));
            const auto& items = entry.at("items");
            if (items.is_string()) {
                auto p = std::filesystem::path(items.get<std::string>());
                if (p.is_relative()) p = manifest_path.parent_path() / p;
                set.items = load_records<eval::TestItem>(require_input(p.string(), "test set"));
            } else {
                set.items = items.get<std::vector<eval::TestItem>>();
            }
            needs_judge |= eval::is_judge_kind(set.kind);
            for (const auto& item : set.items) needs_judge |= item.kind && eval::is_judge_kind(*item.kind);
            sets.push_back(std::move(set));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(manifest_path.string() + ": " + e.what());
    }
    const auto predictions =
        load_records<eval::Prediction>(require_input(args.predictions, "predictions"));

    std::optional<gateway::Endpoint> judge;
    if (needs_judge) judge = ctx.endpoint(cfg.judge);
    eval::EvalOptions opts;
    opts.enforce_official_sizes = args.official_sizes;
    opts.judge_policy = cfg.attempts;
    opts.concurrency = cfg.concurrency;
    const auto report = eval::evaluate(sets, predictions, judge, opts);
    write_json(ctx.out_file("eval_report.json"), report.to_json());
    write_text(ctx.out_file("eval_report.md"), report.to_markdown(args.model_name));
    std::cout << report.to_markdown(args.model_name);
    return ok;
}

int run_stats(RunContext& ctx, const StatsArgs& args) {
    const auto path = require_input(args.in, "corpus");
    std::vector<sft::SftInstance> instances;
    for (const auto& row : read_jsonl_rows(path)) {
        try {
            if (row.value.contains("target")) {
                auto inst = row.value.get<sft::SftInstance>();
                if (auto parsed = rewards::parse_structured(inst.target);
                    std::holds_alternative<rewards::ParseError>(parsed)) {
                    throw DataError("target is not <think>…</think><answer>…</answer>");
                }
                instances.push_back(std::move(inst));
            } else if (row.value.contains("reasoning")) {
                instances.push_back(sft::to_sft_instance(row.value.get<ReasoningSample>()));
            } else {
                throw DataError("record has neither \"target\" nor \"reasoning\"");
            }
        } catch (const std::exception& e) {
            throw DataError(path.string() + ": line " + std::to_string(row.line) + ": " + e.what());
        }
    }
    auto doc = sft::stats_document(sft::stats_by_source(instances));
    doc["total"] = sft::corpus_stats(instances);
    std::cout << doc.dump(2) << "\n";
    if (ctx.has_out()) write_json(ctx.out_file("stats.json"), doc);
    return ok;
}

}  // namespace finreason::cli
