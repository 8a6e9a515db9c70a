#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "finreason/errors.hpp"
#include "finreason/gateway.hpp"

using namespace finreason;

int main(int argc, char** argv) {
    CLI::App app{"finreason: financial reasoning data pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    cli::GlobalOptions global;
    app.add_option("--config", global.config_path, "Pipeline config (JSON)");
    app.add_option("--mock", global.mock_path, "Serve every model call from a response script");
    app.add_option("--seed", global.seed, "Override the config seed");
    app.add_option("--concurrency", global.concurrency, "Override the config concurrency")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", global.out, "Output directory");

    std::function<int(cli::RunContext&)> action;

    cli::FilterArgs filter;
    auto* filter_cmd = app.add_subcommand("filter", "Length, difficulty and ambiguity filtering");
    filter_cmd->add_option("--in", filter.in, "Question corpus (JSONL)")->required();
    filter_cmd->callback([&] { action = [&](cli::RunContext& c) { return cli::run_filter(c, filter); }; });

    cli::ConvertArgs convert;
    auto* convert_cmd = app.add_subcommand("convert", "Rewrite MCQs as open-ended questions");
    convert_cmd->add_option("--in", convert.in, "Question corpus (JSONL)")->required();
    convert_cmd->callback([&] { action = [&](cli::RunContext& c) { return cli::run_convert(c, convert); }; });

    cli::DistillArgs distill;
    auto* distill_cmd = app.add_subcommand("distill", "Generate and verify reasoning");
    distill_cmd->add_option("--in", distill.in, "Question or open-ended corpora (JSONL)")->required();
    distill_cmd->callback([&] { action = [&](cli::RunContext& c) { return cli::run_distill(c, distill); }; });

    cli::WorkflowArgs workflow;
    auto* workflow_cmd = app.add_subcommand("workflow", "Run the compliance workflow over dialogues");
    workflow_cmd->add_option("--graph", workflow.graph, "Workflow definition (JSON); defaults to paths.workflow");
    workflow_cmd->add_option("--in", workflow.in, "Dialogues (JSONL)")->required();
    workflow_cmd->add_flag("--synthesize", workflow.synthesize, "Gate on gold labels and merge CoTs");
    workflow_cmd->add_option("--system-name", workflow.system_name, "Row label for the calls table");
    workflow_cmd->callback([&] { action = [&](cli::RunContext& c) { return cli::run_workflow(c, workflow); }; });

    cli::BuildSftArgs build_sft;
    auto* sft_cmd = app.add_subcommand("build-sft", "Assemble a shuffled SFT mixture");
    sft_cmd->add_option("--in", build_sft.in, "Reasoning sample files (JSONL)")->required();
    sft_cmd->callback([&] { action = [&](cli::RunContext& c) { return cli::run_build_sft(c, build_sft); }; });

    cli::ScoreArgs score;
    auto* score_cmd = app.add_subcommand("score", "Format/accuracy rewards and group advantages");
    score_cmd->add_option("--in", score.in, "Rollout groups (JSONL)")->required();
    score_cmd->add_flag("--strict", score.strict, "Fail on the first malformed record");
    score_cmd->callback([&] { action = [&](cli::RunContext& c) { return cli::run_score(c, score); }; });

    cli::EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions against test sets");
    eval_cmd->add_option("--testsets", eval.testsets, "Test-set manifest (JSON)")->required();
    eval_cmd->add_option("--predictions", eval.predictions, "Predictions (JSONL)")->required();
    eval_cmd->add_flag("--official-sizes", eval.official_sizes, "Require the official split sizes");
    eval_cmd->add_option("--model", eval.model_name, "Row label for the results table");
    eval_cmd->callback([&] { action = [&](cli::RunContext& c) { return cli::run_eval(c, eval); }; });

    cli::StatsArgs stats;
    auto* stats_cmd = app.add_subcommand("stats", "Size and token statistics of a corpus");
    stats_cmd->add_option("--in", stats.in, "SFT instances or reasoning samples (JSONL)")->required();
    stats_cmd->callback([&] { action = [&](cli::RunContext& c) { return cli::run_stats(c, stats); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::config_error;
    }

    try {
        cli::RunContext ctx(global);
        return action(ctx);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return cli::config_error;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return cli::data_error;
    } catch (const gateway::ProviderError& e) {
        std::cerr << "provider error: " << e.what() << "\n";
        return cli::provider_exhausted;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::data_error;
    }
}
