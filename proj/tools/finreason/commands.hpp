#pragma once

#include <string>
#include <vector>

#include "context.hpp"

namespace finreason::cli {

struct FilterArgs {
    std::string in;
};

struct ConvertArgs {
    std::string in;
};

struct DistillArgs {
    std::vector<std::string> in;
};

struct WorkflowArgs {
    std::string graph;
    std::string in;
    bool synthesize = false;
    std::string system_name;
};

struct BuildSftArgs {
    std::vector<std::string> in;
};

struct ScoreArgs {
    std::string in;
    bool strict = false;
};

struct EvalArgs {
    std::string testsets;
    std::string predictions;
    bool official_sizes = false;
    std::string model_name = "model";
};

struct StatsArgs {
    std::string in;
};

int run_filter(RunContext& ctx, const FilterArgs& args);
int run_convert(RunContext& ctx, const ConvertArgs& args);
int run_distill(RunContext& ctx, const DistillArgs& args);
int run_workflow(RunContext& ctx, const WorkflowArgs& args);
int run_build_sft(RunContext& ctx, const BuildSftArgs& args);
int run_score(RunContext& ctx, const ScoreArgs& args);
int run_eval(RunContext& ctx, const EvalArgs& args);
int run_stats(RunContext& ctx, const StatsArgs& args);

}  // namespace finreason::cli
