#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "finreason/gateway.hpp"
#include "finreason/samples.hpp"

namespace finreason::workflow {

enum class Outcome { violation, no_violation };

std::string_view to_string(Outcome outcome);
Outcome parse_outcome(std::string_view name);

enum class NodeKind { start, condition, outcome };

struct Node {
    std::string id;
    NodeKind kind = NodeKind::condition;
    std::string next;                           // start only
    std::string prompt;                         // condition only; may use {dialogue} and {meta}
    std::map<std::string, std::string> branches;  // condition only: answer label -> node id
    std::optional<std::string> model;           // per-node agent override
    Outcome outcome = Outcome::no_violation;    // outcome only
};

/// Guideline graph: one start node, condition nodes, and exactly two outcome
/// nodes (violation / no_violation). Only load_workflow builds one, so every
/// instance satisfies the invariants.
class WorkflowGraph {
public:
    const Node& node(std::string_view id) const;
    const Node& start() const { return node(start_id_); }
    const std::map<std::string, Node, std::less<>>& nodes() const noexcept { return nodes_; }
    std::size_t condition_count() const noexcept;

    /// Next node after answering `label` at `condition_id`; nullopt when the
    /// label is not a branch.
    std::optional<std::string> follow(std::string_view condition_id, std::string_view label) const;

    /// Label match: exact first, then a unique case-insensitive one.
    std::optional<std::string> resolve_label(const Node& condition, std::string_view label) const;

private:
    friend WorkflowGraph load_workflow(const nlohmann::json& doc);
    std::map<std::string, Node, std::less<>> nodes_;
    std::string start_id_;
};

enum class GraphErrorKind {
    cycle_detected,
    dangling_branch,
    outcome_count_invalid,
    multiple_starts,
    unreachable_outcome,
};

std::string_view to_string(GraphErrorKind kind);

struct GraphViolation {
    GraphErrorKind kind;
    std::vector<std::string> node_ids;
    std::string message;
};

class InvalidWorkflow : public Error {
public:
    explicit InvalidWorkflow(std::vector<GraphViolation> violations);

    GraphErrorKind kind() const noexcept { return violations_.front().kind; }
    const std::vector<GraphViolation>& violations() const noexcept { return violations_; }

private:
    std::vector<GraphViolation> violations_;
};

/// Parses {"nodes": {id: {...}}} and validates every graph invariant,
/// reporting all violations at once. Throws InvalidWorkflow or DataError.
WorkflowGraph load_workflow(const nlohmann::json& doc);
WorkflowGraph load_workflow_file(const std::filesystem::path& path);
nlohmann::json to_json(const WorkflowGraph& graph);

enum class Speaker { customer, agent };

struct Turn {
    Speaker speaker = Speaker::customer;
    std::string text;
};

struct Dialogue {
    std::string id;
    std::vector<Turn> turns;
    std::map<std::string, std::string> meta;
    std::optional<Outcome> gold;

    std::string render_turns() const;
    std::string render_meta() const;
    /// Transcript plus meta block; the x of a synthesized sample.
    std::string render() const;
};

void to_json(nlohmann::json& j, const Dialogue& d);
void from_json(const nlohmann::json& j, Dialogue& d);

struct TraceStep {
    std::string node_id;
    std::string cot;
    std::string answer;  // resolved branch label
    int calls = 1;       // agent calls spent on this node, parse retries included
};

struct WorkflowTrace {
    std::vector<TraceStep> steps;
    Outcome final_answer = Outcome::no_violation;
    std::string outcome_node;

    std::size_t n_calls() const noexcept { return steps.size(); }
    /// Calls beyond one per visited node (unparseable-answer retries).
    std::size_t extra_calls() const noexcept;
    std::size_t total_calls() const noexcept { return n_calls() + extra_calls(); }
    std::vector<std::string> path() const;  // visited node ids, outcome included
};

void to_json(nlohmann::json& j, const WorkflowTrace& t);

struct NodeAnswer {
    std::string cot;
    std::string label;
};

/// Agent replies end with a line `ANSWER: <label>` (a fullwidth colon is
/// accepted); everything before it is the node's chain of thought.
std::optional<NodeAnswer> parse_node_answer(std::string_view reply);

std::string render_node_prompt(const Node& node, const Dialogue& dialogue);

class UnparseableNodeAnswer : public Error {
public:
    UnparseableNodeAnswer(std::string node_id, std::string raw, int calls);
    const std::string& node_id() const noexcept { return node_id_; }
    const std::string& raw() const noexcept { return raw_; }
    int calls() const noexcept { return calls_; }

private:
    std::string node_id_;
    std::string raw_;
    int calls_;
};

struct ExecuteOptions {
    gateway::RetryPolicy node_policy;  // parse retries per node
    std::size_t max_steps = 0;         // 0: number of condition nodes
};

/// Walks from the start node, one agent call per condition node, until an
/// outcome node. Throws UnparseableNodeAnswer or gateway::ProviderError; the
/// call count carried by either covers the whole execution so far.
WorkflowTrace execute(const WorkflowGraph& graph, const Dialogue& dialogue,
                      const gateway::Endpoint& agent, const ExecuteOptions& options = {});

/// Re-walks the graph using recorded answers; returns the visited ids.
std::vector<std::string> replay(const WorkflowGraph& graph, std::span<const std::string> answers);

class MergerUnparseable : public Error {
public:
    MergerUnparseable(std::string message, int calls);
    int calls() const noexcept { return calls_; }

private:
    int calls_;
};

std::string render_merger_prompt(std::span<const TraceStep> steps, Outcome final_answer);

struct MergeResult {
    std::string cot;
    int calls = 0;
};

MergeResult merge_cots(std::span<const TraceStep> steps, Outcome final_answer,
                       const gateway::Endpoint& merger, const gateway::RetryPolicy& policy);

struct SynthesisOutcome {
    SampleOutcome sample;
    std::vector<WorkflowTrace> traces;  // one per completed execution
    int agent_calls = 0;
    int merger_calls = 0;

    bool reasoned() const noexcept { return std::holds_alternative<ReasoningSample>(sample); }
};

struct SynthesisPolicy {
    gateway::RetryPolicy attempts;  // T: whole-workflow re-executions
    ExecuteOptions execute;
    gateway::RetryPolicy merge_policy;
};

SynthesisOutcome synthesize(const Dialogue& dialogue, Outcome gold, const WorkflowGraph& graph,
                            const gateway::Endpoint& agent, const gateway::Endpoint& merger,
                            const SynthesisPolicy& policy);

struct ExecutionResult {
    std::string dialogue_id;
    std::optional<WorkflowTrace> trace;
    std::string error;
};

struct BatchSummary {
    std::size_t dialogues = 0;
    std::size_t completed = 0;
    std::size_t correct = 0;  // completed traces matching the dialogue's gold
    std::size_t total_calls = 0;
    double accuracy = 0.0;    // percent over dialogues with gold labels
    double mean_calls = 0.0;  // mean condition-node calls per completed dialogue

    nlohmann::json to_json() const;
    /// Two-row "System | Accuracy | #Calls" markdown table.
    std::string to_table(std::string_view system_name) const;
};

std::vector<ExecutionResult> execute_batch(const WorkflowGraph& graph,
                                           const std::vector<Dialogue>& dialogues,
                                           const gateway::Endpoint& agent,
                                           const ExecuteOptions& options, std::size_t concurrency);

BatchSummary summarize(const std::vector<Dialogue>& dialogues,
                       const std::vector<ExecutionResult>& results);

}  // namespace finreason::workflow
