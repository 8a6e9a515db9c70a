#include "finreason/workflow.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "finreason/parallel.hpp"
#include "finreason/template.hpp"
#include "finreason/text.hpp"

namespace finreason::workflow {

std::string_view to_string(Outcome outcome) {
    return outcome == Outcome::violation ? "violation" : "no_violation";
}

Outcome parse_outcome(std::string_view name) {
    if (name == "violation") return Outcome::violation;
    if (name == "no_violation") return Outcome::no_violation;
    throw DataError("unknown outcome: '" + std::string(name) + "'");
}

namespace {

std::string_view to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::start: return "start";
        case NodeKind::condition: return "condition";
        case NodeKind::outcome: return "outcome";
    }
    return "condition";
}

NodeKind parse_kind(std::string_view name) {
    if (name == "start") return NodeKind::start;
    if (name == "condition") return NodeKind::condition;
    if (name == "outcome") return NodeKind::outcome;
    throw DataError("unknown node kind: '" + std::string(name) + "'");
}

std::vector<std::string> successors(const Node& node) {
    switch (node.kind) {
        case NodeKind::start: return {node.next};
        case NodeKind::condition: {
            std::vector<std::string> out;
            for (const auto& [label, target] : node.branches) out.push_back(target);
            return out;
        }
        case NodeKind::outcome: return {};
    }
    return {};
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out.append(sep);
        out.append(items[i]);
    }
    return out;
}

}  // namespace

const Node& WorkflowGraph::node(std::string_view id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw DataError("workflow has no node '" + std::string(id) + "'");
    return it->second;
}

std::size_t WorkflowGraph::condition_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& kv) {
        return kv.second.kind == NodeKind::condition;
    }));
}

std::optional<std::string> WorkflowGraph::resolve_label(const Node& condition,
                                                        std::string_view label) const {
    if (condition.branches.count(std::string(label))) return std::string(label);
    const auto wanted = text::to_upper_ascii(label);
    std::optional<std::string> match;
    for (const auto& [name, target] : condition.branches) {
        if (text::to_upper_ascii(name) != wanted) continue;
        if (match) return std::nullopt;
        match = name;
    }
    return match;
}

std::optional<std::string> WorkflowGraph::follow(std::string_view condition_id,
                                                 std::string_view label) const {
    const auto& n = node(condition_id);
    if (n.kind != NodeKind::condition) return std::nullopt;
    const auto resolved = resolve_label(n, label);
    if (!resolved) return std::nullopt;
    return n.branches.at(*resolved);
}

std::string_view to_string(GraphErrorKind kind) {
    switch (kind) {
        case GraphErrorKind::cycle_detected: return "CycleDetected";
        case GraphErrorKind::dangling_branch: return "DanglingBranch";
        case GraphErrorKind::outcome_count_invalid: return "OutcomeCountInvalid";
        case GraphErrorKind::multiple_starts: return "MultipleStarts";
        case GraphErrorKind::unreachable_outcome: return "UnreachableOutcome";
    }
    return "DanglingBranch";
}

namespace {

std::string describe(const std::vector<GraphViolation>& violations) {
    std::string out = "invalid workflow:";
    for (const auto& v : violations) {
        out += " [" + std::string(to_string(v.kind)) + "] " + v.message + ";";
    }
    out.pop_back();
    return out;
}

Node parse_node(const std::string& id, const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("workflow node '" + id + "' must be an object");
    Node n;
    n.id = id;
    n.kind = parse_kind(j.at("kind").get<std::string>());
    switch (n.kind) {
        case NodeKind::start:
            n.next = j.value("next", std::string());
            break;
        case NodeKind::condition:
            n.prompt = j.value("prompt", std::string());
            if (j.contains("branches")) {
                for (const auto& [label, target] : j["branches"].items()) {
                    n.branches[label] = target.get<std::string>();
                }
            }
            if (j.contains("model") && j["model"].is_string()) n.model = j["model"].get<std::string>();
            break;
        case NodeKind::outcome:
            n.outcome = parse_outcome(j.value("outcome", id));
            break;
    }
    return n;
}

void find_cycles(const std::map<std::string, Node, std::less<>>& nodes,
                 std::vector<GraphViolation>& violations) {
    enum class Mark { unvisited, active, done };
    std::map<std::string, Mark, std::less<>> marks;
    for (const auto& [id, _] : nodes) marks[id] = Mark::unvisited;
    std::vector<std::string> stack;
    std::set<std::string> reported;

    std::function<void(const std::string&)> visit = [&](const std::string& id) {
        marks[id] = Mark::active;
        stack.push_back(id);
        for (const auto& next : successors(nodes.at(id))) {
            auto it = marks.find(next);
            if (it == marks.end()) continue;
            if (it->second == Mark::active) {
                auto from = std::find(stack.begin(), stack.end(), next);
                std::vector<std::string> cycle(from, stack.end());
                cycle.push_back(next);
                const auto key = join(cycle, "->");
                if (reported.insert(key).second) {
                    violations.push_back(
                        {GraphErrorKind::cycle_detected, cycle, "cycle " + key});
                }
            } else if (it->second == Mark::unvisited) {
                visit(next);
            }
        }
        stack.pop_back();
        marks[id] = Mark::done;
    };
    for (const auto& [id, _] : nodes) {
        if (marks[id] == Mark::unvisited) visit(id);
    }
}

}  // namespace

InvalidWorkflow::InvalidWorkflow(std::vector<GraphViolation> violations)
    : Error(describe(violations)), violations_(std::move(violations)) {}

WorkflowGraph load_workflow(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_object()) {
        throw DataError("workflow document needs a top-level \"nodes\" object");
    }
    WorkflowGraph graph;
    try {
        for (const auto& [id, body] : doc["nodes"].items()) graph.nodes_.emplace(id, parse_node(id, body));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed workflow node: ") + e.what());
    }
    const auto& nodes = graph.nodes_;

    std::vector<GraphViolation> violations;
    std::vector<std::string> starts;
    std::vector<std::string> outcomes;
    std::set<Outcome> outcome_kinds;
    for (const auto& [id, n] : nodes) {
        if (n.kind == NodeKind::start) starts.push_back(id);
        if (n.kind == NodeKind::outcome) {
            outcomes.push_back(id);
            outcome_kinds.insert(n.outcome);
        }
    }
    if (starts.size() != 1) {
        violations.push_back({GraphErrorKind::multiple_starts, starts,
                              "expected exactly one start node, found " +
                                  std::to_string(starts.size()) +
                                  (starts.empty() ? "" : " (" + join(starts, ", ") + ")")});
    }
    if (outcomes.size() != 2 || outcome_kinds.size() != 2) {
        violations.push_back({GraphErrorKind::outcome_count_invalid, outcomes,
                              "expected one violation and one no_violation outcome node, found " +
                                  std::to_string(outcomes.size()) +
                                  (outcomes.empty() ? "" : " (" + join(outcomes, ", ") + ")")});
    }

    for (const auto& [id, n] : nodes) {
        if (n.kind == NodeKind::condition && n.branches.empty()) {
            violations.push_back({GraphErrorKind::dangling_branch, {id},
                                  "condition '" + id + "' has no branches"});
        }
        for (const auto& target : successors(n)) {
            const auto it = nodes.find(target);
            if (it == nodes.end()) {
                violations.push_back({GraphErrorKind::dangling_branch, {id, target},
                                      "node '" + id + "' points to missing node '" + target + "'"});
            } else if (it->second.kind == NodeKind::start) {
                violations.push_back({GraphErrorKind::dangling_branch, {id, target},
                                      "node '" + id + "' points back to start node '" + target + "'"});
            }
        }
    }

    find_cycles(nodes, violations);

    if (starts.size() == 1) {
        graph.start_id_ = starts.front();
        std::set<std::string> seen;
        std::vector<std::string> todo{graph.start_id_};
        while (!todo.empty()) {
            const auto id = todo.back();
            todo.pop_back();
            if (!seen.insert(id).second) continue;
            auto it = nodes.find(id);
            if (it == nodes.end()) continue;
            for (const auto& next : successors(it->second)) todo.push_back(next);
        }
        for (const auto& id : outcomes) {
            if (!seen.count(id)) {
                violations.push_back({GraphErrorKind::unreachable_outcome, {id},
                                      "outcome '" + id + "' is not reachable from start"});
            }
        }
    }

    if (!violations.empty()) throw InvalidWorkflow(std::move(violations));
    return graph;
}

WorkflowGraph load_workflow_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open workflow file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("workflow file " + path.string() + " is not valid JSON: " + e.what());
    }
    return load_workflow(doc);
}

nlohmann::json to_json(const WorkflowGraph& graph) {
    nlohmann::json nodes = nlohmann::json::object();
    for (const auto& [id, n] : graph.nodes()) {
        nlohmann::json j{{"kind", to_string(n.kind)}};
        switch (n.kind) {
            case NodeKind::start: j["next"] = n.next; break;
            case NodeKind::condition:
                j["prompt"] = n.prompt;
                j["branches"] = n.branches;
                if (n.model) j["model"] = *n.model;
                break;
            case NodeKind::outcome: j["outcome"] = to_string(n.outcome); break;
        }
        nodes[id] = std::move(j);
    }
    return {{"nodes", nodes}};
}

std::string Dialogue::render_turns() const {
    std::string out;
    for (const auto& t : turns) {
        if (!out.empty()) out += '\n';
        out += t.speaker == Speaker::customer ? "Customer: " : "Agent: ";
        out += t.text;
    }
    return out;
}

std::string Dialogue::render_meta() const {
    if (meta.empty()) return "(none)";
    std::string out;
    for (const auto& [key, value] : meta) {
        if (!out.empty()) out += '\n';
        out += key + ": " + value;
    }
    return out;
}

std::string Dialogue::render() const {
    return "### Dialogue:\n" + render_turns() + "\n\n### Meta Information:\n" + render_meta();
}

void to_json(nlohmann::json& j, const Dialogue& d) {
    nlohmann::json turns = nlohmann::json::array();
    for (const auto& t : d.turns) {
        turns.push_back({{"speaker", t.speaker == Speaker::customer ? "customer" : "agent"},
                         {"text", t.text}});
    }
    j = {{"id", d.id}, {"turns", turns}, {"meta", d.meta}};
    if (d.gold) j["gold"] = to_string(*d.gold);
}

void from_json(const nlohmann::json& j, Dialogue& d) {
    d = Dialogue{};
    d.id = j.at("id").get<std::string>();
    for (const auto& t : j.at("turns")) {
        const auto speaker = t.at("speaker").get<std::string>();
        if (speaker != "customer" && speaker != "agent") {
            throw DataError("dialogue '" + d.id + "': unknown speaker '" + speaker + "'");
        }
        d.turns.push_back({speaker == "customer" ? Speaker::customer : Speaker::agent,
                           t.at("text").get<std::string>()});
    }
    if (d.turns.empty()) throw DataError("dialogue '" + d.id + "' has no turns");
    if (j.contains("meta")) {
        for (const auto& [key, value] : j["meta"].items()) {
            d.meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
        }
    }
    if (j.contains("gold") && !j["gold"].is_null()) d.gold = parse_outcome(j["gold"].get<std::string>());
}

std::size_t WorkflowTrace::extra_calls() const noexcept {
    std::size_t total = 0;
    for (const auto& s : steps) total += static_cast<std::size_t>(s.calls);
    return total > steps.size() ? total - steps.size() : 0;
}

std::vector<std::string> WorkflowTrace::path() const {
    std::vector<std::string> out;
    out.reserve(steps.size() + 1);
    for (const auto& s : steps) out.push_back(s.node_id);
    out.push_back(outcome_node);
    return out;
}

void to_json(nlohmann::json& j, const WorkflowTrace& t) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : t.steps) {
        steps.push_back({{"node_id", s.node_id}, {"cot", s.cot}, {"answer", s.answer}, {"calls", s.calls}});
    }
    j = {{"steps", steps},
         {"final_answer", to_string(t.final_answer)},
         {"outcome_node", t.outcome_node},
         {"path", t.path()},
         {"n_calls", t.n_calls()},
         {"extra_calls", t.extra_calls()}};
}

std::optional<NodeAnswer> parse_node_answer(std::string_view reply) {
    const auto lines = text::split_lines(reply);
    std::size_t last = lines.size();
    while (last > 0 && text::is_blank(lines[last - 1])) --last;
    if (last == 0) return std::nullopt;

    const auto line = text::trim(lines[last - 1]);
    constexpr std::string_view kKey = "ANSWER";
    if (line.size() < kKey.size() || text::to_upper_ascii(line.substr(0, kKey.size())) != kKey) {
        return std::nullopt;
    }
    auto rest = line.substr(kKey.size());
    if (text::starts_with(rest, ":")) {
        rest.remove_prefix(1);
    } else if (text::starts_with(rest, "：")) {
        rest.remove_prefix(std::string_view("：").size());
    } else {
        return std::nullopt;
    }
    auto label = text::trim(rest);
    while (!label.empty() && (label.front() == '*' || label.front() == '`')) label.remove_prefix(1);
    while (!label.empty() && (label.back() == '*' || label.back() == '`' || label.back() == '.')) {
        label.remove_suffix(1);
    }
    label = text::trim(label);
    if (label.empty()) return std::nullopt;

    std::string cot;
    for (std::size_t i = 0; i + 1 < last; ++i) {
        if (i) cot += '\n';
        cot.append(lines[i]);
    }
    return NodeAnswer{std::string(text::trim(cot)), std::string(label)};
}

std::string render_node_prompt(const Node& node, const Dialogue& dialogue) {
    std::vector<std::string> labels;
    for (const auto& [label, _] : node.branches) labels.push_back(label);
    const auto turns = dialogue.render_turns();
    const auto meta = dialogue.render_meta();
    return render_template(prompts::builtin("node_contract"),
                           {{"prompt", render_template(node.prompt, {{"dialogue", turns}, {"meta", meta}})},
                            {"dialogue", turns},
                            {"meta", meta},
                            {"labels", join(labels, ", ")}});
}

UnparseableNodeAnswer::UnparseableNodeAnswer(std::string node_id, std::string raw, int calls)
    : Error("agent answer at node '" + node_id + "' matches no branch label"),
      node_id_(std::move(node_id)),
      raw_(std::move(raw)),
      calls_(calls) {}

WorkflowTrace execute(const WorkflowGraph& graph, const Dialogue& dialogue,
                      const gateway::Endpoint& agent, const ExecuteOptions& options) {
    options.node_policy.validate();
    const std::size_t max_steps = options.max_steps ? options.max_steps : graph.condition_count();
    WorkflowTrace trace;
    int spent = 0;
    const Node* current = &graph.node(graph.start().next);
    while (current->kind == NodeKind::condition) {
        if (trace.steps.size() >= max_steps) {
            throw Error("workflow execution exceeded " + std::to_string(max_steps) + " steps");
        }
        gateway::Endpoint endpoint = agent;
        if (current->model) endpoint.model = *current->model;
        const auto prompt = render_node_prompt(*current, dialogue);

        TraceStep step;
        step.node_id = current->id;
        step.calls = 0;
        std::string last_raw;
        std::optional<std::string> target;
        for (int attempt = 0; attempt < options.node_policy.max_attempts && !target; ++attempt) {
            try {
                const auto response = endpoint.ask(prompt);
                step.calls += response.attempts;
                last_raw = response.text;
            } catch (gateway::ProviderError& e) {
                e.set_attempts(spent + step.calls + e.attempts());
                throw;
            }
            const auto parsed = parse_node_answer(last_raw);
            if (!parsed) continue;
            const auto label = graph.resolve_label(*current, parsed->label);
            if (!label) continue;
            step.cot = parsed->cot;
            step.answer = *label;
            target = current->branches.at(*label);
        }
        if (!target) throw UnparseableNodeAnswer(current->id, last_raw, spent + step.calls);
        spent += step.calls;
        trace.steps.push_back(std::move(step));
        current = &graph.node(*target);
    }
    trace.final_answer = current->outcome;
    trace.outcome_node = current->id;
    return trace;
}

std::vector<std::string> replay(const WorkflowGraph& graph, std::span<const std::string> answers) {
    std::vector<std::string> path;
    const Node* current = &graph.node(graph.start().next);
    std::size_t i = 0;
    while (current->kind == NodeKind::condition) {
        if (i >= answers.size()) throw DataError("replay ran out of answers at '" + current->id + "'");
        path.push_back(current->id);
        const auto next = graph.follow(current->id, answers[i]);
        if (!next) {
            throw DataError("replay answer '" + answers[i] + "' is not a branch of '" + current->id + "'");
        }
        current = &graph.node(*next);
        ++i;
    }
    path.push_back(current->id);
    return path;
}

MergerUnparseable::MergerUnparseable(std::string message, int calls)
    : Error(std::move(message)), calls_(calls) {}

std::string render_merger_prompt(std::span<const TraceStep> steps, Outcome final_answer) {
    std::string listing;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i) listing += "\n\n";
        listing += "Step " + std::to_string(i + 1) + " [" + steps[i].node_id + " -> " +
                   steps[i].answer + "]:\n" + steps[i].cot;
    }
    return render_template(prompts::builtin("merger"),
                           {{"steps", listing}, {"final_answer", std::string(to_string(final_answer))}});
}

MergeResult merge_cots(std::span<const TraceStep> steps, Outcome final_answer,
                       const gateway::Endpoint& merger, const gateway::RetryPolicy& policy) {
    if (steps.empty()) throw DataError("merge_cots needs at least one step");
    policy.validate();
    const auto prompt = render_merger_prompt(steps, final_answer);
    MergeResult result;
    for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
        try {
            const auto response = merger.ask(prompt);
            result.calls += response.attempts;
            const auto merged = text::trim(response.text);
            if (!merged.empty()) {
                result.cot = std::string(merged);
                return result;
            }
        } catch (gateway::ProviderError& e) {
            e.set_attempts(result.calls + e.attempts());
            throw;
        }
    }
    throw MergerUnparseable("merger returned no usable text after " +
                                std::to_string(policy.max_attempts) + " attempt(s)",
                            result.calls);
}

SynthesisOutcome synthesize(const Dialogue& dialogue, Outcome gold, const WorkflowGraph& graph,
                            const gateway::Endpoint& agent, const gateway::Endpoint& merger,
                            const SynthesisPolicy& policy) {
    policy.attempts.validate();
    SynthesisOutcome out;
    std::vector<FailureReason> reasons;
    for (int attempt = 1; attempt <= policy.attempts.max_attempts; ++attempt) {
        WorkflowTrace trace;
        try {
            trace = execute(graph, dialogue, agent, policy.execute);
        } catch (const UnparseableNodeAnswer& e) {
            out.agent_calls += e.calls();
            reasons.push_back(FailureReason::unparseable);
            continue;
        } catch (const gateway::ProviderError& e) {
            out.agent_calls += e.attempts();
            reasons.push_back(FailureReason::provider_error);
            continue;
        }
        out.agent_calls += static_cast<int>(trace.total_calls());
        out.traces.push_back(trace);
        if (trace.final_answer != gold) {
            reasons.push_back(FailureReason::wrong_answer);
            continue;
        }
        try {
            auto merged = merge_cots(trace.steps, trace.final_answer, merger, policy.merge_policy);
            out.merger_calls += merged.calls;
            out.sample = ReasoningSample{dialogue.id,
                                         Source::ccc,
                                         Language::zh,
                                         dialogue.render(),
                                         std::move(merged.cot),
                                         std::string(to_string(gold)),
                                         std::string(to_string(trace.final_answer)),
                                         attempt,
                                         {}};
            return out;
        } catch (const MergerUnparseable& e) {
            out.merger_calls += e.calls();
            reasons.push_back(FailureReason::unparseable);
        } catch (const gateway::ProviderError& e) {
            out.merger_calls += e.attempts();
            reasons.push_back(FailureReason::provider_error);
        }
    }
    out.sample = HardSample{dialogue.id, Source::ccc, Language::zh, dialogue.render(),
                            std::string(to_string(gold)), policy.attempts.max_attempts,
                            std::move(reasons)};
    return out;
}

std::vector<ExecutionResult> execute_batch(const WorkflowGraph& graph,
                                           const std::vector<Dialogue>& dialogues,
                                           const gateway::Endpoint& agent,
                                           const ExecuteOptions& options, std::size_t concurrency) {
    if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    std::vector<ExecutionResult> results(dialogues.size());
    parallel_for(dialogues.size(), concurrency, [&](std::size_t i) {
        results[i].dialogue_id = dialogues[i].id;
        try {
            results[i].trace = execute(graph, dialogues[i], agent, options);
        } catch (const UnparseableNodeAnswer& e) {
            results[i].error = e.what();
        } catch (const gateway::ProviderError& e) {
            results[i].error = e.what();
        }
    });
    return results;
}

namespace {

std::string fixed_2dp(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

nlohmann::json BatchSummary::to_json() const {
    return {{"dialogues", dialogues},   {"completed", completed},
            {"correct", correct},       {"total_calls", total_calls},
            {"accuracy", accuracy},     {"mean_calls", mean_calls},
            {"mean_calls_2dp", fixed_2dp(mean_calls)}};
}

std::string BatchSummary::to_table(std::string_view system_name) const {
    std::ostringstream out;
    out << "| System | Accuracy | #Calls |\n"
        << "|--------|----------|--------|\n"
        << "| " << system_name << " | " << fixed_2dp(accuracy) << " | " << fixed_2dp(mean_calls)
        << " |\n";
    return out.str();
}

BatchSummary summarize(const std::vector<Dialogue>& dialogues,
                       const std::vector<ExecutionResult>& results) {
    if (dialogues.size() != results.size()) {
        throw DataError("summarize: dialogue and result counts differ");
    }
    BatchSummary s;
    s.dialogues = dialogues.size();
    std::size_t labelled = 0;
    std::size_t visited = 0;
    for (std::size_t i = 0; i < dialogues.size(); ++i) {
        if (dialogues[i].gold) ++labelled;
        const auto& trace = results[i].trace;
        if (!trace) continue;
        ++s.completed;
        visited += trace->n_calls();
        s.total_calls += trace->total_calls();
        if (dialogues[i].gold && *dialogues[i].gold == trace->final_answer) ++s.correct;
    }
    s.accuracy = labelled ? 100.0 * static_cast<double>(s.correct) / static_cast<double>(labelled) : 0.0;
    s.mean_calls = s.completed ? static_cast<double>(visited) / static_cast<double>(s.completed) : 0.0;
    return s;
}

}  // namespace finreason::workflow
