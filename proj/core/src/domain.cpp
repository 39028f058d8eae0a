#include "itc/domain.hpp"

#include "itc/error.hpp"

#include <algorithm>
#include <numeric>

namespace itc {

void Query::validate() const {
    if (id.empty()) throw ValidationError("id", "must be non-empty");
    if (gold_answer.empty()) throw ValidationError("gold_answer", "must be non-empty");
    if (difficulty && (*difficulty < 1 || *difficulty > 5))
        throw ValidationError("difficulty", "must lie in [1, 5]");
}

void GenerationParams::validate() const {
    if (!(temperature >= 0.0)) throw ValidationError("temperature", "must be non-negative");
    if (max_tokens < 1) throw ValidationError("max_tokens", "must be at least 1");
}

void ModelResponse::validate() const {
    if (completion_tokens < 0) throw ValidationError("completion_tokens", "must be non-negative");
    if (prompt_tokens < 0) throw ValidationError("prompt_tokens", "must be non-negative");
    if (reasoning && text != "<think>" + *reasoning + "</think>" + answer_text)
        throw ValidationError("text", "does not equal the think-delimited reasoning plus answer text");
}

void JudgedResponse::validate() const {
    if (scores.empty()) throw ValidationError("scores", "at least one score is required");
    for (int s : scores)
        if (s < -100 || s > 100) throw ValidationError("scores", "score outside [-100, 100]");
    double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
    if (mean != mean_score) throw ValidationError("mean_score", "is not the mean of scores");
}

int default_sample_count(ModelKind kind) {
    return kind == ModelKind::reasoning ? reasoning_default_samples : non_reasoning_default_samples;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(int value, const char* field) {
    if (value < 1) throw ValidationError(field, "must be at least 1");
}

} // namespace

std::string_view strategy_kind(const StrategyConfig& config) {
    return std::visit(overloaded{
                          [](const MajorityVote&) { return std::string_view("majority_vote"); },
                          [](const WeightedMajority&) { return std::string_view("weighted_majority"); },
                          [](const MajorityTopK&) { return std::string_view("majority_topk"); },
                          [](const BestOfN&) { return std::string_view("best_of_n"); },
                          [](const SequentialRevisions&) { return std::string_view("sequential_revisions"); },
                          [](const ParallelSequential&) { return std::string_view("parallel_sequential"); },
                          [](const PlanSearch&) { return std::string_view("plansearch"); },
                          [](const PVGame&) { return std::string_view("pvgame"); },
                          [](const MoA&) { return std::string_view("moa"); },
                          [](const ReasoningTruncation&) { return std::string_view("reasoning_truncation"); },
                      },
                      config);
}

std::string strategy_label(const StrategyConfig& config) {
    auto num = [](const char* key, int v) { return std::string("_") + key + std::to_string(v); };
    std::string suffix = std::visit(
        overloaded{
            [&](const MajorityVote& c) { return num("n", c.n); },
            [&](const WeightedMajority& c) {
                std::string s = num("n", c.n);
                if (c.weighting != VoteWeighting::inverse_length) s += "_" + std::string(to_string(c.weighting));
                return s;
            },
            [&](const MajorityTopK& c) { return num("n", c.n) + num("k", c.k); },
            [&](const BestOfN& c) { return num("n", c.n) + num("j", c.judge_repeats); },
            [&](const SequentialRevisions& c) {
                return num("len", c.length) + "_" + std::string(to_string(c.selection));
            },
            [&](const ParallelSequential& c) { return num("chains", c.chains) + num("len", c.length); },
            [&](const PlanSearch& c) { return num("obs", c.observations) + num("derived", c.derived); },
            [&](const PVGame& c) { return num("per", c.per_round) + num("rounds", c.rounds); },
            [&](const MoA& c) { return num("proposers", c.proposers) + num("layers", c.layers); },
            [&](const ReasoningTruncation& c) { return num("budget", c.budget_tokens); },
        },
        config);
    return std::string(strategy_kind(config)) + suffix;
}

void validate(const StrategyConfig& config) {
    std::visit(overloaded{
                   [](const MajorityVote& c) { require_positive(c.n, "n"); },
                   [](const WeightedMajority& c) { require_positive(c.n, "n"); },
                   [](const MajorityTopK& c) {
                       require_positive(c.n, "n");
                       require_positive(c.k, "k");
                       if (c.k > c.n) throw ValidationError("k", "must not exceed n");
                   },
                   [](const BestOfN& c) {
                       require_positive(c.n, "n");
                       require_positive(c.judge_repeats, "judge_repeats");
                   },
                   [](const SequentialRevisions& c) { require_positive(c.length, "length"); },
                   [](const ParallelSequential& c) {
                       require_positive(c.chains, "chains");
                       require_positive(c.length, "length");
                   },
                   [](const PlanSearch& c) {
                       require_positive(c.observations, "observations");
                       if (c.derived < 0) throw ValidationError("derived", "must be non-negative");
                   },
                   [](const PVGame& c) {
                       require_positive(c.per_round, "per_round");
                       require_positive(c.rounds, "rounds");
                   },
                   [](const MoA& c) {
                       if (c.proposers < 2) throw ValidationError("proposers", "must be at least 2");
                       require_positive(c.layers, "layers");
                   },
                   [](const ReasoningTruncation& c) {
                       if (c.budget_tokens < 0) throw ValidationError("budget_tokens", "must be non-negative");
                   },
               },
               config);
}

std::string_view to_string(CallRole role) {
    switch (role) {
    case CallRole::sample: return "sample";
    case CallRole::judge: return "judge";
    case CallRole::feedback: return "feedback";
    case CallRole::revision: return "revision";
    case CallRole::observation: return "observation";
    case CallRole::aggregate: return "aggregate";
    }
    return "unknown";
}

std::string_view to_string(TaskKind kind) {
    return kind == TaskKind::math ? "math" : "multiple_choice";
}

std::string_view to_string(ModelKind kind) {
    return kind == ModelKind::reasoning ? "reasoning" : "non_reasoning";
}

std::string_view to_string(VoteWeighting weighting) {
    switch (weighting) {
    case VoteWeighting::inverse_length: return "inverse_length";
    case VoteWeighting::rank: return "rank";
    case VoteWeighting::exponential_decay: return "exponential_decay";
    }
    return "unknown";
}

std::string_view to_string(RevisionSelection selection) {
    return selection == RevisionSelection::last ? "last" : "best";
}

bool is_solution_role(CallRole role) {
    return role == CallRole::sample || role == CallRole::revision || role == CallRole::aggregate;
}

std::int64_t sum_completion_tokens(const std::vector<Call>& calls) {
    std::int64_t total = 0;
    for (const auto& c : calls) total += c.response.completion_tokens;
    return total;
}

bool tokens_conserved(const RunRecord& record) {
    return record.total_completion_tokens == sum_completion_tokens(record.calls);
}

bool final_answer_has_provenance(const RunRecord& record) {
    if (record.final_answer.empty()) return true;
    return std::any_of(record.calls.begin(), record.calls.end(), [&](const Call& c) {
        return is_solution_role(c.role) && c.response.extracted_answer == record.final_answer;
    });
}

} // namespace itc
