#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace itc {

enum class TaskKind { math, multiple_choice };

/// Reasoning models emit a think-delimited trace before answering; the
/// distinction drives default sample counts.
enum class ModelKind { reasoning, non_reasoning };

struct Query {
    std::string id;
    TaskKind task_kind = TaskKind::math;
    std::string prompt;
    std::string gold_answer;
    std::optional<int> difficulty;

    void validate() const;
    bool operator==(const Query&) const = default;
};

struct GenerationParams {
    double temperature = 0.6;
    int max_tokens = 4096;
    std::int64_t seed = 0;
    std::optional<std::vector<std::string>> stop;

    void validate() const;
    bool operator==(const GenerationParams&) const = default;
};

/// One completion. When `reasoning` is present the full text is
/// `<think>` + reasoning + `</think>` + answer_text.
struct ModelResponse {
    std::string text;
    std::optional<std::string> reasoning;
    std::string answer_text;
    std::optional<std::string> extracted_answer;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t latency_ms = 0;

    void validate() const;
    bool operator==(const ModelResponse&) const = default;
};

struct JudgedResponse {
    ModelResponse response;
    std::vector<int> scores;
    double mean_score = 0.0;

    void validate() const;
    bool operator==(const JudgedResponse&) const = default;
};

// ---------------------------------------------------------------------------
// Strategy configuration

/// Weighting used by weighted majority voting. Inverse reasoning length is
/// the default; the other two are alternatives kept behind the same knob.
enum class VoteWeighting { inverse_length, rank, exponential_decay };

enum class RevisionSelection { last, best };

struct MajorityVote {
    int n = 100;
    bool operator==(const MajorityVote&) const = default;
};
struct WeightedMajority {
    int n = 100;
    VoteWeighting weighting = VoteWeighting::inverse_length;
    bool operator==(const WeightedMajority&) const = default;
};
struct MajorityTopK {
    int n = 100;
    int k = 50;
    bool operator==(const MajorityTopK&) const = default;
};
struct BestOfN {
    int n = 100;
    int judge_repeats = 3;
    bool operator==(const BestOfN&) const = default;
};
struct SequentialRevisions {
    int length = 4;
    RevisionSelection selection = RevisionSelection::last;
    bool operator==(const SequentialRevisions&) const = default;
};
struct ParallelSequential {
    int chains = 4;
    int length = 4;
    bool operator==(const ParallelSequential&) const = default;
};
struct PlanSearch {
    int observations = 3;
    int derived = 2;
    bool operator==(const PlanSearch&) const = default;
};
struct PVGame {
    int per_round = 3;
    int rounds = 1;
    bool operator==(const PVGame&) const = default;
};
struct MoA {
    int proposers = 4;
    int layers = 1;
    bool operator==(const MoA&) const = default;
};
struct ReasoningTruncation {
    int budget_tokens = 1024;
    bool operator==(const ReasoningTruncation&) const = default;
};

using StrategyConfig = std::variant<MajorityVote, WeightedMajority, MajorityTopK, BestOfN,
                                    SequentialRevisions, ParallelSequential, PlanSearch, PVGame,
                                    MoA, ReasoningTruncation>;

inline constexpr int reasoning_default_samples = 100;
inline constexpr int non_reasoning_default_samples = 256;
inline constexpr int default_judge_repeats = 3;

int default_sample_count(ModelKind kind);
inline int default_top_k(int n) { return n / 2; }

/// Stable snake_case name of the strategy kind, e.g. "majority_topk".
std::string_view strategy_kind(const StrategyConfig& config);
/// Kind plus parameters, e.g. "majority_topk_n8_k4"; used as a cell label.
std::string strategy_label(const StrategyConfig& config);
/// Throws ValidationError naming the first offending field.
void validate(const StrategyConfig& config);

// ---------------------------------------------------------------------------
// Run provenance

enum class CallRole { sample, judge, feedback, revision, observation, aggregate };

std::string_view to_string(CallRole role);
std::string_view to_string(TaskKind kind);
std::string_view to_string(ModelKind kind);
std::string_view to_string(VoteWeighting weighting);
std::string_view to_string(RevisionSelection selection);

/// Calls whose output can carry a final answer.
bool is_solution_role(CallRole role);

struct Call {
    CallRole role = CallRole::sample;
    std::string prompt_hash;
    ModelResponse response;

    bool operator==(const Call&) const = default;
};

struct RunRecord {
    std::string query_id;
    StrategyConfig strategy;
    std::string model_id;
    TaskKind task_kind = TaskKind::math;
    std::string gold_answer;
    std::vector<Call> calls;
    std::string final_answer;
    bool correct = false;
    std::int64_t total_completion_tokens = 0;
    /// Set when a backend failure cut the run short; the record still
    /// carries every call that completed.
    std::optional<std::string> error;

    bool operator==(const RunRecord&) const = default;
};

std::int64_t sum_completion_tokens(const std::vector<Call>& calls);
bool tokens_conserved(const RunRecord& record);
/// An empty final answer is vacuously fine; otherwise some solution-bearing
/// call must have extracted exactly that answer.
bool final_answer_has_provenance(const RunRecord& record);

} // namespace itc
