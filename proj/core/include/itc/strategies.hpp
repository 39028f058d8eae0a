#pragma once

#include "itc/answer.hpp"
#include "itc/backend.hpp"
#include "itc/domain.hpp"

#include <optional>
#include <span>
#include <vector>

namespace itc {

// ---------------------------------------------------------------------------
// Selection primitives. All ties go to the earliest sample index.

struct VoteClass {
    NormalizedAnswer representative;
    std::vector<std::size_t> members;
    double weight = 0.0;
};

/// Equivalence classes in order of first appearance.
struct VoteTally {
    std::vector<VoteClass> classes;
};

struct VoteResult {
    NormalizedAnswer answer;
    std::size_t winner = 0;
    VoteTally tally;
};

/// Partitions the extracted answers into answers_equivalent classes and
/// returns the heaviest. Without weights a class weighs its member count;
/// with weights (one per answer) it weighs the sum of its members' weights.
/// Throws NoAnswerError when no answer is present.
VoteResult majority_vote(std::span<const std::optional<NormalizedAnswer>> answers,
                         std::span<const double> weights = {});

/// Length used by weighted voting: whitespace tokens of the reasoning, or the
/// completion token count when the response has no reasoning segment.
std::size_t vote_length(const ModelResponse& response);

std::vector<double> vote_weights(std::span<const std::size_t> lengths,
                                 VoteWeighting weighting = VoteWeighting::inverse_length);

VoteResult weighted_majority(std::span<const std::optional<NormalizedAnswer>> answers,
                             std::span<const std::size_t> lengths,
                             VoteWeighting weighting = VoteWeighting::inverse_length);

/// Indices of the k highest scores (ties by earlier index), in index order.
std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k);

VoteResult majority_topk(std::span<const std::optional<NormalizedAnswer>> answers, std::span<const double> scores,
                         std::size_t k);

/// Index of the highest-scored sample that has an answer.
/// Throws NoAnswerError when none has one.
std::size_t best_of_n(std::span<const std::optional<NormalizedAnswer>> answers, std::span<const double> scores);

// ---------------------------------------------------------------------------
// Strategy runners

struct StrategyContext {
    ModelClient client;
    /// Judge repeats for strategies whose config has no judge_repeats field.
    int judge_repeats = default_judge_repeats;
    /// Upper bound on concurrently running samples, chains, or proposers.
    std::size_t workers = 8;
};

RunRecord run_strategy(const Query& query, const StrategyConfig& config, const StrategyContext& ctx);

RunRecord sample_and_vote(const Query& query, const StrategyConfig& config, const StrategyContext& ctx);
RunRecord sequential_revisions(const Query& query, const SequentialRevisions& config, const StrategyContext& ctx);
RunRecord parallel_sequential(const Query& query, const ParallelSequential& config, const StrategyContext& ctx);
RunRecord plansearch(const Query& query, const PlanSearch& config, const StrategyContext& ctx);
RunRecord pvgame(const Query& query, const PVGame& config, const StrategyContext& ctx);
RunRecord moa(const Query& query, const MoA& config, const StrategyContext& ctx);
RunRecord reasoning_truncation(const Query& query, const ReasoningTruncation& config, const StrategyContext& ctx);

} // namespace itc
