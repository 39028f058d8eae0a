#pragma once

#include "itc/backend.hpp"
#include "itc/domain.hpp"

#include <string_view>
#include <vector>

namespace itc {

/// Score assigned to a response whose every judgment was unparseable; below
/// any valid score so it never wins a selection.
inline constexpr double failed_judgment_score = -101.0;

enum class Rubric { correctness, clarity };

std::vector<Message> render_judge_prompt(std::string_view question, std::string_view response_text,
                                         Rubric rubric = Rubric::correctness);

/// Integer after the last "[Score]" tag (optional ':' and leading '+').
/// Throws ScoreMissingError or ScoreOutOfRangeError.
int parse_score(std::string_view judge_output);

struct JudgeOutcome {
    std::vector<Call> calls;
    std::vector<int> scores;
    /// Mean of the parsed scores, or failed_judgment_score when none parsed.
    double mean_score = failed_judgment_score;

    bool failed() const noexcept { return scores.empty(); }
    /// Throws JudgingFailedError when no score parsed.
    JudgedResponse to_judged(const ModelResponse& response) const;
};

/// Issues `repeats` judge calls (sample indices 0..repeats-1). An
/// unparseable or out-of-range judgment is retried once under sample index
/// repeats + i; if that also fails the judgment is dropped from the mean.
JudgeOutcome judge(const ModelClient& client, std::string_view question, std::string_view response_text,
                   int repeats = default_judge_repeats, Rubric rubric = Rubric::correctness);

/// The text a judge or reviser sees: the post-reasoning answer when a think
/// block is present, otherwise the whole completion.
std::string_view visible_text(const ModelResponse& response);

} // namespace itc
