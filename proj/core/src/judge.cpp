#include "itc/judge.hpp"

#include "itc/error.hpp"
#include "itc/prompts.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <charconv>
#include <numeric>

namespace itc {

std::vector<Message> render_judge_prompt(std::string_view question, std::string_view response_text, Rubric rubric) {
    auto tpl = rubric == Rubric::correctness ? assets::judge : assets::clarity_judge;
    return {{MessageRole::user,
             render_template(tpl, {{"question", std::string(question)}, {"response", std::string(response_text)}})}};
}

int parse_score(std::string_view judge_output) {
    static constexpr std::string_view tag = "[Score]";
    auto pos = judge_output.rfind(tag);
    if (pos == std::string_view::npos) throw ScoreMissingError("no [Score] tag in judge output");

    auto rest = judge_output.substr(pos + tag.size());
    std::size_t i = 0;
    auto skip_space = [&] {
        while (i < rest.size() && std::isspace(static_cast<unsigned char>(rest[i]))) ++i;
    };
    skip_space();
    if (i < rest.size() && rest[i] == ':') {
        ++i;
        skip_space();
    }
    bool negative = false;
    if (i < rest.size() && (rest[i] == '+' || rest[i] == '-')) {
        negative = rest[i] == '-';
        ++i;
    }
    auto digits_start = i;
    while (i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]))) ++i;
    if (i == digits_start) throw ScoreMissingError("no integer after [Score] tag");

    long long value = 0;
    auto [_, ec] = std::from_chars(rest.data() + digits_start, rest.data() + i, value);
    if (ec == std::errc::result_out_of_range) throw ScoreOutOfRangeError(negative ? -1000 : 1000);
    if (negative) value = -value;
    if (value < -100 || value > 100) throw ScoreOutOfRangeError(value);
    return static_cast<int>(value);
}

JudgedResponse JudgeOutcome::to_judged(const ModelResponse& response) const {
    if (failed()) throw JudgingFailedError("every judgment was unparseable");
    return {response, scores, mean_score};
}

JudgeOutcome judge(const ModelClient& client, std::string_view question, std::string_view response_text, int repeats,
                   Rubric rubric) {
    if (repeats < 1) throw ValidationError("repeats", "must be at least 1");
    JudgeOutcome outcome;
    auto messages = render_judge_prompt(question, response_text, rubric);

    for (int r = 0; r < repeats; ++r) {
        for (int sample_index : {r, repeats + r}) {
            auto completion = client.complete(messages, sample_index);
            outcome.calls.push_back({CallRole::judge, completion.prompt_hash, completion.response});
            try {
                outcome.scores.push_back(parse_score(completion.response.answer_text));
                break;
            } catch (const Error& e) {
                spdlog::debug("judgment {} unusable ({}){}", sample_index, e.what(),
                              sample_index == r ? "; retrying" : "; dropping");
            }
        }
    }

    if (outcome.scores.empty()) {
        spdlog::warn("all {} judgments unparseable; scoring response as {}", repeats, failed_judgment_score);
        outcome.mean_score = failed_judgment_score;
    } else {
        outcome.mean_score = std::accumulate(outcome.scores.begin(), outcome.scores.end(), 0.0) /
                             static_cast<double>(outcome.scores.size());
    }
    return outcome;
}

std::string_view visible_text(const ModelResponse& response) {
    return response.reasoning ? std::string_view(response.answer_text) : std::string_view(response.text);
}

} // namespace itc
