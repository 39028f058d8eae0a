#include "itc/strategies.hpp"

#include "itc/error.hpp"
#include "itc/judge.hpp"
#include "itc/parallel.hpp"
#include "itc/prompts.hpp"
#include "itc/text.hpp"

#include <spdlog/spdlog.h>

#include <mutex>

namespace itc {

namespace {

/// One model output that could be chosen as the final solution.
struct Solution {
    Call call;
    std::optional<NormalizedAnswer> answer;
    double score = failed_judgment_score;
};

class BackendFailure : public Error {
public:
    using Error::Error;
};

// Runs fn, turning transport-level failures into BackendFailure so strategy
// code can tell them apart from logic errors.
template <class Fn>
auto guarded(Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const TransportError& e) {
        throw BackendFailure(e.what());
    } catch (const ProtocolError& e) {
        throw BackendFailure(e.what());
    } catch (const FixtureMissingError& e) {
        throw BackendFailure(e.what());
    }
}

Solution solve_call(const StrategyContext& ctx, const Query& query, std::vector<Message> messages, int sample_index,
                    CallRole role) {
    auto completion = guarded([&] { return ctx.client.complete(std::move(messages), sample_index); });
    Solution s;
    s.answer = extract_answer(completion.response.answer_text, query.task_kind);
    if (s.answer) completion.response.extracted_answer = s.answer->canonical;
    s.call = {role, std::move(completion.prompt_hash), std::move(completion.response)};
    return s;
}

Solution solve_call(const StrategyContext& ctx, const Query& query, const CompletionRequest& request, CallRole role) {
    auto completion = guarded([&] { return ctx.client.complete(request); });
    Solution s;
    s.answer = extract_answer(completion.response.answer_text, query.task_kind);
    if (s.answer) completion.response.extracted_answer = s.answer->canonical;
    s.call = {role, std::move(completion.prompt_hash), std::move(completion.response)};
    return s;
}

std::vector<Message> user(std::string content) {
    return {{MessageRole::user, std::move(content)}};
}

RunRecord start_record(const Query& query, const StrategyConfig& config, const StrategyContext& ctx) {
    RunRecord record;
    record.query_id = query.id;
    record.strategy = config;
    record.model_id = ctx.client.model_id();
    record.task_kind = query.task_kind;
    record.gold_answer = query.gold_answer;
    return record;
}

void finish(RunRecord& record, const std::optional<NormalizedAnswer>& final_answer) {
    record.total_completion_tokens = sum_completion_tokens(record.calls);
    if (record.error || !final_answer) {
        record.final_answer.clear();
        record.correct = false;
        return;
    }
    record.final_answer = final_answer->canonical;
    record.correct = is_correct(final_answer, record.gold_answer, record.task_kind);
}

void append(std::vector<Call>& calls, std::vector<Call> more) {
    calls.insert(calls.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

std::optional<NormalizedAnswer> vote_or_nothing(const std::function<VoteResult()>& vote) {
    try {
        return vote().answer;
    } catch (const NoAnswerError&) {
        spdlog::debug("no extractable answer; recording run as incorrect");
        return std::nullopt;
    }
}

std::size_t best_scored(const std::vector<Solution>& solutions) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < solutions.size(); ++i)
        if (solutions[i].score > solutions[best].score) best = i;
    return best;
}

/// One revision chain: initial solution, then feedback + revision per step,
/// every solution judged. On backend failure the solutions so far are kept.
struct Chain {
    std::vector<Call> calls;
    std::vector<Solution> solutions;
    std::optional<std::string> error;
};

Chain run_chain(const Query& query, int length, int chain_index, const StrategyContext& ctx) {
    Chain chain;
    try {
        for (int step = 0; step < length; ++step) {
            Solution solution;
            if (step == 0) {
                solution = solve_call(ctx, query, user(render_solve(query.prompt, query.task_kind)), chain_index,
                                      CallRole::sample);
                chain.calls.push_back(solution.call);
            } else {
                auto previous = std::string(visible_text(chain.solutions.back().call.response));
                auto feedback = guarded(
                    [&] { return ctx.client.complete(user(render_feedback(query.prompt, previous)), chain_index); });
                chain.calls.push_back({CallRole::feedback, feedback.prompt_hash, feedback.response});
                solution = solve_call(
                    ctx, query,
                    user(render_revision(query.prompt, previous, std::string(visible_text(feedback.response)))),
                    chain_index, CallRole::revision);
                chain.calls.push_back(solution.call);
            }
            auto verdict = guarded([&] {
                return judge(ctx.client, query.prompt, visible_text(solution.call.response), ctx.judge_repeats);
            });
            append(chain.calls, std::move(verdict.calls));
            solution.score = verdict.mean_score;
            chain.solutions.push_back(std::move(solution));
        }
    } catch (const BackendFailure& e) {
        chain.error = e.what();
    }
    return chain;
}

} // namespace

// ---------------------------------------------------------------------------

RunRecord sample_and_vote(const Query& query, const StrategyConfig& config, const StrategyContext& ctx) {
    RunRecord record = start_record(query, config, ctx);

    int n = 0;
    int judge_repeats = 0;
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, MajorityVote> || std::is_same_v<T, WeightedMajority>) {
                n = c.n;
            } else if constexpr (std::is_same_v<T, MajorityTopK>) {
                n = c.n;
                judge_repeats = ctx.judge_repeats;
            } else if constexpr (std::is_same_v<T, BestOfN>) {
                n = c.n;
                judge_repeats = c.judge_repeats;
            } else {
                throw ValidationError("strategy", "not a sampling strategy");
            }
        },
        config);

    std::vector<std::optional<Solution>> solutions(n);
    std::vector<std::vector<Call>> judge_calls(n);
    std::vector<std::optional<std::string>> errors(n);
    auto prompt = user(render_solve(query.prompt, query.task_kind));

    parallel_for(static_cast<std::size_t>(n), ctx.workers, [&](std::size_t i) {
        try {
            auto s = solve_call(ctx, query, prompt, static_cast<int>(i), CallRole::sample);
            if (judge_repeats > 0) {
                auto verdict = guarded(
                    [&] { return judge(ctx.client, query.prompt, visible_text(s.call.response), judge_repeats); });
                s.score = verdict.mean_score;
                judge_calls[i] = std::move(verdict.calls);
            }
            solutions[i] = std::move(s);
        } catch (const BackendFailure& e) {
            errors[i] = e.what();
        }
    });

    for (int i = 0; i < n; ++i) {
        if (solutions[i]) record.calls.push_back(solutions[i]->call);
        append(record.calls, std::move(judge_calls[i]));
        if (errors[i] && !record.error) record.error = "sample " + std::to_string(i) + ": " + *errors[i];
    }
    if (record.error) {
        finish(record, std::nullopt);
        return record;
    }

    std::vector<std::optional<NormalizedAnswer>> answers;
    std::vector<double> scores;
    std::vector<std::size_t> lengths;
    for (const auto& s : solutions) {
        answers.push_back(s->answer);
        scores.push_back(s->score);
        lengths.push_back(vote_length(s->call.response));
    }

    std::optional<NormalizedAnswer> final_answer = std::visit(
        [&](const auto& c) -> std::optional<NormalizedAnswer> {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, MajorityVote>) {
                return vote_or_nothing([&] { return majority_vote(answers); });
            } else if constexpr (std::is_same_v<T, WeightedMajority>) {
                return vote_or_nothing([&] { return weighted_majority(answers, lengths, c.weighting); });
            } else if constexpr (std::is_same_v<T, MajorityTopK>) {
                return vote_or_nothing([&] { return majority_topk(answers, scores, static_cast<std::size_t>(c.k)); });
            } else if constexpr (std::is_same_v<T, BestOfN>) {
                try {
                    return answers[best_of_n(answers, scores)];
                } catch (const NoAnswerError&) {
                    return std::nullopt;
                }
            } else {
                return std::nullopt;
            }
        },
        config);

    finish(record, final_answer);
    return record;
}

RunRecord sequential_revisions(const Query& query, const SequentialRevisions& config, const StrategyContext& ctx) {
    RunRecord record = start_record(query, config, ctx);
    auto chain = run_chain(query, config.length, 0, ctx);
    record.calls = std::move(chain.calls);
    record.error = std::move(chain.error);

    std::optional<NormalizedAnswer> final_answer;
    if (!record.error && !chain.solutions.empty()) {
        auto chosen = config.selection == RevisionSelection::last ? chain.solutions.size() - 1
                                                                  : best_scored(chain.solutions);
        final_answer = chain.solutions[chosen].answer;
    }
    finish(record, final_answer);
    return record;
}

RunRecord parallel_sequential(const Query& query, const ParallelSequential& config, const StrategyContext& ctx) {
    RunRecord record = start_record(query, config, ctx);
    std::vector<Chain> chains(config.chains);
    parallel_for(chains.size(), ctx.workers,
                 [&](std::size_t c) { chains[c] = run_chain(query, config.length, static_cast<int>(c), ctx); });

    std::vector<std::optional<NormalizedAnswer>> champions;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        append(record.calls, std::move(chains[c].calls));
        if (chains[c].error) {
            spdlog::warn("query {}: dropping failed revision chain {}: {}", query.id, c, *chains[c].error);
            continue;
        }
        champions.push_back(chains[c].solutions[best_scored(chains[c].solutions)].answer);
    }
    if (champions.empty()) {
        record.error = "every revision chain failed";
        finish(record, std::nullopt);
        return record;
    }
    finish(record, vote_or_nothing([&] { return majority_vote(champions); }));
    return record;
}

RunRecord plansearch(const Query& query, const PlanSearch& config, const StrategyContext& ctx) {
    RunRecord record = start_record(query, config, ctx);
    std::optional<NormalizedAnswer> final_answer;
    try {
        auto observe = guarded([&] {
            return ctx.client.complete(
                user(render_template(assets::plansearch_observe,
                                     {{"question", query.prompt}, {"count", std::to_string(config.observations)}})),
                0);
        });
        record.calls.push_back({CallRole::observation, observe.prompt_hash, observe.response});
        std::string observations(visible_text(observe.response));

        if (config.derived > 0) {
            auto derive = guarded([&] {
                return ctx.client.complete(user(render_template(assets::plansearch_derive,
                                                                {{"question", query.prompt},
                                                                 {"observations", observations},
                                                                 {"count", std::to_string(config.derived)}})),
                                           0);
            });
            record.calls.push_back({CallRole::observation, derive.prompt_hash, derive.response});
            observations += "\n";
            observations += visible_text(derive.response);
        }

        auto solution = solve_call(ctx, query,
                                   user(render_template(assets::plansearch_solve,
                                                        {{"question", query.prompt},
                                                         {"observations", observations},
                                                         {"instruction", std::string(answer_instruction(query.task_kind))}})),
                                   0, CallRole::sample);
        record.calls.push_back(solution.call);
        final_answer = solution.answer;
    } catch (const BackendFailure& e) {
        record.error = e.what();
    }
    finish(record, final_answer);
    return record;
}

RunRecord pvgame(const Query& query, const PVGame& config, const StrategyContext& ctx) {
    RunRecord record = start_record(query, config, ctx);

    struct Entry {
        Solution solution;
        bool helpful = true;
        std::vector<Call> judge_calls;
    };
    std::vector<Entry> all;
    std::optional<std::string> guidance;

    try {
        for (int round = 0; round < config.rounds; ++round) {
            std::vector<std::optional<Entry>> entries(config.per_round);
            parallel_for(entries.size(), ctx.workers, [&](std::size_t j) {
                Entry e;
                e.helpful = j % 2 == 0;
                std::string task = guidance ? render_template(assets::pvgame_guided,
                                                              {{"question", query.prompt},
                                                               {"previous", *guidance},
                                                               {"instruction",
                                                                std::string(answer_instruction(query.task_kind))}})
                                            : render_solve(query.prompt, query.task_kind);
                std::vector<Message> messages = {
                    {MessageRole::system, std::string(e.helpful ? assets::pvgame_helpful : assets::pvgame_sneaky)},
                    {MessageRole::user, std::move(task)}};
                e.solution = solve_call(ctx, query, std::move(messages),
                                        round * config.per_round + static_cast<int>(j), CallRole::sample);
                auto shown = visible_text(e.solution.call.response);
                auto correctness = guarded([&] { return judge(ctx.client, query.prompt, shown, 1, Rubric::correctness); });
                auto clarity = guarded([&] { return judge(ctx.client, query.prompt, shown, 1, Rubric::clarity); });
                e.solution.score = (correctness.mean_score + clarity.mean_score) / 2.0;
                e.judge_calls = std::move(correctness.calls);
                append(e.judge_calls, std::move(clarity.calls));
                entries[j] = std::move(e);
            });

            std::optional<std::size_t> best_helpful;
            for (auto& e : entries) {
                if (e->helpful && (!best_helpful || e->solution.score > all[*best_helpful].solution.score))
                    best_helpful = all.size();
                all.push_back(std::move(*e));
            }
            guidance = std::string(visible_text(all[*best_helpful].solution.call.response));
        }
    } catch (const BackendFailure& e) {
        record.error = e.what();
    }

    for (auto& e : all) {
        record.calls.push_back(e.solution.call);
        append(record.calls, std::move(e.judge_calls));
    }

    std::optional<NormalizedAnswer> final_answer;
    if (!record.error) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (!all[i].helpful || !all[i].solution.answer) continue;
            if (!best || all[i].solution.score > all[*best].solution.score) best = i;
        }
        if (best) final_answer = all[*best].solution.answer;
    }
    finish(record, final_answer);
    return record;
}

RunRecord moa(const Query& query, const MoA& config, const StrategyContext& ctx) {
    RunRecord record = start_record(query, config, ctx);
    std::optional<NormalizedAnswer> final_answer;
    const std::string instruction(answer_instruction(query.task_kind));

    try {
        std::vector<std::string> proposals;
        for (int layer = 0; layer < config.layers; ++layer) {
            std::vector<Solution> produced(config.proposers);
            auto previous = format_numbered(proposals, "Response");
            parallel_for(produced.size(), ctx.workers, [&](std::size_t i) {
                if (layer == 0) {
                    produced[i] = solve_call(ctx, query, user(render_solve(query.prompt, query.task_kind)),
                                             static_cast<int>(i), CallRole::sample);
                } else {
                    produced[i] = solve_call(ctx, query,
                                             user(render_template(assets::moa_refine, {{"question", query.prompt},
                                                                                       {"proposals", previous},
                                                                                       {"instruction", instruction}})),
                                             static_cast<int>(i), CallRole::aggregate);
                }
            });
            proposals.clear();
            for (auto& s : produced) {
                proposals.emplace_back(visible_text(s.call.response));
                record.calls.push_back(std::move(s.call));
            }
        }

        auto final_call = solve_call(ctx, query,
                                     user(render_template(assets::moa_final,
                                                          {{"question", query.prompt},
                                                           {"proposals", format_numbered(proposals, "Response")},
                                                           {"instruction", instruction}})),
                                     0, CallRole::aggregate);
        record.calls.push_back(final_call.call);
        final_answer = final_call.answer;
    } catch (const BackendFailure& e) {
        record.error = e.what();
    }
    finish(record, final_answer);
    return record;
}

RunRecord reasoning_truncation(const Query& query, const ReasoningTruncation& config, const StrategyContext& ctx) {
    RunRecord record = start_record(query, config, ctx);
    std::optional<NormalizedAnswer> final_answer;

    try {
        auto original = ctx.client.request(user(render_solve(query.prompt, query.task_kind)), 0);
        auto sample = solve_call(ctx, query, original, CallRole::sample);
        record.calls.push_back(sample.call);
        final_answer = sample.answer;

        if (!sample.call.response.reasoning) {
            spdlog::warn("query {}: response has no reasoning segment; passing through untruncated", query.id);
        } else if (auto continuation = truncate_reasoning(original, sample.call.response,
                                                          static_cast<std::size_t>(config.budget_tokens))) {
            auto completed = solve_call(ctx, query, *continuation, CallRole::sample);
            record.calls.push_back(completed.call);
            final_answer = completed.answer;
        }
    } catch (const BackendFailure& e) {
        record.error = e.what();
    }
    finish(record, final_answer);
    return record;
}

RunRecord run_strategy(const Query& query, const StrategyConfig& config, const StrategyContext& ctx) {
    validate(config);
    return std::visit(
        [&](const auto& c) -> RunRecord {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, SequentialRevisions>) return sequential_revisions(query, c, ctx);
            else if constexpr (std::is_same_v<T, ParallelSequential>) return parallel_sequential(query, c, ctx);
            else if constexpr (std::is_same_v<T, PlanSearch>) return plansearch(query, c, ctx);
            else if constexpr (std::is_same_v<T, PVGame>) return pvgame(query, c, ctx);
            else if constexpr (std::is_same_v<T, MoA>) return moa(query, c, ctx);
            else if constexpr (std::is_same_v<T, ReasoningTruncation>) return reasoning_truncation(query, c, ctx);
            else return sample_and_vote(query, config, ctx);
        },
        config);
}

} // namespace itc
