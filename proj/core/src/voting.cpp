#include "itc/error.hpp"
#include "itc/strategies.hpp"
#include "itc/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace itc {

VoteResult majority_vote(std::span<const std::optional<NormalizedAnswer>> answers, std::span<const double> weights) {
    if (!weights.empty() && weights.size() != answers.size())
        throw ValidationError("weights", "need one weight per sample");

    VoteTally tally;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        if (!answers[i]) continue;
        double w = weights.empty() ? 1.0 : weights[i];
        if (w < 0.0) throw ValidationError("weights", "must be non-negative");

        auto it = std::find_if(tally.classes.begin(), tally.classes.end(), [&](const VoteClass& c) {
            return answers_equivalent(c.representative, *answers[i]);
        });
        if (it == tally.classes.end()) {
            tally.classes.push_back({*answers[i], {i}, w});
        } else {
            it->members.push_back(i);
            it->weight += w;
        }
    }
    if (tally.classes.empty()) throw NoAnswerError();

    // Classes are ordered by first member, so keeping the first maximum
    // breaks ties towards the earliest sample.
    std::size_t winner = 0;
    for (std::size_t c = 1; c < tally.classes.size(); ++c)
        if (tally.classes[c].weight > tally.classes[winner].weight) winner = c;

    VoteResult result;
    result.answer = tally.classes[winner].representative;
    result.winner = winner;
    result.tally = std::move(tally);
    return result;
}

std::size_t vote_length(const ModelResponse& response) {
    if (response.reasoning) return whitespace_token_count(*response.reasoning);
    return static_cast<std::size_t>(std::max<std::int64_t>(0, response.completion_tokens));
}

std::vector<double> vote_weights(std::span<const std::size_t> lengths, VoteWeighting weighting) {
    std::vector<double> weights(lengths.size());
    switch (weighting) {
    case VoteWeighting::inverse_length:
        for (std::size_t i = 0; i < lengths.size(); ++i)
            weights[i] = 1.0 / static_cast<double>(std::max<std::size_t>(1, lengths[i]));
        break;
    case VoteWeighting::rank: {
        std::vector<std::size_t> order(lengths.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return lengths[a] < lengths[b]; });
        const auto n = static_cast<double>(lengths.size());
        for (std::size_t r = 0; r < order.size(); ++r) weights[order[r]] = (n - static_cast<double>(r)) / n;
        break;
    }
    case VoteWeighting::exponential_decay: {
        double mean = 0.0;
        for (auto l : lengths) mean += static_cast<double>(l);
        mean = lengths.empty() ? 1.0 : std::max(1.0, mean / static_cast<double>(lengths.size()));
        for (std::size_t i = 0; i < lengths.size(); ++i)
            weights[i] = std::exp(-static_cast<double>(lengths[i]) / mean);
        break;
    }
    }
    return weights;
}

VoteResult weighted_majority(std::span<const std::optional<NormalizedAnswer>> answers,
                             std::span<const std::size_t> lengths, VoteWeighting weighting) {
    if (lengths.size() != answers.size()) throw ValidationError("lengths", "need one length per sample");
    auto weights = vote_weights(lengths, weighting);
    return majority_vote(answers, weights);
}

std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    order.resize(std::min(k, order.size()));
    std::sort(order.begin(), order.end());
    return order;
}

VoteResult majority_topk(std::span<const std::optional<NormalizedAnswer>> answers, std::span<const double> scores,
                         std::size_t k) {
    if (scores.size() != answers.size()) throw ValidationError("scores", "need one score per sample");
    if (k < 1) throw ValidationError("k", "must be at least 1");

    std::vector<std::optional<NormalizedAnswer>> selected(answers.size());
    for (auto i : top_k_indices(scores, k)) selected[i] = answers[i];
    return majority_vote(selected);
}

std::size_t best_of_n(std::span<const std::optional<NormalizedAnswer>> answers, std::span<const double> scores) {
    if (scores.size() != answers.size()) throw ValidationError("scores", "need one score per sample");
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        if (!answers[i]) continue;
        if (!best || scores[i] > scores[*best]) best = i;
    }
    if (!best) throw NoAnswerError();
    return *best;
}

} // namespace itc
