#pragma once

#include "itc/backend.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace itc {

/// Knobs for the in-process stand-in model.
struct SyntheticOptions {
    /// Emit a `<think>` block before the visible answer.
    bool reasoning = true;
    /// Probability that a fresh solve attempt is correct.
    double skill = 0.7;
    /// Fraction of judge replies that are malformed or out of range.
    double judge_glitch_rate = 0.08;
    std::uint64_t seed = 0;
};

/// Deterministic fake chat model for arithmetic questions of the form
/// "What is A op B?". It recognises the prompt family (solve, judge,
/// feedback, revision, observation, aggregation, sneaky/helpful prover,
/// truncated continuation) and answers in the matching format. Every reply
/// is a pure function of the cache digest and the seed, so replaying the
/// same requests yields the same text.
///
/// Wrong answers come with longer, more hedged reasoning than right ones,
/// which gives the analysis module something real to find.
class SyntheticTransport : public Transport {
public:
    explicit SyntheticTransport(SyntheticOptions options = {}) : options_(options) {}
    TransportReply complete(const CompletionRequest& request, const CacheKey& key) override;

private:
    SyntheticOptions options_;
};

/// Value of "What is A op B?" found in `text`, for op in + - *.
std::optional<long long> arithmetic_truth(std::string_view text);

} // namespace itc
