#pragma once

// Shared by the unit tests and the acceptance binary: brute-force oracles,
// random instance generators, scripted replies and scratch directories.

#include "itc/answer.hpp"
#include "itc/backend.hpp"
#include "itc/pareto.hpp"
#include "itc/strategies.hpp"
#include "itc/transports.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace itc_test {

inline const std::filesystem::path data_dir = ITC_TEST_DATA_DIR;
inline const std::filesystem::path golden_dir = ITC_GOLDEN_DIR;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "itc") {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / (tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// ---------------------------------------------------------------------------
// Voting oracle

/// Answer strings whose equivalence is known in advance: the key is the
/// exact value for numerals and the text itself otherwise.
struct AlphabetEntry {
    std::string text;
    std::string key;
};

inline const std::vector<AlphabetEntry>& vote_alphabet() {
    static const std::vector<AlphabetEntry> alphabet = {
        {"1/2", "1/2"}, {"0.5", "1/2"}, {"\\frac{1}{2}", "1/2"}, {"3", "3"},   {"3.0", "3"},
        {"7", "7"},     {"x+1", "x+1"}, {"1+x", "1+x"},          {"-4", "-4"}, {"\\frac{-8}{2}", "-4"},
    };
    return alphabet;
}

struct VoteInstance {
    std::vector<std::optional<std::size_t>> picks;  // index into vote_alphabet(), or no answer
    std::vector<std::size_t> lengths;
    std::vector<double> scores;

    std::vector<std::optional<itc::NormalizedAnswer>> answers() const {
        std::vector<std::optional<itc::NormalizedAnswer>> out;
        for (const auto& p : picks) {
            if (p) out.push_back(itc::normalize_math(vote_alphabet()[*p].text));
            else out.push_back(std::nullopt);
        }
        return out;
    }
};

/// n in [1, 12], at most `classes` distinct keys among the answers, with a
/// chance of unanswered samples but at least one answer.
inline VoteInstance random_vote_instance(std::mt19937_64& rng, std::size_t max_n = 12, std::size_t classes = 5) {
    const auto& alphabet = vote_alphabet();
    std::vector<std::string> keys;
    for (const auto& a : alphabet)
        if (std::find(keys.begin(), keys.end(), a.key) == keys.end()) keys.push_back(a.key);
    std::shuffle(keys.begin(), keys.end(), rng);
    keys.resize(std::min(classes, keys.size()));
    std::vector<std::size_t> allowed;
    for (std::size_t i = 0; i < alphabet.size(); ++i)
        if (std::find(keys.begin(), keys.end(), alphabet[i].key) != keys.end()) allowed.push_back(i);

    VoteInstance inst;
    const auto n = std::uniform_int_distribution<std::size_t>(1, max_n)(rng);
    std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
    std::uniform_int_distribution<std::size_t> length(0, 400);
    std::uniform_int_distribution<int> score(-100, 100);
    std::bernoulli_distribution missing(0.15);
    for (std::size_t i = 0; i < n; ++i) {
        if (missing(rng)) inst.picks.push_back(std::nullopt);
        else inst.picks.push_back(allowed[pick(rng)]);
        inst.lengths.push_back(length(rng));
        inst.scores.push_back(score(rng) + std::uniform_real_distribution<double>(0, 1)(rng));
    }
    if (std::none_of(inst.picks.begin(), inst.picks.end(), [](const auto& p) { return p.has_value(); }))
        inst.picks[0] = allowed[pick(rng)];
    return inst;
}

struct OracleVote {
    /// Alphabet index of the winning class's earliest member.
    std::size_t representative = 0;
    std::map<std::string, std::vector<std::size_t>> members;
};

/// Enumerates classes by key, sums weights in sample order, and picks the
/// heaviest class; ties go to the class whose first member comes first.
inline std::optional<OracleVote> oracle_vote(const VoteInstance& inst, const std::vector<bool>& include,
                                             const std::vector<double>& weights) {
    const auto& alphabet = vote_alphabet();
    std::vector<std::string> order;
    std::map<std::string, double> weight;
    OracleVote out;
    std::map<std::string, std::size_t> first_pick;
    for (std::size_t i = 0; i < inst.picks.size(); ++i) {
        if (!include[i] || !inst.picks[i]) continue;
        const auto& key = alphabet[*inst.picks[i]].key;
        if (!weight.count(key)) {
            order.push_back(key);
            weight[key] = 0.0;
            first_pick[key] = *inst.picks[i];
        }
        weight[key] += weights.empty() ? 1.0 : weights[i];
        out.members[key].push_back(i);
    }
    if (order.empty()) return std::nullopt;
    std::string best = order.front();
    for (const auto& key : order)
        if (weight[key] > weight[best]) best = key;
    out.representative = first_pick[best];
    return out;
}

inline std::optional<OracleVote> oracle_majority(const VoteInstance& inst) {
    return oracle_vote(inst, std::vector<bool>(inst.picks.size(), true), {});
}

inline std::optional<OracleVote> oracle_weighted(const VoteInstance& inst) {
    std::vector<double> w;
    for (auto l : inst.lengths) w.push_back(1.0 / static_cast<double>(std::max<std::size_t>(1, l)));
    return oracle_vote(inst, std::vector<bool>(inst.picks.size(), true), w);
}

inline std::optional<OracleVote> oracle_topk(const VoteInstance& inst, std::size_t k) {
    std::vector<std::size_t> idx(inst.picks.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
        if (inst.scores[a] != inst.scores[b]) return inst.scores[a] > inst.scores[b];
        return a < b;
    });
    std::vector<bool> include(inst.picks.size(), false);
    for (std::size_t r = 0; r < std::min(k, idx.size()); ++r) include[idx[r]] = true;
    return oracle_vote(inst, include, {});
}

/// True when the library's vote picked the oracle's class and representative.
inline bool vote_matches(const itc::VoteResult& result, const std::optional<OracleVote>& oracle) {
    if (!oracle) return false;
    return result.answer == itc::normalize_math(vote_alphabet()[oracle->representative].text);
}

// ---------------------------------------------------------------------------
// Pareto oracle

inline std::vector<itc::ParetoPoint> random_points(std::mt19937_64& rng, std::size_t n) {
    std::vector<itc::ParetoPoint> points;
    // Coarse grids make ties and duplicates common.
    std::uniform_int_distribution<int> compute(0, 200);
    std::uniform_int_distribution<int> accuracy(0, 50);
    for (std::size_t i = 0; i < n; ++i)
        points.push_back({"p" + std::to_string(i), compute(rng) * 5.0, accuracy(rng) / 50.0, 10});
    return points;
}

inline bool oracle_dominates(const itc::ParetoPoint& p, const itc::ParetoPoint& q) {
    return p.compute <= q.compute && p.accuracy >= q.accuracy && (p.compute < q.compute || p.accuracy > q.accuracy);
}

inline std::vector<itc::ParetoPoint> oracle_front(const std::vector<itc::ParetoPoint>& points) {
    std::vector<itc::ParetoPoint> front;
    for (const auto& q : points) {
        bool dominated = false;
        for (const auto& p : points)
            if (oracle_dominates(p, q)) {
                dominated = true;
                break;
            }
        if (!dominated) front.push_back(q);
    }
    std::sort(front.begin(), front.end(), [](const auto& a, const auto& b) {
        if (a.compute != b.compute) return a.compute < b.compute;
        if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
        return a.label < b.label;
    });
    return front;
}

// ---------------------------------------------------------------------------
// Scripted replies

/// Transport that answers from a fixed table keyed on the last message's
/// content prefix, counting every call it receives.
class CountingTransport : public itc::Transport {
public:
    using Fn = std::function<std::string(const itc::CompletionRequest&)>;
    explicit CountingTransport(Fn fn, std::shared_ptr<std::atomic<int>> counter)
        : fn_(std::move(fn)), counter_(std::move(counter)) {}
    itc::TransportReply complete(const itc::CompletionRequest& request, const itc::CacheKey&) override {
        ++*counter_;
        return {fn_(request), std::nullopt, std::nullopt, 0};
    }

private:
    Fn fn_;
    std::shared_ptr<std::atomic<int>> counter_;
};

inline bool starts_with(std::string_view text, std::string_view prefix) {
    return text.substr(0, prefix.size()) == prefix;
}

inline const std::string& last_user(const itc::CompletionRequest& request) {
    return request.messages.back().content;
}

} // namespace itc_test
