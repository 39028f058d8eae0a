#include "itc/synthetic.hpp"

#include "itc/answer.hpp"
#include "itc/text.hpp"

#include <algorithm>
#include <random>
#include <regex>
#include <sstream>

namespace itc {

namespace {

enum class Kind {
    solve,
    judge,
    feedback,
    revision,
    observe,
    derive,
    plan_solve,
    moa,
    guided,
    continuation,
};

bool contains(std::string_view haystack, std::string_view needle) {
    return haystack.find(needle) != std::string_view::npos;
}

const Message* last_user(const CompletionRequest& request) {
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it)
        if (it->role == MessageRole::user) return &*it;
    return nullptr;
}

Kind classify(const CompletionRequest& request, std::string_view prompt) {
    if (!request.messages.empty() && request.messages.back().role == MessageRole::assistant)
        return Kind::continuation;
    if (contains(prompt, "Assign a score between -100 and +100.")) return Kind::judge;
    if (contains(prompt, "relection or feedback")) return Kind::feedback;
    if (contains(prompt, "refine the your answer")) return Kind::revision;
    if (contains(prompt, "Do not solve it yet.")) return Kind::observe;
    if (contains(prompt, "Derive ") && contains(prompt, "new observations")) return Kind::derive;
    if (contains(prompt, "Use the following observations")) return Kind::plan_solve;
    if (contains(prompt, "Candidate responses:")) return Kind::moa;
    if (contains(prompt, "A previous solution to this problem")) return Kind::guided;
    return Kind::solve;
}

bool is_sneaky(const CompletionRequest& request) {
    return !request.messages.empty() && request.messages.front().role == MessageRole::system &&
           contains(request.messages.front().content, "sneaky");
}

std::string_view between(std::string_view text, std::string_view open, std::string_view close) {
    auto start = text.find(open);
    if (start == std::string_view::npos) return {};
    start += open.size();
    auto end = close.empty() ? std::string_view::npos : text.find(close, start);
    return text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
}

std::optional<long long> boxed_value(std::string_view text) {
    auto boxed = extract_boxed(text);
    if (!boxed) return std::nullopt;
    auto value = parse_rational(normalize_math(*boxed).canonical);
    if (!value || denominator(*value) != 1) return std::nullopt;
    return static_cast<long long>(numerator(*value));
}

/// Majority boxed value among "[Response i]" blocks, earliest on ties.
std::optional<long long> proposal_majority(std::string_view proposals) {
    std::vector<std::pair<long long, int>> counts;
    std::size_t pos = 0;
    while ((pos = proposals.find("[Response ", pos)) != std::string_view::npos) {
        auto next = proposals.find("[Response ", pos + 1);
        auto block = proposals.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
        if (auto v = boxed_value(block)) {
            auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == *v; });
            if (it == counts.end()) counts.emplace_back(*v, 1);
            else ++it->second;
        }
        if (next == std::string_view::npos) break;
        pos = next;
    }
    if (counts.empty()) return std::nullopt;
    return std::max_element(counts.begin(), counts.end(),
                            [](const auto& a, const auto& b) { return a.second < b.second; })
        ->first;
}

class Writer {
public:
    Writer(std::mt19937_64& rng) : rng_(rng) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
    int between(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool chance(double p) { return uniform() < p; }

    template <std::size_t N>
    std::string_view pick(const std::string_view (&items)[N]) {
        return items[static_cast<std::size_t>(between(0, static_cast<int>(N) - 1))];
    }

    long long wrong(long long truth) {
        static constexpr long long offsets[] = {1, -1, 2, -2, 10, -10, 3};
        return truth + offsets[between(0, 6)];
    }

    /// Reasoning prose of roughly `words` whitespace tokens. Unsure traces are
    /// sprinkled with hedging and self-interruption.
    std::string reasoning(long long claimed, bool sure, int words) {
        static constexpr std::string_view steady[] = {
            "Start from the two operands and apply the operation directly.",
            "Line the digits up and carry where needed.",
            "Check the result by reversing the operation.",
            "The arithmetic here is routine.",
            "Therefore the intermediate sum stays consistent.",
            "Moreover the units digit agrees with the quick estimate.",
            "Keep track of the sign of each term.",
        };
        static constexpr std::string_view shaky[] = {
            "Wait, maybe I dropped a carry somewhere.",
            "Hmm, perhaps the second operand was read wrong.",
            "However, it seems the estimate does not quite match.",
            "Alternatively, I could redo the column sums.",
            "This might be off by a little, possibly in the tens place.",
            "Wait, let me look again at the last step.",
            "Hmm, on the other hand the rough size could be right.",
            "Maybe the borrow went the other way.",
        };
        std::ostringstream out;
        int written = 0;
        while (written < words) {
            auto sentence = (!sure && chance(0.55)) ? pick(shaky) : pick(steady);
            out << sentence << ' ';
            written += static_cast<int>(std::count(sentence.begin(), sentence.end(), ' ')) + 1;
        }
        out << "So the value is " << claimed << '.';
        return out.str();
    }

private:
    std::mt19937_64& rng_;
};

std::string wrap(const SyntheticOptions& options, const std::string& reasoning, const std::string& visible) {
    if (!options.reasoning) return reasoning + "\n\n" + visible;
    return "<think>\n" + reasoning + "\n</think>\n\n" + visible;
}

} // namespace

std::optional<long long> arithmetic_truth(std::string_view text) {
    static const std::regex pattern(R"(What is (-?\d+) ([-+*]) (-?\d+)\?)");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(text.begin(), text.end(), m, pattern)) return std::nullopt;
    long long a = std::stoll(m[1].str());
    long long b = std::stoll(m[3].str());
    switch (m[2].str()[0]) {
    case '+': return a + b;
    case '-': return a - b;
    default: return a * b;
    }
}

TransportReply SyntheticTransport::complete(const CompletionRequest& request, const CacheKey& key) {
    std::mt19937_64 rng(std::stoull(key.digest.substr(0, 16), nullptr, 16) ^ options_.seed);
    Writer w(rng);

    const Message* user = last_user(request);
    std::string_view prompt = user ? std::string_view(user->content) : std::string_view();
    auto kind = classify(request, prompt);
    auto truth = arithmetic_truth(prompt);
    if (!truth) truth = 0;

    auto solution = [&](double p_correct) {
        bool right = w.chance(std::clamp(p_correct, 0.0, 1.0));
        long long claimed = right ? *truth : w.wrong(*truth);
        int words = right ? w.between(25, 60) : w.between(60, 140);
        auto visible = "The answer is \\boxed{" + std::to_string(claimed) + "}.";
        return wrap(options_, w.reasoning(claimed, right, words), visible);
    };

    std::string text;
    switch (kind) {
    case Kind::solve:
        text = solution(is_sneaky(request) ? 0.15 : options_.skill);
        break;
    case Kind::plan_solve:
        text = solution(options_.skill + 0.1);
        break;
    case Kind::revision: {
        auto previous = boxed_value(between(prompt, "Previous solution:\n", "\n\nFeedback:"));
        text = solution(previous == truth ? 0.9 : options_.skill + 0.1);
        break;
    }
    case Kind::guided: {
        auto previous = boxed_value(between(prompt, "Previous solution:\n", ""));
        double p = previous == truth ? 0.85 : options_.skill;
        text = solution(is_sneaky(request) ? 0.15 : p);
        break;
    }
    case Kind::moa: {
        auto majority = proposal_majority(between(prompt, "Candidate responses:\n", ""));
        text = solution(majority == truth ? 0.9 : options_.skill * 0.8);
        break;
    }
    case Kind::continuation: {
        const auto& prefix = request.messages.back().content;
        auto kept = whitespace_token_count(between(prefix, "<think>", "</think>"));
        double p = options_.skill * (0.5 + 0.5 * std::min(1.0, static_cast<double>(kept) / 40.0));
        bool right = w.chance(p);
        text = "The answer is \\boxed{" + std::to_string(right ? *truth : w.wrong(*truth)) + "}.";
        break;
    }
    case Kind::judge: {
        auto judged = boxed_value(between(prompt, "Response: ", "\n\nAnalyze"));
        bool right = judged && judged == truth;
        std::ostringstream out;
        out << "[Analysis] " << (right ? "The computation is carried out correctly, though the explanation is terse."
                                       : "The final value does not survive a direct recomputation.")
            << "\n\n[Score] ";
        if (w.chance(options_.judge_glitch_rate)) {
            if (w.chance(0.5)) out << "150";
            else out << "high";
        } else {
            out << (right ? w.between(40, 90) : w.between(-80, 10));
        }
        text = wrap(options_, "Recompute the arithmetic and compare with the response.", out.str());
        break;
    }
    case Kind::feedback: {
        auto previous = boxed_value(between(prompt, "Answer to analyze:\n", ""));
        std::string verdict = previous == truth ? "The steps look sound; tighten the explanation."
                                                : "The final value looks wrong; recheck the carries.";
        text = wrap(options_, "Walk through the previous answer line by line.", "[Feedback] " + verdict);
        break;
    }
    case Kind::observe:
    case Kind::derive: {
        std::ostringstream out;
        int count = 1;
        if (auto c = between(prompt, "Number them from 1 to ", ","); !c.empty()) count = std::stoi(std::string(c));
        for (int i = 1; i <= count; ++i)
            out << i << ". " << (kind == Kind::observe ? "The operands can be split into tens and units."
                                                       : "Combining partial results keeps each step small.")
                << (i < count ? "\n" : "");
        text = wrap(options_, "List what stands out about the problem.", out.str());
        break;
    }
    }

    return {std::move(text), std::nullopt, std::nullopt, 0};
}

} // namespace itc
