#include "itc/analysis.hpp"

#include "itc/error.hpp"
#include "itc/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

namespace itc {

std::string_view to_string(MarkerCategory category) {
    switch (category) {
    case MarkerCategory::discourse: return "discourse";
    case MarkerCategory::hedging: return "hedging";
    case MarkerCategory::thinking: return "thinking";
    }
    return "?";
}

MarkerCategory marker_category_from_string(std::string_view name) {
    for (auto c : marker_categories)
        if (to_string(c) == name) return c;
    throw ValidationError("category", "unknown marker category '" + std::string(name) + "'");
}

MarkerLexicon MarkerLexicon::standard() {
    MarkerLexicon lexicon;
    lexicon.categories[MarkerCategory::discourse] = {"on the other hand", "nevertheless", "moreover",
                                                     "in addition",       "furthermore",  "therefore",
                                                     "consequently",      "as a result"};
    lexicon.categories[MarkerCategory::hedging] = {"perhaps", "maybe", "possibly", "it seems", "might", "could"};
    lexicon.categories[MarkerCategory::thinking] = {"however", "wait", "alternatively", "hmm"};
    return lexicon;
}

void MarkerLexicon::validate() const {
    std::set<std::string> seen;
    for (const auto& [category, phrases] : categories) {
        auto field = "lexicon." + std::string(to_string(category));
        for (const auto& phrase : phrases) {
            if (word_tokens(phrase).empty()) throw ValidationError(field, "empty phrase");
            if (phrase != to_lower_ascii(phrase)) throw ValidationError(field, "phrase '" + phrase + "' is not lowercase");
            if (!seen.insert(phrase).second)
                throw ValidationError(field, "phrase '" + phrase + "' appears in more than one category");
        }
    }
}

std::vector<std::string> word_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || ch == '\'') {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

MarkerCounts count_markers(std::string_view text, const MarkerLexicon& lexicon) {
    auto tokens = word_tokens(text);
    MarkerCounts counts;
    for (const auto& [category, phrases] : lexicon.categories) {
        std::vector<std::vector<std::string>> patterns;
        for (const auto& p : phrases) patterns.push_back(word_tokens(p));

        std::size_t hits = 0;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            bool matched = std::any_of(patterns.begin(), patterns.end(), [&](const auto& pattern) {
                return !pattern.empty() && i + pattern.size() <= tokens.size() &&
                       std::equal(pattern.begin(), pattern.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i));
            });
            if (matched) ++hits;
        }
        counts[category] = hits;
    }
    return counts;
}

double CorpusSample::frequency(MarkerCategory c) const {
    return length == 0 ? 0.0 : static_cast<double>(markers[c]) / static_cast<double>(length);
}

CorpusSample make_sample(std::string question_id, std::string_view response_text, bool correct,
                         std::optional<int> difficulty, const MarkerLexicon& lexicon) {
    CorpusSample s;
    s.question_id = std::move(question_id);
    s.length = whitespace_token_count(response_text);
    s.markers = count_markers(response_text, lexicon);
    s.correct = correct;
    s.difficulty = difficulty;
    return s;
}

namespace {

std::map<std::string, std::vector<const CorpusSample*>> by_question(const Corpus& corpus) {
    std::map<std::string, std::vector<const CorpusSample*>> groups;
    for (const auto& s : corpus) groups[s.question_id].push_back(&s);
    return groups;
}

/// Mean with the values summed in ascending order.
double sorted_mean(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

template <class Value>
GapReport gap(const Corpus& corpus, Value value) {
    GapReport report;
    std::vector<double> gaps;
    for (const auto& [id, samples] : by_question(corpus)) {
        std::vector<double> right, wrong;
        for (const auto* s : samples) (s->correct ? right : wrong).push_back(value(*s));
        if (right.empty() || wrong.empty()) {
            ++report.discarded;
            continue;
        }
        double g = sorted_mean(std::move(wrong)) - sorted_mean(std::move(right));
        report.per_question.push_back({id, g});
        gaps.push_back(g);
    }
    if (gaps.empty()) throw EmptyResultError("no question has both correct and incorrect responses");
    report.average = sorted_mean(std::move(gaps));
    return report;
}

} // namespace

GapReport length_gap(const Corpus& corpus) {
    return gap(corpus, [](const CorpusSample& s) { return static_cast<double>(s.length); });
}

GapReport marker_gap(const Corpus& corpus, MarkerCategory category) {
    return gap(corpus, [category](const CorpusSample& s) { return s.frequency(category); });
}

std::vector<std::size_t> bin_sizes(std::size_t n, std::size_t bins) {
    if (bins == 0) throw ValidationError("bins", "must be at least 1");
    std::vector<std::size_t> sizes(bins, n / bins);
    for (std::size_t i = 0; i < n % bins; ++i) ++sizes[i];
    return sizes;
}

namespace {

BinReport bin_groups(const std::map<std::string, std::vector<const CorpusSample*>>& groups, std::size_t bins) {
    BinReport report;
    std::vector<std::vector<double>> per_bin(bins);
    for (const auto& [id, samples] : groups) {
        if (samples.size() < bins) {
            spdlog::warn("question {} has {} samples, fewer than {} bins; excluded", id, samples.size(), bins);
            report.excluded.push_back(id);
            continue;
        }
        auto sorted = samples;
        std::stable_sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return a->length < b->length; });
        std::size_t pos = 0;
        auto sizes = bin_sizes(sorted.size(), bins);
        for (std::size_t b = 0; b < bins; ++b) {
            std::size_t right = 0;
            for (std::size_t i = 0; i < sizes[b]; ++i) right += sorted[pos + i]->correct ? 1 : 0;
            per_bin[b].push_back(static_cast<double>(right) / static_cast<double>(sizes[b]));
            pos += sizes[b];
        }
        ++report.questions;
    }
    if (report.questions == 0) throw EmptyResultError("no question has enough samples to fill every bin");
    for (auto& values : per_bin) report.accuracy.push_back(sorted_mean(std::move(values)));
    return report;
}

} // namespace

BinReport bin_accuracy(const Corpus& corpus, std::size_t bins) {
    if (bins == 0) throw ValidationError("bins", "must be at least 1");
    return bin_groups(by_question(corpus), bins);
}

std::map<int, BinReport> bin_accuracy_by_difficulty(const Corpus& corpus, std::size_t bins) {
    if (bins == 0) throw ValidationError("bins", "must be at least 1");
    std::map<int, std::map<std::string, std::vector<const CorpusSample*>>> levels;
    for (const auto& s : corpus)
        if (s.difficulty) levels[*s.difficulty][s.question_id].push_back(&s);

    std::map<int, BinReport> reports;
    for (const auto& [level, groups] : levels) {
        try {
            reports.emplace(level, bin_groups(groups, bins));
        } catch (const EmptyResultError&) {
            spdlog::warn("difficulty {} has no question with at least {} samples", level, bins);
        }
    }
    return reports;
}

} // namespace itc
