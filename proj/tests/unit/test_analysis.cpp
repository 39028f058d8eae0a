#include <catch2/catch_amalgamated.hpp>

#include "itc/analysis.hpp"
#include "itc/error.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <map>
#include <random>
#include <set>

using namespace itc;
using Catch::Approx;

namespace {

CorpusSample sample(std::string q, std::size_t length, bool correct, std::size_t thinking = 0,
                    std::optional<int> difficulty = std::nullopt) {
    CorpusSample s;
    s.question_id = std::move(q);
    s.length = length;
    s.correct = correct;
    s.markers[MarkerCategory::thinking] = thinking;
    s.difficulty = difficulty;
    return s;
}

Corpus random_corpus(std::mt19937_64& rng) {
    Corpus corpus;
    int questions = 1 + static_cast<int>(rng() % 8);
    for (int q = 0; q < questions; ++q) {
        int n = 1 + static_cast<int>(rng() % 9);
        for (int i = 0; i < n; ++i)
            corpus.push_back(sample("q" + std::to_string(q), 1 + rng() % 500, rng() % 2 == 0, rng() % 12));
    }
    // Guarantee one mixed question.
    corpus.push_back(sample("mixed", 10, true));
    corpus.push_back(sample("mixed", 30, false));
    std::shuffle(corpus.begin(), corpus.end(), rng);
    return corpus;
}

/// Independent gap computation: running sums per question.
double oracle_gap(const Corpus& corpus, const std::function<double(const CorpusSample&)>& value, std::size_t& kept) {
    struct Acc {
        double right = 0, wrong = 0;
        int nr = 0, nw = 0;
    };
    std::map<std::string, Acc> acc;
    for (const auto& s : corpus) {
        auto& a = acc[s.question_id];
        if (s.correct) {
            a.right += value(s);
            ++a.nr;
        } else {
            a.wrong += value(s);
            ++a.nw;
        }
    }
    double total = 0;
    kept = 0;
    for (const auto& [id, a] : acc) {
        if (!a.nr || !a.nw) continue;
        total += a.wrong / a.nw - a.right / a.nr;
        ++kept;
    }
    return total / static_cast<double>(kept);
}

double oracle_f1(const std::vector<double>& p, const std::vector<int>& y, int positive) {
    int tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        bool pred = (p[i] >= 0.5 ? 1 : 0) == positive;
        bool truth = y[i] == positive;
        tp += pred && truth;
        fp += pred && !truth;
        fn += !pred && truth;
    }
    return tp == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
}

Dataset separable(std::mt19937_64& rng, std::size_t n) {
    Dataset d;
    std::normal_distribution<double> noise(0.0, 0.3);
    for (std::size_t i = 0; i < n; ++i) {
        int label = static_cast<int>(i % 2);
        double x = (label ? 2.0 : -2.0) + noise(rng);
        d.x.push_back({x, noise(rng)});
        d.y.push_back(label);
    }
    return d;
}

} // namespace

// ---------------------------------------------------------------------------
// Markers

TEST_CASE("marker counting examples") {
    const auto lex = MarkerLexicon::standard();
    REQUIRE_NOTHROW(lex.validate());

    auto c = count_markers("Wait, maybe this is wrong. However, perhaps not.", lex);
    CHECK(c[MarkerCategory::thinking] == 2);
    CHECK(c[MarkerCategory::hedging] == 2);
    CHECK(c[MarkerCategory::discourse] == 0);
    CHECK(c.total() == 4);

    CHECK(count_markers("On the other hand, therefore", lex)[MarkerCategory::discourse] == 2);
    CHECK(count_markers("a mighty river", lex)[MarkerCategory::hedging] == 0);
    CHECK(count_markers("the other hand", lex)[MarkerCategory::discourse] == 0);
    CHECK(count_markers("it seems so. It  seems\nright", lex)[MarkerCategory::hedging] == 2);
    CHECK(count_markers("", lex).total() == 0);
    CHECK(word_tokens("Don't STOP-now") == std::vector<std::string>{"don't", "stop", "now"});
}

TEST_CASE("marker counts are case-insensitive") {
    const auto lex = MarkerLexicon::standard();
    std::mt19937_64 rng(17);
    const std::vector<std::string> words = {"wait", "However", "maybe", "IT", "seems", "on", "the", "other",
                                            "hand", "Therefore", "x", "mighty", "Hmm", "as", "a", "result"};
    for (int trial = 0; trial < 300; ++trial) {
        std::string text;
        for (int i = rng() % 30; i > 0; --i) text += words[rng() % words.size()] + (rng() % 3 ? " " : ", ");
        std::string upper = text, lower = text;
        for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        auto base = count_markers(text, lex);
        CHECK(count_markers(upper, lex) == base);
        CHECK(count_markers(lower, lex) == base);
    }
}

TEST_CASE("a token position counts once per category") {
    MarkerLexicon lex;
    lex.categories[MarkerCategory::hedging] = {"it", "it seems"};
    REQUIRE_NOTHROW(lex.validate());
    CHECK(count_markers("it seems fine", lex)[MarkerCategory::hedging] == 1);
}

TEST_CASE("lexicon validation") {
    MarkerLexicon dup;
    dup.categories[MarkerCategory::hedging] = {"maybe"};
    dup.categories[MarkerCategory::thinking] = {"maybe"};
    CHECK_THROWS_AS(dup.validate(), ValidationError);
    MarkerLexicon upper;
    upper.categories[MarkerCategory::thinking] = {"Wait"};
    CHECK_THROWS_AS(upper.validate(), ValidationError);
    MarkerLexicon empty;
    empty.categories[MarkerCategory::thinking] = {" "};
    CHECK_THROWS_AS(empty.validate(), ValidationError);
    CHECK(marker_category_from_string("hedging") == MarkerCategory::hedging);
    CHECK_THROWS(marker_category_from_string("other"));
}

TEST_CASE("make_sample measures whitespace length and frequency") {
    auto s = make_sample("q", "Wait  so\nmaybe 4", true, 3, MarkerLexicon::standard());
    CHECK(s.length == 4);
    CHECK(s.frequency(MarkerCategory::thinking) == 0.25);
    CHECK(make_sample("q", "", false, {}, MarkerLexicon::standard()).frequency(MarkerCategory::hedging) == 0.0);
}

// ---------------------------------------------------------------------------
// Gaps

TEST_CASE("length gap example") {
    Corpus corpus = {sample("a", 100, true),  sample("a", 200, true), sample("a", 175, false),
                     sample("b", 100, true),  sample("b", 95, false), sample("c", 40, true),
                     sample("c", 60, true),   sample("d", 10, false)};
    auto report = length_gap(corpus);
    CHECK(report.average == Approx(10.0));
    CHECK(report.discarded == 2);
    REQUIRE(report.per_question.size() == 2);
    CHECK(report.per_question[0].question_id == "a");
    CHECK(report.per_question[0].gap == Approx(25.0));
    CHECK(report.per_question[1].gap == Approx(-5.0));

    CHECK_THROWS_AS(length_gap({sample("x", 1, true), sample("y", 2, false)}), EmptyResultError);
    CHECK_THROWS_AS(length_gap({}), EmptyResultError);
}

TEST_CASE("marker gap example") {
    Corpus corpus = {sample("a", 100, true, 2), sample("a", 100, false, 5)};
    auto report = marker_gap(corpus, MarkerCategory::thinking);
    CHECK(report.average == Approx(0.03));
    CHECK(marker_gap(corpus, MarkerCategory::hedging).average == 0.0);
}

TEST_CASE("gaps agree with running-sum oracle") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        auto corpus = random_corpus(rng);
        std::size_t kept = 0;
        auto expected = oracle_gap(corpus, [](const CorpusSample& s) { return static_cast<double>(s.length); }, kept);
        auto report = length_gap(corpus);
        CHECK(report.per_question.size() == kept);
        CHECK(report.average == Approx(expected).epsilon(1e-9));

        auto freq = oracle_gap(corpus, [](const CorpusSample& s) { return s.frequency(MarkerCategory::thinking); }, kept);
        CHECK(marker_gap(corpus, MarkerCategory::thinking).average == Approx(freq).epsilon(1e-9).margin(1e-12));
    }
}

TEST_CASE("doubling every length halves the marker gap") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 100; ++trial) {
        auto corpus = random_corpus(rng);
        auto doubled = corpus;
        for (auto& s : doubled) s.length *= 2;
        auto g = marker_gap(corpus, MarkerCategory::thinking).average;
        CHECK(marker_gap(doubled, MarkerCategory::thinking).average == Approx(g / 2).margin(1e-12));
        CHECK(length_gap(doubled).average == Approx(2 * length_gap(corpus).average).margin(1e-9));
    }
}

TEST_CASE("gap is invariant to sample order") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 100; ++trial) {
        auto corpus = random_corpus(rng);
        auto a = length_gap(corpus).average;
        std::shuffle(corpus.begin(), corpus.end(), rng);
        CHECK(length_gap(corpus).average == a);
    }
}

// ---------------------------------------------------------------------------
// Bins

TEST_CASE("bin sizes") {
    CHECK(bin_sizes(10, 5) == std::vector<std::size_t>{2, 2, 2, 2, 2});
    CHECK(bin_sizes(12, 5) == std::vector<std::size_t>{3, 3, 2, 2, 2});
    CHECK(bin_sizes(5, 5) == std::vector<std::size_t>{1, 1, 1, 1, 1});
    CHECK_THROWS_AS(bin_sizes(5, 0), ValidationError);
    for (std::size_t n = 0; n < 40; ++n)
        for (std::size_t b = 1; b < 8; ++b) {
            auto sizes = bin_sizes(n, b);
            CHECK(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) == n);
            CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
        }
}

TEST_CASE("binned accuracy example") {
    Corpus corpus;
    // Shuffled lengths 1..10; the four shortest are correct.
    for (std::size_t len : {7, 2, 9, 4, 1, 10, 3, 6, 8, 5}) corpus.push_back(sample("q", len, len <= 4));
    corpus.push_back(sample("short", 5, true));
    auto report = bin_accuracy(corpus);
    CHECK(report.accuracy == std::vector<double>{1.0, 1.0, 0.0, 0.0, 0.0});
    CHECK(report.questions == 1);
    CHECK(report.excluded == std::vector<std::string>{"short"});

    Corpus all_right;
    for (std::size_t i = 0; i < 12; ++i) all_right.push_back(sample(i < 6 ? "a" : "b", i, true));
    for (double a : bin_accuracy(all_right, 3).accuracy) CHECK(a == 1.0);

    CHECK_THROWS_AS(bin_accuracy({sample("q", 1, true)}), EmptyResultError);
}

TEST_CASE("binned accuracy by difficulty") {
    Corpus corpus;
    for (int i = 0; i < 5; ++i) corpus.push_back(sample("e", 10 + i, true, 0, 1));
    for (int i = 0; i < 5; ++i) corpus.push_back(sample("h", 10 + i, i == 0, 0, 5));
    corpus.push_back(sample("few", 3, true, 0, 3));
    corpus.push_back(sample("none", 3, true));
    auto reports = bin_accuracy_by_difficulty(corpus);
    REQUIRE(reports.size() == 2);
    CHECK(reports.at(1).accuracy == std::vector<double>(5, 1.0));
    CHECK(reports.at(5).accuracy == std::vector<double>{1.0, 0, 0, 0, 0});
}

// ---------------------------------------------------------------------------
// Classifier

TEST_CASE("dataset split sizes and determinism") {
    auto ten = split_dataset(10, 1);
    CHECK(ten.train.size() == 6);
    CHECK(ten.validation.size() == 2);
    CHECK(ten.test.size() == 2);
    auto eleven = split_dataset(11, 1);
    CHECK(eleven.train.size() == 7);
    CHECK(eleven.validation.size() == 2);
    CHECK(eleven.test.size() == 2);

    auto again = split_dataset(10, 1);
    CHECK(again.train == ten.train);
    CHECK(again.validation == ten.validation);
    CHECK(again.test == ten.test);
    CHECK_THROWS_AS(split_dataset(4, 0), ValidationError);

    for (std::size_t n = 5; n < 60; ++n) {
        auto s = split_dataset(n, n * 7);
        std::set<std::size_t> all(s.train.begin(), s.train.end());
        all.insert(s.validation.begin(), s.validation.end());
        all.insert(s.test.begin(), s.test.end());
        CHECK(all.size() == n);
        CHECK(*all.rbegin() == n - 1);
        CHECK(s.validation.size() == n / 5);
    }
}

TEST_CASE("feature vector layout") {
    FeatureConfig all;
    CHECK(all.names() == std::vector<std::string>{"log_length", "freq_discourse", "freq_hedging", "freq_thinking",
                                                  "total_markers"});
    auto s = sample("q", 20, true, 4);
    auto x = features(s, all);
    REQUIRE(x.size() == 5);
    CHECK(x[0] == Approx(std::log(20.0)));
    CHECK(x[3] == Approx(0.2));
    CHECK(x[4] == 4.0);
    FeatureConfig only_length{true, false, false, false, false};
    CHECK(features(sample("q", 0, true), only_length) == std::vector<double>{0.0});
}

TEST_CASE("zero iterations yields an uninformed model") {
    std::mt19937_64 rng(40);
    auto train = separable(rng, 40), valid = separable(rng, 10);
    TrainOptions options;
    options.max_iterations = 0;
    auto result = train_logistic(train, valid, options);
    CHECK(result.best_iteration == 0);
    for (double p : result.model.predict(valid)) CHECK(p == 0.5);
}

TEST_CASE("analytic gradient matches finite differences") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Dataset data;
        for (int i = 0; i < 30; ++i) {
            data.x.push_back({normal(rng), normal(rng), normal(rng)});
            data.y.push_back(static_cast<int>(rng() % 2));
        }
        std::vector<double> params{normal(rng), normal(rng), normal(rng), normal(rng)};
        const double l2 = 0.01;
        auto grad = logistic_gradient(params, data, l2);
        for (std::size_t j = 0; j < params.size(); ++j) {
            const double h = 1e-5;
            auto up = params, down = params;
            up[j] += h;
            down[j] -= h;
            double numeric = (logistic_loss(up, data, l2) - logistic_loss(down, data, l2)) / (2 * h);
            double rel = std::abs(numeric - grad[j]) / std::max({std::abs(numeric), std::abs(grad[j]), 1e-6});
            CHECK(rel < 1e-4);
        }
    }
}

TEST_CASE("loss uses only weights for the penalty") {
    Dataset one{{{0.0}}, {1}};
    std::vector<double> bias_only{0.0, 3.0};
    std::vector<double> weight_only{3.0, 0.0};
    CHECK(logistic_loss(bias_only, one, 1.0) == Approx(std::log1p(std::exp(-3.0))));
    CHECK(logistic_loss(weight_only, one, 1.0) == Approx(std::log(2.0) + 4.5));
}

TEST_CASE("separable data is learned") {
    std::mt19937_64 rng(42);
    auto train = separable(rng, 240), valid = separable(rng, 80), test = separable(rng, 80);
    auto result = train_logistic(train, valid);
    CHECK(result.best_validation_f1 >= 0.95);
    CHECK(f1_score(result.model.predict(test), test.y) >= 0.95);
    CHECK(result.model.weights[0] > 0);
}

TEST_CASE("single-label training data is rejected") {
    Dataset ones{{{1.0}, {2.0}}, {1, 1}};
    CHECK_THROWS_AS(train_logistic(ones, ones), DegenerateLabelsError);
    Dataset zeros{{{1.0}, {2.0}}, {0, 0}};
    CHECK_THROWS_AS(train_logistic(zeros, zeros), DegenerateLabelsError);
}

TEST_CASE("f1 examples") {
    std::vector<double> p{0.9, 0.8, 0.2, 0.6};
    std::vector<int> y{1, 0, 1, 0};
    CHECK(f1_score(p, y) == Approx(0.4));
    CHECK(f1_score(p, y, 0) == 0.0);
    CHECK(f1_score(std::vector<double>{0.5, 0.1}, std::vector<int>{1, 0}) == 1.0);
    CHECK(f1_score(std::vector<double>{0.1}, std::vector<int>{0}) == 0.0);
    CHECK_THROWS_AS(f1_score(std::vector<double>{0.1}, std::vector<int>{}), ValidationError);
}

TEST_CASE("f1 matches the count formula and never drops when a mistake is fixed") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t n = 1 + rng() % 20;
        std::vector<double> p(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = static_cast<double>(rng() % 101) / 100.0;
            y[i] = static_cast<int>(rng() % 2);
        }
        for (int positive : {0, 1}) {
            double f = f1_score(p, y, positive);
            CHECK(f == Approx(oracle_f1(p, y, positive)));
            for (std::size_t i = 0; i < n; ++i) {
                if ((p[i] >= 0.5 ? 1 : 0) == y[i]) continue;
                auto fixed = p;
                fixed[i] = y[i] ? 0.9 : 0.1;
                CHECK(f1_score(fixed, y, positive) >= f - 1e-12);
            }
        }
    }
}

TEST_CASE("classifier report on a corpus with a length signal") {
    std::mt19937_64 rng(44);
    Corpus corpus;
    for (int i = 0; i < 400; ++i) {
        bool correct = i % 2 == 0;
        std::size_t len = correct ? 20 + rng() % 30 : 150 + rng() % 200;
        corpus.push_back(sample("q" + std::to_string(i / 4), len, correct, rng() % 5));
    }
    auto report = evaluate_classifier(corpus, FeatureConfig{}, 7);
    CHECK(report.train_size == 240);
    CHECK(report.validation_size == 80);
    CHECK(report.test_size == 80);
    CHECK(report.test_f1 >= 0.95);
    CHECK(report.feature_names.size() == 5);

    auto again = evaluate_classifier(corpus, FeatureConfig{}, 7);
    CHECK(again.model.weights == report.model.weights);
    CHECK(again.test_f1 == report.test_f1);
    CHECK_THROWS_AS(evaluate_classifier(corpus, FeatureConfig{false, false, false, false, false}, 7), ValidationError);
}
