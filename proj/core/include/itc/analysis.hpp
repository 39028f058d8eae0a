#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace itc {

// ---------------------------------------------------------------------------
// Linguistic markers

enum class MarkerCategory { discourse, hedging, thinking };
inline constexpr std::array<MarkerCategory, 3> marker_categories = {MarkerCategory::discourse, MarkerCategory::hedging,
                                                                    MarkerCategory::thinking};

std::string_view to_string(MarkerCategory category);
MarkerCategory marker_category_from_string(std::string_view name);

struct MarkerLexicon {
    std::map<MarkerCategory, std::vector<std::string>> categories;

    /// The stock discourse / hedging / thinking phrase lists.
    static MarkerLexicon standard();
    /// Phrases must be lowercase, non-empty, and belong to one category only.
    void validate() const;
};

struct MarkerCounts {
    std::array<std::size_t, 3> by_category{};

    std::size_t operator[](MarkerCategory c) const { return by_category[static_cast<std::size_t>(c)]; }
    std::size_t& operator[](MarkerCategory c) { return by_category[static_cast<std::size_t>(c)]; }
    std::size_t total() const { return by_category[0] + by_category[1] + by_category[2]; }
    bool operator==(const MarkerCounts&) const = default;
};

/// Lowercased runs of letters, digits and apostrophes.
std::vector<std::string> word_tokens(std::string_view text);

/// Case-insensitive whole-word counts. A phrase of several words matches a
/// contiguous run of tokens; each category counts a token position at most
/// once even when several of its phrases start there.
MarkerCounts count_markers(std::string_view text, const MarkerLexicon& lexicon);

// ---------------------------------------------------------------------------
// Response corpus

struct CorpusSample {
    std::string question_id;
    /// Whitespace-token count of the full response.
    std::size_t length = 0;
    MarkerCounts markers;
    bool correct = false;
    std::optional<int> difficulty;

    /// Category count per whitespace token (0 for an empty response).
    double frequency(MarkerCategory c) const;
};

using Corpus = std::vector<CorpusSample>;

CorpusSample make_sample(std::string question_id, std::string_view response_text, bool correct,
                         std::optional<int> difficulty, const MarkerLexicon& lexicon);

// ---------------------------------------------------------------------------
// Within-question gaps

struct QuestionGap {
    std::string question_id;
    double gap = 0.0;
};

struct GapReport {
    /// Mean over surviving questions of mean(incorrect) - mean(correct).
    double average = 0.0;
    /// Sorted by question id.
    std::vector<QuestionGap> per_question;
    std::size_t discarded = 0;
};

/// Questions where every sample is correct, or every sample is wrong, are
/// discarded. Throws EmptyResultError when none survive.
GapReport length_gap(const Corpus& corpus);
GapReport marker_gap(const Corpus& corpus, MarkerCategory category);

// ---------------------------------------------------------------------------
// Length-binned accuracy

/// Sizes of `bins` contiguous groups over n items; the first n % bins groups
/// take one extra item.
std::vector<std::size_t> bin_sizes(std::size_t n, std::size_t bins);

struct BinReport {
    /// Accuracy per bin (shortest responses first), averaged over questions.
    std::vector<double> accuracy;
    std::size_t questions = 0;
    /// Questions with fewer samples than bins.
    std::vector<std::string> excluded;
};

BinReport bin_accuracy(const Corpus& corpus, std::size_t bins = 5);
/// One report per difficulty level; samples without a level are skipped.
std::map<int, BinReport> bin_accuracy_by_difficulty(const Corpus& corpus, std::size_t bins = 5);

// ---------------------------------------------------------------------------
// Correctness classifier

struct DataSplit {
    std::vector<std::size_t> train, validation, test;
};

/// Shuffles 0..n-1 under `seed`; validation and test take floor(n/5) each
/// and the remainder goes to training. Requires n >= 5.
DataSplit split_dataset(std::size_t n, std::uint64_t seed);

struct FeatureConfig {
    bool log_length = true;
    bool freq_discourse = true;
    bool freq_hedging = true;
    bool freq_thinking = true;
    bool total_markers = true;

    std::vector<std::string> names() const;
    std::size_t dimension() const { return names().size(); }
};

std::vector<double> features(const CorpusSample& sample, const FeatureConfig& config);

struct Dataset {
    std::vector<std::vector<double>> x;
    /// 1 = correct response, 0 = incorrect.
    std::vector<int> y;

    std::size_t size() const { return y.size(); }
};

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<double> mean;
    std::vector<double> stddev;

    /// Probability of the positive class, kept strictly inside (0, 1).
    double predict(std::span<const double> raw) const;
    std::vector<double> predict(const Dataset& data) const;
};

struct TrainOptions {
    double learning_rate = 0.1;
    double l2 = 1e-4;
    int max_iterations = 5000;
    int eval_every = 50;
};

struct TrainResult {
    LogisticModel model;
    int best_iteration = 0;
    double best_validation_f1 = 0.0;
};

/// Per-feature mean and standard deviation (1 where a feature is constant).
void fit_standardization(const Dataset& data, std::vector<double>& mean, std::vector<double>& stddev);
Dataset standardize(const Dataset& data, std::span<const double> mean, std::span<const double> stddev);

/// Mean cross-entropy plus (l2 / 2) * |w|^2 over already-standardized data.
/// `params` holds the weights followed by the bias; the bias is not
/// regularized.
double logistic_loss(std::span<const double> params, const Dataset& standardized, double l2);
std::vector<double> logistic_gradient(std::span<const double> params, const Dataset& standardized, double l2);

/// Full-batch gradient descent from zero parameters, keeping the parameters
/// with the best validation F1 (checked at iteration 0 and every
/// eval_every iterations). Throws DegenerateLabelsError if the training set
/// holds a single label.
TrainResult train_logistic(const Dataset& train, const Dataset& validation, const TrainOptions& options = {});

/// F1 of thresholded probabilities (p >= 0.5 predicts 1) for the given
/// positive class. Zero when precision + recall is zero.
double f1_score(std::span<const double> probabilities, std::span<const int> labels, int positive_class = 1);

struct ClassifierReport {
    std::size_t train_size = 0, validation_size = 0, test_size = 0;
    double train_f1 = 0.0, validation_f1 = 0.0, test_f1 = 0.0;
    int best_iteration = 0;
    std::vector<std::string> feature_names;
    LogisticModel model;
};

ClassifierReport evaluate_classifier(const Corpus& corpus, const FeatureConfig& features, std::uint64_t seed,
                                     const TrainOptions& options = {});

} // namespace itc
