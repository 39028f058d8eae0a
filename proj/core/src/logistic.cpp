#include "itc/analysis.hpp"

#include "itc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace itc {

DataSplit split_dataset(std::size_t n, std::uint64_t seed) {
    if (n < 5) throw ValidationError("examples", "need at least 5 examples to split");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::mt19937_64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);

    const std::size_t held = n / 5;
    DataSplit split;
    split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(held),
                      order.begin() + static_cast<std::ptrdiff_t>(2 * held));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(2 * held), order.end());
    return split;
}

std::vector<std::string> FeatureConfig::names() const {
    std::vector<std::string> out;
    if (log_length) out.emplace_back("log_length");
    if (freq_discourse) out.emplace_back("freq_discourse");
    if (freq_hedging) out.emplace_back("freq_hedging");
    if (freq_thinking) out.emplace_back("freq_thinking");
    if (total_markers) out.emplace_back("total_markers");
    return out;
}

std::vector<double> features(const CorpusSample& sample, const FeatureConfig& config) {
    std::vector<double> x;
    if (config.log_length) x.push_back(std::log(static_cast<double>(std::max<std::size_t>(1, sample.length))));
    if (config.freq_discourse) x.push_back(sample.frequency(MarkerCategory::discourse));
    if (config.freq_hedging) x.push_back(sample.frequency(MarkerCategory::hedging));
    if (config.freq_thinking) x.push_back(sample.frequency(MarkerCategory::thinking));
    if (config.total_markers) x.push_back(static_cast<double>(sample.markers.total()));
    return x;
}

namespace {

constexpr double probability_floor = 1e-12;

double sigmoid(double z) {
    double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    return std::clamp(p, probability_floor, 1.0 - probability_floor);
}

double linear(std::span<const double> params, std::span<const double> x) {
    double z = params[x.size()];
    for (std::size_t j = 0; j < x.size(); ++j) z += params[j] * x[j];
    return z;
}

void check_shape(std::span<const double> params, const Dataset& data) {
    if (data.x.size() != data.y.size()) throw ValidationError("dataset", "feature and label counts differ");
    for (const auto& row : data.x)
        if (row.size() + 1 != params.size()) throw ValidationError("params", "dimension does not match features");
}

} // namespace

void fit_standardization(const Dataset& data, std::vector<double>& mean, std::vector<double>& stddev) {
    if (data.x.empty()) throw ValidationError("dataset", "empty");
    const auto d = data.x.front().size();
    mean.assign(d, 0.0);
    stddev.assign(d, 0.0);
    const auto n = static_cast<double>(data.x.size());
    for (const auto& row : data.x)
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j] / n;
    for (const auto& row : data.x)
        for (std::size_t j = 0; j < d; ++j) stddev[j] += (row[j] - mean[j]) * (row[j] - mean[j]) / n;
    for (auto& s : stddev) {
        s = std::sqrt(s);
        if (!(s > 1e-12)) s = 1.0;
    }
}

Dataset standardize(const Dataset& data, std::span<const double> mean, std::span<const double> stddev) {
    Dataset out;
    out.y = data.y;
    out.x.reserve(data.x.size());
    for (const auto& row : data.x) {
        if (row.size() != mean.size()) throw ValidationError("features", "dimension does not match model");
        std::vector<double> z(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) z[j] = (row[j] - mean[j]) / stddev[j];
        out.x.push_back(std::move(z));
    }
    return out;
}

double logistic_loss(std::span<const double> params, const Dataset& data, double l2) {
    check_shape(params, data);
    double loss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        double p = sigmoid(linear(params, data.x[i]));
        loss -= data.y[i] ? std::log(p) : std::log(1.0 - p);
    }
    loss /= static_cast<double>(std::max<std::size_t>(1, data.size()));
    for (std::size_t j = 0; j + 1 < params.size(); ++j) loss += 0.5 * l2 * params[j] * params[j];
    return loss;
}

std::vector<double> logistic_gradient(std::span<const double> params, const Dataset& data, double l2) {
    check_shape(params, data);
    std::vector<double> grad(params.size(), 0.0);
    const auto d = params.size() - 1;
    for (std::size_t i = 0; i < data.size(); ++i) {
        double residual = sigmoid(linear(params, data.x[i])) - data.y[i];
        for (std::size_t j = 0; j < d; ++j) grad[j] += residual * data.x[i][j];
        grad[d] += residual;
    }
    const auto n = static_cast<double>(std::max<std::size_t>(1, data.size()));
    for (auto& g : grad) g /= n;
    for (std::size_t j = 0; j < d; ++j) grad[j] += l2 * params[j];
    return grad;
}

double LogisticModel::predict(std::span<const double> raw) const {
    if (raw.size() != weights.size()) throw ValidationError("features", "dimension does not match model");
    double z = bias;
    for (std::size_t j = 0; j < raw.size(); ++j) z += weights[j] * (raw[j] - mean[j]) / stddev[j];
    return sigmoid(z);
}

std::vector<double> LogisticModel::predict(const Dataset& data) const {
    std::vector<double> out;
    out.reserve(data.size());
    for (const auto& row : data.x) out.push_back(predict(row));
    return out;
}

double f1_score(std::span<const double> probabilities, std::span<const int> labels, int positive_class) {
    if (probabilities.size() != labels.size()) throw ValidationError("labels", "length differs from predictions");
    if (labels.empty()) throw ValidationError("labels", "empty");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        int predicted = probabilities[i] >= 0.5 ? 1 : 0;
        bool pred_pos = predicted == positive_class;
        bool true_pos = labels[i] == positive_class;
        if (pred_pos && true_pos) ++tp;
        else if (pred_pos) ++fp;
        else if (true_pos) ++fn;
    }
    if (tp == 0) return 0.0;
    double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

TrainResult train_logistic(const Dataset& train, const Dataset& validation, const TrainOptions& options) {
    if (train.size() == 0) throw ValidationError("train", "empty");
    if (options.learning_rate <= 0) throw ValidationError("learning_rate", "must be positive");
    if (options.max_iterations < 0) throw ValidationError("max_iterations", "must be non-negative");
    if (options.eval_every < 1) throw ValidationError("eval_every", "must be at least 1");
    auto positives = std::count(train.y.begin(), train.y.end(), 1);
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(train.size())) throw DegenerateLabelsError();

    LogisticModel model;
    fit_standardization(train, model.mean, model.stddev);
    const auto d = model.mean.size();
    auto z_train = standardize(train, model.mean, model.stddev);
    auto z_valid = standardize(validation, model.mean, model.stddev);

    std::vector<double> params(d + 1, 0.0);
    auto validation_f1 = [&] {
        std::vector<double> probs;
        for (const auto& row : z_valid.x) probs.push_back(sigmoid(linear(params, row)));
        return f1_score(probs, z_valid.y);
    };

    std::vector<double> best = params;
    TrainResult result;
    bool select = validation.size() > 0;
    if (select) result.best_validation_f1 = validation_f1();

    for (int it = 1; it <= options.max_iterations; ++it) {
        auto grad = logistic_gradient(params, z_train, options.l2);
        for (std::size_t j = 0; j <= d; ++j) params[j] -= options.learning_rate * grad[j];
        if (!select) continue;
        if (it % options.eval_every == 0 || it == options.max_iterations) {
            double f1 = validation_f1();
            if (f1 > result.best_validation_f1) {
                result.best_validation_f1 = f1;
                result.best_iteration = it;
                best = params;
            }
        }
    }
    if (!select) {
        best = params;
        result.best_iteration = options.max_iterations;
    }

    model.weights.assign(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(d));
    model.bias = best[d];
    result.model = std::move(model);
    return result;
}

ClassifierReport evaluate_classifier(const Corpus& corpus, const FeatureConfig& config, std::uint64_t seed,
                                     const TrainOptions& options) {
    if (config.dimension() == 0) throw ValidationError("features", "no feature enabled");
    auto split = split_dataset(corpus.size(), seed);
    auto take = [&](const std::vector<std::size_t>& idx) {
        Dataset data;
        for (auto i : idx) {
            data.x.push_back(features(corpus[i], config));
            data.y.push_back(corpus[i].correct ? 1 : 0);
        }
        return data;
    };
    auto train = take(split.train), validation = take(split.validation), test = take(split.test);
    auto trained = train_logistic(train, validation, options);

    ClassifierReport report;
    report.train_size = train.size();
    report.validation_size = validation.size();
    report.test_size = test.size();
    report.train_f1 = f1_score(trained.model.predict(train), train.y);
    report.validation_f1 = f1_score(trained.model.predict(validation), validation.y);
    report.test_f1 = f1_score(trained.model.predict(test), test.y);
    report.best_iteration = trained.best_iteration;
    report.feature_names = config.names();
    report.model = std::move(trained.model);
    return report;
}

} // namespace itc
