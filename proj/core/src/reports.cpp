#include "itc/error.hpp"
#include "itc/experiment.hpp"
#include "itc/report.hpp"

#include <spdlog/spdlog.h>

#include <sstream>

namespace fs = std::filesystem;

namespace itc {

namespace {

struct Inputs {
    Corpus corpus;
    std::optional<std::vector<std::pair<std::string, std::vector<RunRecord>>>> cells;
};

std::vector<ParetoPoint> cell_points(const std::vector<std::pair<std::string, std::vector<RunRecord>>>& cells,
                                     const std::string& prefix) {
    std::vector<ParetoPoint> points;
    for (const auto& [name, records] : cells) {
        if (records.empty()) continue;
        points.push_back(aggregate(prefix + name, records));
    }
    return points;
}

std::vector<fs::path> write_pareto(const std::vector<ParetoPoint>& points, const fs::path& out_dir,
                                   std::ostringstream& summary) {
    auto front = pareto_front(points);
    write_file_atomic(out_dir / "points.csv", points_csv(points));
    write_file_atomic(out_dir / "front.csv", points_csv(front));
    write_file_atomic(out_dir / "pareto.svg", pareto_svg(points, front));
    summary << "pareto: " << points.size() << " point(s), " << front.size() << " on the front\n";
    for (const auto& p : front)
        summary << "  " << p.label << "  compute=" << format_number(p.compute)
                << "  accuracy=" << format_number(p.accuracy) << '\n';
    return {out_dir / "points.csv", out_dir / "front.csv", out_dir / "pareto.svg"};
}

void run_one(const std::string& name, const Inputs& in, const AnalysisOptions& options, std::ostringstream& summary,
             AnalysisOutcome& outcome) {
    const auto& out = options.out_dir;
    if (name == "length_gap") {
        auto gap = length_gap(in.corpus);
        std::string csv = "question_id,length_gap\n";
        std::vector<Bar> bars;
        for (const auto& q : gap.per_question) {
            csv += csv_field(q.question_id) + ',' + format_number(q.gap) + '\n';
            bars.push_back({q.question_id, q.gap});
        }
        write_file_atomic(out / "length_gap.csv", csv);
        write_file_atomic(out / "length_gap.svg",
                          bar_chart_svg("Length gap per question (incorrect - correct)", "whitespace tokens", bars));
        outcome.files = {out / "length_gap.csv", out / "length_gap.svg"};
        summary << "length_gap: average " << format_number(gap.average) << " tokens over " << gap.per_question.size()
                << " question(s); " << gap.discarded << " single-class question(s) discarded\n";
    } else if (name == "marker_gap") {
        std::map<MarkerCategory, GapReport> gaps;
        for (auto c : marker_categories) gaps.emplace(c, marker_gap(in.corpus, c));
        std::string csv = "question_id,discourse,hedging,thinking\n";
        const auto& ids = gaps.at(MarkerCategory::discourse).per_question;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            csv += csv_field(ids[i].question_id);
            for (auto c : marker_categories) csv += ',' + format_number(gaps.at(c).per_question[i].gap);
            csv += '\n';
        }
        std::vector<Bar> bars;
        summary << "marker_gap (frequency per token, incorrect - correct):\n";
        for (auto c : marker_categories) {
            bars.push_back({std::string(to_string(c)), gaps.at(c).average});
            summary << "  " << to_string(c) << ": " << format_number(gaps.at(c).average) << '\n';
        }
        write_file_atomic(out / "marker_gap.csv", csv);
        write_file_atomic(out / "marker_gap.svg", bar_chart_svg("Average marker frequency gap", "gap", bars));
        outcome.files = {out / "marker_gap.csv", out / "marker_gap.svg"};
    } else if (name == "bin_accuracy") {
        auto overall = bin_accuracy(in.corpus, options.bins);
        std::string csv = "difficulty,bin,accuracy\n";
        std::vector<Bar> bars;
        for (std::size_t b = 0; b < overall.accuracy.size(); ++b) {
            csv += "all," + std::to_string(b + 1) + ',' + format_number(overall.accuracy[b]) + '\n';
            bars.push_back({"bin " + std::to_string(b + 1), overall.accuracy[b]});
        }
        for (const auto& [level, report] : bin_accuracy_by_difficulty(in.corpus, options.bins))
            for (std::size_t b = 0; b < report.accuracy.size(); ++b)
                csv += std::to_string(level) + ',' + std::to_string(b + 1) + ',' + format_number(report.accuracy[b]) +
                       '\n';
        write_file_atomic(out / "bin_accuracy.csv", csv);
        write_file_atomic(out / "bin_accuracy.svg",
                          bar_chart_svg("Accuracy by length bin (shortest first)", "accuracy", bars));
        outcome.files = {out / "bin_accuracy.csv", out / "bin_accuracy.svg"};
        summary << "bin_accuracy over " << overall.questions << " question(s)";
        if (!overall.excluded.empty()) summary << " (" << overall.excluded.size() << " excluded: too few samples)";
        summary << ":";
        for (double a : overall.accuracy) summary << ' ' << format_number(a);
        summary << '\n';
    } else if (name == "classifier") {
        auto report = evaluate_classifier(in.corpus, options.features, options.seed, options.train);
        std::string csv = "metric,value\n";
        csv += "train_size," + std::to_string(report.train_size) + '\n';
        csv += "validation_size," + std::to_string(report.validation_size) + '\n';
        csv += "test_size," + std::to_string(report.test_size) + '\n';
        csv += "train_f1," + format_number(report.train_f1) + '\n';
        csv += "validation_f1," + format_number(report.validation_f1) + '\n';
        csv += "test_f1," + format_number(report.test_f1) + '\n';
        csv += "best_iteration," + std::to_string(report.best_iteration) + '\n';
        std::vector<Bar> bars;
        for (std::size_t j = 0; j < report.feature_names.size(); ++j) {
            csv += "weight_" + report.feature_names[j] + ',' + format_number(report.model.weights[j]) + '\n';
            bars.push_back({report.feature_names[j], report.model.weights[j]});
        }
        csv += "bias," + format_number(report.model.bias) + '\n';
        write_file_atomic(out / "classifier.csv", csv);
        write_file_atomic(out / "classifier.svg",
                          bar_chart_svg("Standardized feature weights (positive = correct)", "weight", bars));
        outcome.files = {out / "classifier.csv", out / "classifier.svg"};
        summary << "classifier: split " << report.train_size << '/' << report.validation_size << '/'
                << report.test_size << " (train/validation/test); test F1 " << format_number(report.test_f1)
                << ", validation F1 " << format_number(report.validation_f1) << ", best iteration "
                << report.best_iteration << '\n';
    } else if (name == "pareto") {
        if (!in.cells) throw ValidationError("pareto", "needs a run directory, not a corpus file");
        auto points = cell_points(*in.cells, "");
        if (points.empty()) throw EmptyResultError("no records in run directory");
        outcome.files = write_pareto(points, out, summary);
    } else {
        throw ValidationError("analyses", "unknown analysis '" + name + "'");
    }
}

} // namespace

std::vector<AnalysisOutcome> analyze(const fs::path& input, const AnalysisOptions& options) {
    auto lexicon = options.lexicon ? load_lexicon(*options.lexicon) : MarkerLexicon::standard();
    Inputs in;
    if (fs::is_directory(input)) {
        in.cells = read_run_dir(input);
        for (const auto& [name, records] : *in.cells) {
            auto part = corpus_from_records(name, records, lexicon);
            in.corpus.insert(in.corpus.end(), part.begin(), part.end());
        }
    } else {
        in.corpus = build_corpus(read_corpus_entries(input), lexicon);
    }
    fs::create_directories(options.out_dir);

    std::ostringstream summary;
    summary << "input: " << input.string() << " (" << in.corpus.size() << " responses)\n";
    std::vector<AnalysisOutcome> outcomes;
    for (const auto& name : options.analyses) {
        AnalysisOutcome outcome;
        outcome.name = name;
        try {
            run_one(name, in, options, summary, outcome);
            outcome.ok = true;
        } catch (const std::exception& e) {
            outcome.message = e.what();
            summary << name << ": FAILED: " << e.what() << '\n';
            spdlog::error("analysis {} failed: {}", name, e.what());
        }
        outcomes.push_back(std::move(outcome));
    }
    write_file_atomic(options.out_dir / "summary.txt", summary.str());
    return outcomes;
}

std::vector<ParetoPoint> pareto_report(const std::vector<fs::path>& run_dirs, const fs::path& out_dir) {
    std::vector<ParetoPoint> points;
    for (const auto& dir : run_dirs) {
        auto prefix = run_dirs.size() > 1 ? dir.filename().string() + "/" : std::string();
        if (prefix == "/") prefix = dir.parent_path().filename().string() + "/";
        auto part = cell_points(read_run_dir(dir), prefix);
        points.insert(points.end(), part.begin(), part.end());
    }
    if (points.empty()) throw EmptyResultError("no run records found");
    std::ostringstream summary;
    write_pareto(points, out_dir, summary);
    write_file_atomic(out_dir / "summary.txt", summary.str());
    return points;
}

} // namespace itc
