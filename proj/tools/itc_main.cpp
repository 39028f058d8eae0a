#include "itc/data.hpp"
#include "itc/error.hpp"
#include "itc/experiment.hpp"
#include "itc/report.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <iostream>
#include <set>

namespace fs = std::filesystem;

namespace {

int cmd_run(const fs::path& config_path) {
    auto config = itc::load_config(config_path);
    auto summary = itc::run_experiment(config);
    std::cout << itc::format_summary(summary);
    std::cout << "records in " << config.run_dir.string() << '\n';
    for (const auto& c : summary.cells)
        if (c.failed) return 3;
    return 0;
}

int cmd_analyze(const fs::path& input, const itc::AnalysisOptions& options) {
    auto outcomes = itc::analyze(input, options);
    std::cout << itc::read_file(options.out_dir / "summary.txt");
    int status = 0;
    for (const auto& o : outcomes)
        if (!o.ok) status = 3;
    return status;
}

int cmd_ingest(const fs::path& input, const std::optional<fs::path>& output, const std::optional<fs::path>& lexicon_path) {
    auto lexicon = lexicon_path ? itc::load_lexicon(*lexicon_path) : itc::MarkerLexicon::standard();
    auto entries = itc::read_corpus_entries(input);
    auto corpus = itc::build_corpus(entries, lexicon);

    std::set<std::string> questions;
    std::size_t correct = 0;
    for (const auto& s : corpus) {
        questions.insert(s.question_id);
        correct += s.correct ? 1 : 0;
    }
    std::cout << entries.size() << " responses, " << questions.size() << " questions, " << correct << " correct\n";
    if (output) {
        itc::write_file_atomic(*output, itc::normalized_corpus_jsonl(entries, lexicon));
        std::cout << "normalized corpus written to " << output->string() << '\n';
    }
    return 0;
}

int cmd_pareto(const std::vector<fs::path>& dirs, const fs::path& out_dir) {
    auto points = itc::pareto_report(dirs, out_dir);
    std::cout << itc::read_file(out_dir / "summary.txt");
    std::cout << "wrote " << (out_dir / "points.csv").string() << ", front.csv and pareto.svg\n";
    return 0;
}

int cmd_fixtures(const fs::path& config_path, const fs::path& out_dir) {
    auto config = itc::load_config(config_path);
    auto fixtures = itc::author_fixtures(config, out_dir / "authoring-run");
    fixtures.save(out_dir);
    fs::remove_all(out_dir / "authoring-run");
    std::cout << fixtures.size() << " fixtures written to " << out_dir.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"itc: inference-time compute experiments and response analysis"};
    app.require_subcommand(1);
    bool verbose = false, quiet = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Only log errors");

    fs::path config_path;
    auto* run = app.add_subcommand("run", "Execute every dataset x model x strategy cell of a config");
    run->add_option("config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);

    fs::path analyze_input;
    itc::AnalysisOptions analysis;
    std::string lexicon_path;
    std::vector<std::string> disabled_features;
    auto* analyze = app.add_subcommand("analyze", "Response statistics, classifier and Pareto reports");
    analyze->add_option("input", analyze_input, "Run directory or corpus JSONL")->required()->check(CLI::ExistingPath);
    analyze->add_option("--analyses", analysis.analyses, "length_gap marker_gap bin_accuracy classifier pareto")
        ->capture_default_str();
    analyze->add_option("-o,--out", analysis.out_dir, "Report directory")->capture_default_str();
    analyze->add_option("--bins", analysis.bins, "Length bins per question")->capture_default_str()->check(CLI::PositiveNumber);
    analyze->add_option("--seed", analysis.seed, "Split seed for the classifier")->capture_default_str();
    analyze->add_option("--lexicon", lexicon_path, "Marker lexicon override (JSON)")->check(CLI::ExistingFile);
    analyze->add_option("--without-feature", disabled_features,
                        "Drop a classifier feature (log_length, freq_discourse, freq_hedging, freq_thinking, "
                        "total_markers)");

    fs::path ingest_input;
    std::string ingest_output;
    std::string ingest_lexicon;
    auto* ingest = app.add_subcommand("ingest", "Validate and normalize an external response corpus");
    ingest->add_option("corpus", ingest_input, "JSONL of {question_id, response_text, correct, difficulty?}")
        ->required()
        ->check(CLI::ExistingFile);
    ingest->add_option("-o,--out", ingest_output, "Write the normalized corpus here");
    ingest->add_option("--lexicon", ingest_lexicon, "Marker lexicon override (JSON)")->check(CLI::ExistingFile);

    std::vector<fs::path> pareto_dirs;
    fs::path pareto_out = "pareto";
    auto* pareto = app.add_subcommand("pareto", "Accuracy-vs-compute points and front over run directories");
    pareto->add_option("dirs", pareto_dirs, "Run directories")->required()->check(CLI::ExistingDirectory);
    pareto->add_option("-o,--out", pareto_out, "Output directory")->capture_default_str();

    fs::path fixtures_config, fixtures_out;
    auto* fixtures = app.add_subcommand("fixtures", "Record scripted-backend fixtures from the synthetic model");
    fixtures->add_option("config", fixtures_config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    fixtures->add_option("-o,--out", fixtures_out, "Fixture directory")->required();

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::err : spdlog::level::info);

    try {
        if (*run) return cmd_run(config_path);
        if (*analyze) {
            if (!lexicon_path.empty()) analysis.lexicon = lexicon_path;
            for (const auto& f : disabled_features) {
                if (f == "log_length") analysis.features.log_length = false;
                else if (f == "freq_discourse") analysis.features.freq_discourse = false;
                else if (f == "freq_hedging") analysis.features.freq_hedging = false;
                else if (f == "freq_thinking") analysis.features.freq_thinking = false;
                else if (f == "total_markers") analysis.features.total_markers = false;
                else throw itc::ValidationError("without-feature", "unknown feature '" + f + "'");
            }
            return cmd_analyze(analyze_input, analysis);
        }
        if (*ingest) {
            return cmd_ingest(ingest_input, ingest_output.empty() ? std::nullopt : std::optional<fs::path>(ingest_output),
                              ingest_lexicon.empty() ? std::nullopt : std::optional<fs::path>(ingest_lexicon));
        }
        if (*pareto) return cmd_pareto(pareto_dirs, pareto_out);
        if (*fixtures) return cmd_fixtures(fixtures_config, fixtures_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
