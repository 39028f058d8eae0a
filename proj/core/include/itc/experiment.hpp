#pragma once

#include "itc/analysis.hpp"
#include "itc/backend.hpp"
#include "itc/data.hpp"
#include "itc/domain.hpp"
#include "itc/pareto.hpp"
#include "itc/serialize.hpp"
#include "itc/synthetic.hpp"
#include "itc/transports.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace itc {

// ---------------------------------------------------------------------------
// Run configuration (JSON)

struct DatasetSpec {
    std::string name;
    std::filesystem::path path;
    TaskKind task_kind = TaskKind::math;
    DatasetFormat format = DatasetFormat::queries;
    /// Use only the first N queries.
    std::optional<std::size_t> limit;
};

struct ModelSpec {
    std::string id;
    /// Environment variable holding the endpoint base URL.
    std::string base_url_env = "ITC_BASE_URL";
    ModelKind kind = ModelKind::reasoning;
    /// Used when the backend type is "simulated".
    SyntheticOptions synthetic;
};

enum class BackendType { remote, scripted, simulated };

struct BackendSpec {
    BackendType type = BackendType::remote;
    std::optional<std::filesystem::path> cache_dir;
    std::ptrdiff_t max_in_flight = 8;
    double temperature = 0.6;
    int max_tokens = 4096;
    /// Directory of recorded responses for the scripted backend.
    std::optional<std::filesystem::path> fixtures_dir;
    int max_retries = 3;
};

struct ExperimentConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<ModelSpec> models;
    /// Raw strategy objects; defaults depend on each model's kind.
    std::vector<json> strategies;
    BackendSpec backend;
    std::int64_t seed = 0;
    int judge_repeats = default_judge_repeats;
    /// Queries of one cell processed concurrently.
    std::size_t query_workers = 4;
    std::filesystem::path run_dir = "runs";
};

/// Relative paths resolve against `base_dir`. ITC_CACHE_DIR supplies the
/// cache directory when the config leaves it out. Throws ValidationError
/// naming the offending field (e.g. "strategies[1].k").
ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Execution

struct CellSummary {
    std::string dataset;
    std::string model;
    std::string strategy;
    std::filesystem::path file;
    std::size_t records = 0;
    std::size_t correct = 0;
    std::int64_t completion_tokens = 0;
    std::size_t resumed = 0;
    bool failed = false;
    std::string error;
};

struct RunSummary {
    std::vector<CellSummary> cells;
    std::size_t transport_calls = 0;
    std::size_t cache_hits = 0;
};

struct RunOptions {
    /// Replaces the transport built from the config (tests, tooling).
    std::function<std::unique_ptr<Transport>(const ModelSpec&)> transport_factory;
    /// Every transport reply is also recorded here as a fixture.
    std::shared_ptr<FixtureSet> record_fixtures;
};

/// File holding one cell's records: `<dataset>__<model>__<strategy label>.jsonl`
/// with characters outside [A-Za-z0-9._-] replaced by '_'.
std::string cell_file_name(const std::string& dataset, const std::string& model, const std::string& strategy_label);

/// Runs every dataset x model x strategy cell, appending one JSON line per
/// query. Queries that already have an error-free record are skipped; error
/// records and a torn final line are dropped first. A backend failure stops
/// its cell (marked failed) and the run moves on. Writes summary.txt and
/// summary.json into the run directory.
RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

std::string format_summary(const RunSummary& summary);

/// Runs `config` against the synthetic model with caching off, recording
/// every reply. Run files go to `scratch_dir`, which is cleared first.
FixtureSet author_fixtures(ExperimentConfig config, const std::filesystem::path& scratch_dir);

// ---------------------------------------------------------------------------
// Run files

struct RecordFile {
    std::vector<RunRecord> records;
    /// Lines that failed to parse (a torn final line after a crash).
    std::size_t bad_lines = 0;
};

RecordFile read_records(const std::filesystem::path& path);
/// Records of every *.jsonl cell file in the directory, by file stem.
std::vector<std::pair<std::string, std::vector<RunRecord>>> read_run_dir(const std::filesystem::path& dir);

std::string record_line(const RunRecord& record);

// ---------------------------------------------------------------------------
// Reports

struct AnalysisOptions {
    std::vector<std::string> analyses = {"length_gap", "marker_gap", "bin_accuracy", "classifier", "pareto"};
    std::filesystem::path out_dir = "report";
    std::size_t bins = 5;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> lexicon;
    FeatureConfig features;
    TrainOptions train;
};

struct AnalysisOutcome {
    std::string name;
    bool ok = false;
    std::string message;
    std::vector<std::filesystem::path> files;
};

/// `input` is a run directory or a corpus JSONL file. Each analysis writes
/// CSV and SVG files plus a section of summary.txt; one failing analysis
/// does not stop the rest.
std::vector<AnalysisOutcome> analyze(const std::filesystem::path& input, const AnalysisOptions& options);

/// One point per cell file across the run directories; writes points.csv,
/// front.csv and pareto.svg into `out_dir`.
std::vector<ParetoPoint> pareto_report(const std::vector<std::filesystem::path>& run_dirs,
                                       const std::filesystem::path& out_dir);

} // namespace itc
