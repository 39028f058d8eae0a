#include "itc/experiment.hpp"

#include "itc/error.hpp"
#include "itc/parallel.hpp"
#include "itc/report.hpp"
#include "itc/strategies.hpp"
#include "itc/transports.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace itc {

// ---------------------------------------------------------------------------
// Config

namespace {

/// Typed access to one JSON object, reporting errors under a dotted path.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_.empty() ? "config" : path_, "expected an object");
    }

    std::string field(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    void allow(std::initializer_list<std::string_view> keys) const {
        std::set<std::string_view> allowed(keys);
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!allowed.count(it.key())) throw ValidationError(field(it.key()), "unknown key");
    }

    bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    const json& at(const char* key) const {
        if (!has(key)) throw ValidationError(field(key), "missing");
        return j_.at(key);
    }

    std::string string(const char* key) const {
        const auto& v = at(key);
        if (!v.is_string() || v.get<std::string>().empty()) throw ValidationError(field(key), "must be a non-empty string");
        return v.get<std::string>();
    }
    std::string string(const char* key, std::string fallback) const { return has(key) ? string(key) : fallback; }

    template <class T>
    T integer(const char* key, T fallback, T min) const {
        if (!has(key)) return fallback;
        const auto& v = at(key);
        if (!v.is_number_integer()) throw ValidationError(field(key), "must be an integer");
        auto value = v.get<std::int64_t>();
        if (value < static_cast<std::int64_t>(min))
            throw ValidationError(field(key), "must be at least " + std::to_string(min));
        return static_cast<T>(value);
    }

    double number(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        const auto& v = at(key);
        if (!v.is_number()) throw ValidationError(field(key), "must be a number");
        return v.get<double>();
    }

    const json& array(const char* key) const {
        const auto& v = at(key);
        if (!v.is_array() || v.empty()) throw ValidationError(field(key), "must be a non-empty list");
        return v;
    }

    template <class Fn>
    auto wrap(const char* key, Fn&& fn) const -> decltype(fn()) {
        try {
            return fn();
        } catch (const ValidationError& e) {
            throw ValidationError(field(key), e.what());
        }
    }

private:
    const json& j_;
    std::string path_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

BackendType backend_type_from_string(std::string_view s) {
    if (s == "remote") return BackendType::remote;
    if (s == "scripted") return BackendType::scripted;
    if (s == "simulated") return BackendType::simulated;
    throw ValidationError("type", "unknown backend type '" + std::string(s) + "' (remote|scripted|simulated)");
}

// Re-raises a validation error from a nested parser under `prefix`, keeping
// the nested field name (e.g. "strategies[1]" + "k").
[[noreturn]] void rethrow_nested(const std::string& prefix, const ValidationError& e) {
    throw ValidationError(prefix + "." + e.field(), e.what());
}

} // namespace

ExperimentConfig parse_config(const json& j, const fs::path& base_dir) {
    Fields root(j, "");
    root.allow({"datasets", "models", "strategies", "backend", "seed", "judge_repeats", "query_workers", "run_dir"});
    ExperimentConfig config;

    const auto& datasets = root.array("datasets");
    std::set<std::string> dataset_names;
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        Fields f(datasets[i], "datasets[" + std::to_string(i) + "]");
        f.allow({"name", "path", "task_kind", "format", "limit"});
        DatasetSpec d;
        d.name = f.string("name");
        if (!dataset_names.insert(d.name).second) throw ValidationError(f.field("name"), "duplicate dataset name");
        d.path = resolve(base_dir, f.string("path"));
        d.task_kind = f.wrap("task_kind", [&] { return task_kind_from_string(f.string("task_kind", "math")); });
        d.format = f.wrap("format", [&] { return dataset_format_from_string(f.string("format", "queries")); });
        if (f.has("limit")) d.limit = f.integer<std::size_t>("limit", 0, 1);
        config.datasets.push_back(std::move(d));
    }

    const auto& models = root.array("models");
    for (std::size_t i = 0; i < models.size(); ++i) {
        Fields f(models[i], "models[" + std::to_string(i) + "]");
        f.allow({"id", "base_url_env", "kind", "synthetic"});
        ModelSpec m;
        m.id = f.string("id");
        m.base_url_env = f.string("base_url_env", "ITC_BASE_URL");
        m.kind = f.wrap("kind", [&] { return model_kind_from_string(f.string("kind", "reasoning")); });
        m.synthetic.reasoning = m.kind == ModelKind::reasoning;
        if (f.has("synthetic")) {
            Fields s(f.at("synthetic"), f.field("synthetic"));
            s.allow({"skill", "judge_glitch_rate", "seed"});
            m.synthetic.skill = s.number("skill", m.synthetic.skill);
            m.synthetic.judge_glitch_rate = s.number("judge_glitch_rate", m.synthetic.judge_glitch_rate);
            m.synthetic.seed = s.integer<std::uint64_t>("seed", 0, 0);
            if (m.synthetic.skill < 0 || m.synthetic.skill > 1) throw ValidationError(s.field("skill"), "must lie in [0, 1]");
        }
        config.models.push_back(std::move(m));
    }

    const auto& strategies = root.array("strategies");
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        auto prefix = "strategies[" + std::to_string(i) + "]";
        for (const auto& m : config.models) {
            try {
                strategy_from_json(strategies[i], m.kind);
            } catch (const ValidationError& e) {
                rethrow_nested(prefix, e);
            }
        }
        config.strategies.push_back(strategies[i]);
    }

    if (root.has("backend")) {
        Fields f(root.at("backend"), "backend");
        f.allow({"type", "cache_dir", "max_in_flight", "temperature", "max_tokens", "fixtures_dir", "max_retries"});
        auto& b = config.backend;
        b.type = f.wrap("type", [&] { return backend_type_from_string(f.string("type", "remote")); });
        if (f.has("cache_dir")) b.cache_dir = resolve(base_dir, f.string("cache_dir"));
        b.max_in_flight = f.integer<std::ptrdiff_t>("max_in_flight", 8, 1);
        b.temperature = f.number("temperature", 0.6);
        if (b.temperature < 0) throw ValidationError(f.field("temperature"), "must be non-negative");
        b.max_tokens = f.integer<int>("max_tokens", 4096, 1);
        if (f.has("fixtures_dir")) b.fixtures_dir = resolve(base_dir, f.string("fixtures_dir"));
        b.max_retries = f.integer<int>("max_retries", 3, 0);
        if (b.type == BackendType::scripted && !b.fixtures_dir)
            throw ValidationError(f.field("fixtures_dir"), "required for the scripted backend");
    }
    if (!config.backend.cache_dir) {
        if (const char* env = std::getenv("ITC_CACHE_DIR"); env && *env) config.backend.cache_dir = fs::path(env);
    }

    config.seed = root.integer<std::int64_t>("seed", 0, std::numeric_limits<std::int64_t>::min());
    config.judge_repeats = root.integer<int>("judge_repeats", default_judge_repeats, 1);
    config.query_workers = root.integer<std::size_t>("query_workers", 4, 1);
    config.run_dir = resolve(base_dir, root.string("run_dir", "runs"));
    return config;
}

ExperimentConfig load_config(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ValidationError("config", std::string("not valid JSON: ") + e.what());
    }
    return parse_config(j, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

// ---------------------------------------------------------------------------
// Run files

std::string record_line(const RunRecord& record) {
    json j = record;
    return j.dump() + '\n';
}

RecordFile read_records(const fs::path& path) {
    RecordFile file;
    std::ifstream in(path);
    if (!in) return file;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            file.records.push_back(json::parse(line).get<RunRecord>());
        } catch (const std::exception& e) {
            spdlog::warn("{}: skipping unreadable record ({})", path.string(), e.what());
            ++file.bad_lines;
        }
    }
    return file;
}

std::vector<std::pair<std::string, std::vector<RunRecord>>> read_run_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<std::pair<std::string, std::vector<RunRecord>>> out;
    for (const auto& f : files) out.emplace_back(f.stem().string(), read_records(f).records);
    return out;
}

std::string cell_file_name(const std::string& dataset, const std::string& model, const std::string& strategy_label) {
    auto clean = [](std::string s) {
        for (auto& c : s)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' && c != '-') c = '_';
        return s;
    };
    return clean(dataset) + "__" + clean(model) + "__" + clean(strategy_label) + ".jsonl";
}

// ---------------------------------------------------------------------------
// Execution

namespace {

std::unique_ptr<Transport> make_transport(const ExperimentConfig& config, const ModelSpec& model,
                                          const RunOptions& options,
                                          const std::optional<FixtureSet>& fixtures) {
    std::unique_ptr<Transport> transport;
    if (options.transport_factory) {
        transport = options.transport_factory(model);
    } else {
        switch (config.backend.type) {
        case BackendType::remote: {
            auto remote = RemoteOptions::from_environment(model.base_url_env);
            remote.max_retries = config.backend.max_retries;
            transport = std::make_unique<RemoteTransport>(std::move(remote));
            break;
        }
        case BackendType::scripted:
            transport = std::make_unique<ScriptedTransport>(*fixtures);
            break;
        case BackendType::simulated:
            transport = std::make_unique<SyntheticTransport>(model.synthetic);
            break;
        }
    }
    if (options.record_fixtures)
        transport = std::make_unique<RecordingTransport>(std::move(transport), options.record_fixtures);
    return transport;
}

/// Existing error-free records of a cell; rewrites the file when it held
/// error records or unreadable lines.
std::vector<RunRecord> prepare_cell_file(const fs::path& path) {
    auto file = read_records(path);
    std::vector<RunRecord> kept;
    for (auto& r : file.records)
        if (!r.error) kept.push_back(std::move(r));
    if (file.bad_lines > 0 || kept.size() != file.records.size()) {
        std::string content;
        for (const auto& r : kept) content += record_line(r);
        write_file_atomic(path, content);
        spdlog::info("{}: dropped {} error record(s) and {} unreadable line(s)", path.filename().string(),
                     file.records.size() - kept.size(), file.bad_lines);
    }
    return kept;
}

json summary_json(const RunSummary& summary) {
    json cells = json::array();
    for (const auto& c : summary.cells) {
        json cell{{"dataset", c.dataset},
                  {"model", c.model},
                  {"strategy", c.strategy},
                  {"file", c.file.filename().string()},
                  {"records", c.records},
                  {"correct", c.correct},
                  {"accuracy", c.records ? static_cast<double>(c.correct) / static_cast<double>(c.records) : 0.0},
                  {"completion_tokens", c.completion_tokens},
                  {"failed", c.failed}};
        if (!c.error.empty()) cell["error"] = c.error;
        cells.push_back(std::move(cell));
    }
    return json{{"cells", cells}};
}

} // namespace

RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    fs::create_directories(config.run_dir);

    std::optional<FixtureSet> fixtures;
    if (config.backend.type == BackendType::scripted && !options.transport_factory)
        fixtures = FixtureSet::load(*config.backend.fixtures_dir);

    std::vector<std::vector<Query>> datasets;
    for (const auto& d : config.datasets) {
        auto queries = load_dataset(d.path, d.format, d.task_kind);
        if (d.limit && queries.size() > *d.limit) queries.resize(*d.limit);
        datasets.push_back(std::move(queries));
    }

    RunSummary summary;
    for (const auto& model : config.models) {
        Backend backend(make_transport(config, model, options, fixtures),
                        BackendOptions{config.backend.cache_dir, config.backend.max_in_flight});
        GenerationParams params;
        params.temperature = config.backend.temperature;
        params.max_tokens = config.backend.max_tokens;
        params.seed = config.seed;
        StrategyContext ctx{ModelClient(backend, model.id, params), config.judge_repeats,
                            static_cast<std::size_t>(config.backend.max_in_flight)};

        for (std::size_t d = 0; d < config.datasets.size(); ++d) {
            for (const auto& raw : config.strategies) {
                auto strategy = strategy_from_json(raw, model.kind);
                CellSummary cell;
                cell.dataset = config.datasets[d].name;
                cell.model = model.id;
                cell.strategy = strategy_label(strategy);
                cell.file = config.run_dir / cell_file_name(cell.dataset, cell.model, cell.strategy);

                auto existing = prepare_cell_file(cell.file);
                std::set<std::string> done;
                for (const auto& r : existing) {
                    done.insert(r.query_id);
                    ++cell.records;
                    cell.correct += r.correct ? 1 : 0;
                    cell.completion_tokens += r.total_completion_tokens;
                }
                cell.resumed = existing.size();

                std::vector<const Query*> pending;
                for (const auto& q : datasets[d])
                    if (!done.count(q.id)) pending.push_back(&q);

                spdlog::info("cell {}: {} queries pending, {} already done", cell.file.filename().string(),
                             pending.size(), cell.resumed);
                std::ofstream out(cell.file, std::ios::app | std::ios::binary);
                if (!out) throw Error("cannot open " + cell.file.string());

                try {
                    for (std::size_t start = 0; start < pending.size() && !cell.failed;
                         start += config.query_workers) {
                        auto count = std::min(config.query_workers, pending.size() - start);
                        std::vector<RunRecord> batch(count);
                        parallel_for(count, count, [&](std::size_t i) {
                            batch[i] = run_strategy(*pending[start + i], strategy, ctx);
                        });
                        for (const auto& r : batch) {
                            out << record_line(r);
                            ++cell.records;
                            cell.correct += r.correct ? 1 : 0;
                            cell.completion_tokens += r.total_completion_tokens;
                            if (r.error && !cell.failed) {
                                cell.failed = true;
                                cell.error = "query " + r.query_id + ": " + *r.error;
                            }
                        }
                        out.flush();
                    }
                } catch (const std::exception& e) {
                    cell.failed = true;
                    cell.error = e.what();
                }
                if (cell.failed) spdlog::error("cell {} failed: {}", cell.file.filename().string(), cell.error);
                summary.cells.push_back(std::move(cell));
            }
        }
        summary.transport_calls += backend.transport_calls();
        summary.cache_hits += backend.cache_hits();
    }

    write_file_atomic(config.run_dir / "summary.txt", format_summary(summary));
    write_file_atomic(config.run_dir / "summary.json", summary_json(summary).dump(2) + '\n');
    return summary;
}

FixtureSet author_fixtures(ExperimentConfig config, const fs::path& scratch_dir) {
    fs::remove_all(scratch_dir);
    config.backend.type = BackendType::simulated;
    config.backend.cache_dir.reset();
    config.run_dir = scratch_dir;
    RunOptions options;
    options.record_fixtures = std::make_shared<FixtureSet>();
    run_experiment(config, options);
    return *options.record_fixtures;
}

std::string format_summary(const RunSummary& summary) {
    std::ostringstream out;
    out << "cell\trecords\taccuracy\tcompletion_tokens\tmean_tokens\tstatus\n";
    for (const auto& c : summary.cells) {
        double acc = c.records ? static_cast<double>(c.correct) / static_cast<double>(c.records) : 0.0;
        double mean = c.records ? static_cast<double>(c.completion_tokens) / static_cast<double>(c.records) : 0.0;
        out << c.file.stem().string() << '\t' << c.records << '\t' << format_number(acc) << '\t'
            << c.completion_tokens << '\t' << format_number(mean) << '\t'
            << (c.failed ? "FAILED: " + c.error : std::string("ok")) << '\n';
    }
    out << "transport calls: " << summary.transport_calls << ", cache hits: " << summary.cache_hits << '\n';
    return out.str();
}

} // namespace itc
