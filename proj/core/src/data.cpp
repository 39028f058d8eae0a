#include "itc/data.hpp"

#include "itc/answer.hpp"
#include "itc/error.hpp"
#include "itc/serialize.hpp"

#include <fstream>
#include <functional>
#include <regex>

namespace itc {

DatasetFormat dataset_format_from_string(std::string_view s) {
    if (s == "queries") return DatasetFormat::queries;
    if (s == "math") return DatasetFormat::math;
    if (s == "choice") return DatasetFormat::choice;
    throw ValidationError("format", "unknown dataset format '" + std::string(s) + "' (queries|math|choice)");
}

std::string_view to_string(DatasetFormat format) {
    switch (format) {
    case DatasetFormat::queries: return "queries";
    case DatasetFormat::math: return "math";
    case DatasetFormat::choice: return "choice";
    }
    return "?";
}

namespace {

/// Calls `fn(json, line_number)` for each non-blank line, gathering every
/// failure into one IngestError.
void for_each_json_line(const std::filesystem::path& path, const std::function<void(const json&, std::size_t)>& fn) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<IngestError::LineError> bad;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto j = json::parse(line);
            if (!j.is_object()) throw Error("expected a JSON object");
            fn(j, number);
        } catch (const std::exception& e) {
            bad.push_back({number, e.what()});
        }
    }
    if (!bad.empty()) throw IngestError(std::move(bad));
}

std::string require_string(const json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(key, "missing");
    const auto& v = j.at(key);
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return v.dump();
    throw ValidationError(key, "must be a string");
}

std::optional<int> parse_level(const json& j) {
    if (!j.contains("level") || j.at("level").is_null()) return std::nullopt;
    const auto& v = j.at("level");
    if (v.is_number_integer()) return v.get<int>();
    static const std::regex digits(R"((\d+))");
    std::smatch m;
    auto s = v.get<std::string>();
    if (std::regex_search(s, m, digits)) return std::stoi(m[1].str());
    return std::nullopt;
}

} // namespace

std::string format_choice_prompt(std::string_view question, const std::vector<std::string>& choices) {
    std::string out(question);
    out += "\n";
    for (std::size_t i = 0; i < choices.size(); ++i) {
        out += "\n(";
        out += static_cast<char>('A' + i);
        out += ") " + choices[i];
    }
    return out;
}

std::vector<Query> load_dataset(const std::filesystem::path& path, DatasetFormat format, TaskKind task_kind) {
    std::vector<Query> queries;
    for_each_json_line(path, [&](const json& j, std::size_t line) {
        Query q;
        q.task_kind = task_kind;
        switch (format) {
        case DatasetFormat::queries:
            q.id = require_string(j, "id");
            q.prompt = require_string(j, "prompt");
            q.gold_answer = require_string(j, "gold_answer");
            if (j.contains("task_kind")) q.task_kind = task_kind_from_string(j.at("task_kind").get<std::string>());
            if (j.contains("difficulty") && !j.at("difficulty").is_null()) q.difficulty = j.at("difficulty").get<int>();
            break;
        case DatasetFormat::math: {
            q.id = j.contains("id") ? require_string(j, "id") : "math-" + std::to_string(line);
            q.prompt = require_string(j, "problem");
            if (j.contains("answer")) {
                q.gold_answer = require_string(j, "answer");
            } else {
                auto boxed = extract_boxed(require_string(j, "solution"));
                if (!boxed) throw ValidationError("solution", "no \\boxed{} answer");
                q.gold_answer = *boxed;
            }
            auto level = parse_level(j);
            if (level && *level >= 1 && *level <= 5) q.difficulty = level;
            break;
        }
        case DatasetFormat::choice: {
            q.task_kind = TaskKind::multiple_choice;
            q.id = j.contains("id") ? require_string(j, "id") : "choice-" + std::to_string(line);
            if (!j.contains("choices") || !j.at("choices").is_array()) throw ValidationError("choices", "missing");
            auto choices = j.at("choices").get<std::vector<std::string>>();
            if (choices.empty() || choices.size() > 26) throw ValidationError("choices", "need 1 to 26 choices");
            q.prompt = format_choice_prompt(require_string(j, "question"), choices);
            const auto& answer = j.at("answer");
            if (answer.is_number_integer()) {
                auto idx = answer.get<int>();
                if (idx < 0 || idx >= static_cast<int>(choices.size())) throw ValidationError("answer", "out of range");
                q.gold_answer = std::string(1, static_cast<char>('A' + idx));
            } else {
                q.gold_answer = require_string(j, "answer");
            }
            break;
        }
        }
        q.validate();
        queries.push_back(std::move(q));
    });
    return queries;
}

std::vector<CorpusEntry> read_corpus_entries(const std::filesystem::path& path) {
    std::vector<CorpusEntry> entries;
    for_each_json_line(path, [&](const json& j, std::size_t) {
        CorpusEntry e;
        e.question_id = require_string(j, "question_id");
        if (!j.contains("response_text") || !j.at("response_text").is_string())
            throw ValidationError("response_text", j.contains("response_text") ? "must be a string" : "missing");
        e.response_text = j.at("response_text").get<std::string>();
        if (!j.contains("correct")) throw ValidationError("correct", "missing");
        const auto& c = j.at("correct");
        if (c.is_boolean()) e.correct = c.get<bool>();
        else if (c.is_number_integer() && (c.get<int>() == 0 || c.get<int>() == 1)) e.correct = c.get<int>() == 1;
        else throw ValidationError("correct", "must be true/false or 0/1");
        if (j.contains("difficulty") && !j.at("difficulty").is_null()) {
            if (!j.at("difficulty").is_number_integer()) throw ValidationError("difficulty", "must be an integer");
            e.difficulty = j.at("difficulty").get<int>();
        }
        entries.push_back(std::move(e));
    });
    return entries;
}

Corpus build_corpus(const std::vector<CorpusEntry>& entries, const MarkerLexicon& lexicon) {
    Corpus corpus;
    corpus.reserve(entries.size());
    for (const auto& e : entries)
        corpus.push_back(make_sample(e.question_id, e.response_text, e.correct, e.difficulty, lexicon));
    return corpus;
}

std::string normalized_corpus_jsonl(const std::vector<CorpusEntry>& entries, const MarkerLexicon& lexicon) {
    std::string out;
    for (const auto& e : entries) {
        auto sample = make_sample(e.question_id, e.response_text, e.correct, e.difficulty, lexicon);
        json j{{"question_id", e.question_id}, {"response_text", e.response_text}, {"correct", e.correct}};
        if (e.difficulty) j["difficulty"] = *e.difficulty;
        j["length"] = sample.length;
        json markers = json::object();
        for (auto c : marker_categories) markers[std::string(to_string(c))] = sample.markers[c];
        j["markers"] = markers;
        out += j.dump() + '\n';
    }
    return out;
}

MarkerLexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("lexicon", e.what());
    }
    if (!j.is_object()) throw ValidationError("lexicon", "expected an object of category -> phrases");
    auto lexicon = MarkerLexicon::standard();
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto category = marker_category_from_string(it.key());
        if (!it.value().is_array()) throw ValidationError("lexicon." + it.key(), "expected a list of phrases");
        lexicon.categories[category] = it.value().get<std::vector<std::string>>();
    }
    lexicon.validate();
    return lexicon;
}

Corpus corpus_from_records(const std::string& cell, const std::vector<RunRecord>& records,
                           const MarkerLexicon& lexicon) {
    Corpus corpus;
    for (const auto& r : records) {
        for (const auto& call : r.calls) {
            if (call.role != CallRole::sample) continue;
            bool correct = is_correct(extract_answer(call.response.answer_text, r.task_kind), r.gold_answer, r.task_kind);
            corpus.push_back(make_sample(cell + "/" + r.query_id, call.response.text, correct, std::nullopt, lexicon));
        }
    }
    return corpus;
}

} // namespace itc
