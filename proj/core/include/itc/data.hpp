#pragma once

#include "itc/analysis.hpp"
#include "itc/domain.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace itc {

// ---------------------------------------------------------------------------
// Datasets

/// On-disk dataset shapes, all JSONL:
///  - queries: Query fields {id, prompt, gold_answer, task_kind?, difficulty?}
///  - math:    {problem, solution, level?, answer?, id?}; gold is `answer`
///             when present, else the last \boxed{} in `solution`
///  - choice:  {question, choices: [..], answer, id?}; answer is a letter or
///             a 0-based index
enum class DatasetFormat { queries, math, choice };

DatasetFormat dataset_format_from_string(std::string_view s);
std::string_view to_string(DatasetFormat format);

/// Every malformed line is collected before an IngestError is thrown.
std::vector<Query> load_dataset(const std::filesystem::path& path, DatasetFormat format,
                                TaskKind task_kind = TaskKind::math);

/// "(A) first\n(B) second..." appended to the question.
std::string format_choice_prompt(std::string_view question, const std::vector<std::string>& choices);

// ---------------------------------------------------------------------------
// External response corpora

struct CorpusEntry {
    std::string question_id;
    std::string response_text;
    bool correct = false;
    std::optional<int> difficulty;
};

/// JSONL lines of {question_id, response_text, correct, difficulty?}.
/// Throws IngestError listing every bad line by number.
std::vector<CorpusEntry> read_corpus_entries(const std::filesystem::path& path);

Corpus build_corpus(const std::vector<CorpusEntry>& entries, const MarkerLexicon& lexicon);

/// The entries as JSONL, each line extended with the computed `length` and
/// per-category `markers`. Reading it back yields the same entries.
std::string normalized_corpus_jsonl(const std::vector<CorpusEntry>& entries, const MarkerLexicon& lexicon);

/// {"discourse": [...], "hedging": [...], "thinking": [...]}; categories
/// left out keep their standard phrases.
MarkerLexicon load_lexicon(const std::filesystem::path& path);

/// Sample-role calls of run records as corpus samples, scored against each
/// record's gold answer. Question ids are `<cell>/<query_id>`.
Corpus corpus_from_records(const std::string& cell, const std::vector<RunRecord>& records,
                           const MarkerLexicon& lexicon);

} // namespace itc
