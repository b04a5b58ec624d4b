#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace stylo {

enum class Label { human = 0, chatbot = 1 };

const char* to_string(Label label);
Label label_from_string(const std::string& name);  // throws DataError

/// One labeled paragraph; the atomic corpus unit.
struct ParagraphRecord {
  std::string id;
  std::string title;
  std::string headline;
  std::string section_label;
  std::string text;
  Label label = Label::human;
  std::string pair_id;  // empty when the corpus is unpaired
};

enum class CorpusFormat { jsonl, csv };

CorpusFormat corpus_format_from_string(const std::string& name);

struct Corpus {
  std::vector<ParagraphRecord> records;  // insertion order preserved
  std::string source;                    // provenance: path or "memory"
  std::string format;                    // provenance: "jsonl" | "csv" | "memory"

  std::size_t size() const { return records.size(); }
};

struct SplitSpec {
  double train_fraction = 0.8;  // strictly in (0, 1)
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct ClassStats {
  std::int64_t paragraph_count = 0;
  std::int64_t word_count = 0;
  std::int64_t char_count = 0;

  /// Average words per paragraph, rounded to 2 decimals for reporting.
  double avg_words_per_paragraph() const;
};

struct CorpusStats {
  ClassStats human;
  ClassStats chatbot;
};

/// Reads one record per row; malformed rows are rejected with their row
/// number. CSV follows the fixed dialect: comma-separated, double-quote
/// escaping, header row required.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path,
                 CorpusFormat format);

/// Per-class paragraph/word/char counts. Word counts come from the lingua
/// tokenizer so statistics and the length filter agree on what a word is.
CorpusStats corpus_stats(const Corpus& corpus);

std::string corpus_stats_json(const CorpusStats& stats);

/// Deterministic (seeded) train/test split; stratified by default with
/// class-ratio error at most one record per class.
std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec);

/// Keeps exactly the complete pairs whose per-class word counts differ by
/// fewer than `threshold_words`; both members of a retained pair survive.
Corpus similar_length_subset(const Corpus& corpus, int threshold_words = 15);

}  // namespace stylo
