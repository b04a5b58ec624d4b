#include "stylo/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stylo/error.hpp"
#include "stylo/lingua.hpp"
#include "stylo/rng.hpp"

namespace stylo {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n\f\v");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(b, e - b + 1);
}

void validate_record(const ParagraphRecord& r, std::size_t row) {
  if (trim(r.text).empty())
    throw DataError("row " + std::to_string(row) + ": empty text");
  if (r.id.empty())
    throw DataError("row " + std::to_string(row) + ": missing id");
}

// --- CSV dialect: comma-separated, double-quote escaping, header required ---

std::vector<std::string> parse_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
    ++i;
  }
  if (quoted) throw DataError("unterminated quote in CSV row");
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// Reads a logical CSV row, honoring newlines inside quoted fields.
bool read_csv_record(std::istream& in, std::string& out) {
  out.clear();
  std::string line;
  bool have_any = false;
  while (std::getline(in, line)) {
    have_any = true;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!out.empty()) out.push_back('\n');
    out += line;
    // Row is complete once quotes are balanced.
    std::size_t quotes = std::count(out.begin(), out.end(), '"');
    if (quotes % 2 == 0) return true;
  }
  return have_any;
}

const std::vector<std::string> kFields = {"id",   "title", "headline",
                                          "section_label", "text", "label",
                                          "pair_id"};

Corpus load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path.string());
  Corpus corpus;
  corpus.source = path.string();
  corpus.format = "jsonl";
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("row " + std::to_string(row) + ": " + e.what());
    }
    ParagraphRecord r;
    try {
      r.id = j.value("id", "");
      r.title = j.value("title", "");
      r.headline = j.value("headline", "");
      r.section_label = j.value("section_label", "");
      if (!j.contains("text"))
        throw DataError("row " + std::to_string(row) + ": missing field text");
      r.text = j.at("text").get<std::string>();
      if (!j.contains("label"))
        throw DataError("row " + std::to_string(row) + ": missing field label");
      r.label = label_from_string(j.at("label").get<std::string>());
      r.pair_id = j.value("pair_id", "");
    } catch (const json::exception& e) {
      throw DataError("row " + std::to_string(row) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("row " + std::to_string(row) + ": " + std::string(e.what()));
    }
    validate_record(r, row);
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

Corpus load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path.string());
  Corpus corpus;
  corpus.source = path.string();
  corpus.format = "csv";

  std::string raw;
  if (!read_csv_record(in, raw)) throw DataError("empty CSV file: " + path.string());
  std::vector<std::string> header = parse_csv_row(raw);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[trim(header[i])] = i;
  for (const char* required : {"id", "text", "label"}) {
    if (!col.count(required))
      throw DataError(std::string("CSV header missing column: ") + required);
  }
  auto get = [&](const std::vector<std::string>& f, const std::string& name) {
    auto it = col.find(name);
    if (it == col.end() || it->second >= f.size()) return std::string();
    return f[it->second];
  };

  std::size_t row = 1;  // header is row 1
  while (read_csv_record(in, raw)) {
    ++row;
    if (trim(raw).empty()) continue;
    std::vector<std::string> f;
    try {
      f = parse_csv_row(raw);
    } catch (const DataError& e) {
      throw DataError("row " + std::to_string(row) + ": " + std::string(e.what()));
    }
    ParagraphRecord r;
    r.id = get(f, "id");
    r.title = get(f, "title");
    r.headline = get(f, "headline");
    r.section_label = get(f, "section_label");
    r.text = get(f, "text");
    try {
      r.label = label_from_string(get(f, "label"));
    } catch (const DataError& e) {
      throw DataError("row " + std::to_string(row) + ": " + std::string(e.what()));
    }
    r.pair_id = get(f, "pair_id");
    validate_record(r, row);
    corpus.records.push_back(std::move(r));
  }
  return corpus;
}

}  // namespace

const char* to_string(Label label) {
  return label == Label::human ? "human" : "chatbot";
}

Label label_from_string(const std::string& name) {
  if (name == "human") return Label::human;
  if (name == "chatbot") return Label::chatbot;
  throw DataError("unknown label: \"" + name + "\" (expected human|chatbot)");
}

CorpusFormat corpus_format_from_string(const std::string& name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "csv") return CorpusFormat::csv;
  throw DataError("unknown corpus format: " + name + " (expected jsonl|csv)");
}

double ClassStats::avg_words_per_paragraph() const {
  if (paragraph_count == 0) return 0.0;
  double avg = static_cast<double>(word_count) / static_cast<double>(paragraph_count);
  return std::round(avg * 100.0) / 100.0;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  if (!std::filesystem::exists(path))
    throw DataError("corpus file not found: " + path.string());
  Corpus corpus =
      format == CorpusFormat::jsonl ? load_jsonl(path) : load_csv(path);
  // id uniqueness
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    auto [it, fresh] = seen.emplace(corpus.records[i].id, i);
    if (!fresh)
      throw DataError("duplicate id \"" + corpus.records[i].id + "\" at records " +
                      std::to_string(it->second + 1) + " and " +
                      std::to_string(i + 1));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path,
                 CorpusFormat format) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file: " + path.string());
  if (format == CorpusFormat::jsonl) {
    for (const ParagraphRecord& r : corpus.records) {
      json j{{"id", r.id},
             {"title", r.title},
             {"headline", r.headline},
             {"section_label", r.section_label},
             {"text", r.text},
             {"label", to_string(r.label)}};
      if (!r.pair_id.empty()) j["pair_id"] = r.pair_id;
      out << j.dump() << '\n';
    }
  } else {
    out << "id,title,headline,section_label,text,label,pair_id\n";
    for (const ParagraphRecord& r : corpus.records) {
      out << csv_escape(r.id) << ',' << csv_escape(r.title) << ','
          << csv_escape(r.headline) << ',' << csv_escape(r.section_label) << ','
          << csv_escape(r.text) << ',' << to_string(r.label) << ','
          << csv_escape(r.pair_id) << '\n';
    }
  }
}

CorpusStats corpus_stats(const Corpus& corpus) {
  if (corpus.records.empty()) throw DataError("corpus is empty");
  CorpusStats stats;
  for (const ParagraphRecord& r : corpus.records) {
    ClassStats& c = r.label == Label::human ? stats.human : stats.chatbot;
    c.paragraph_count += 1;
    c.word_count += static_cast<std::int64_t>(count_words(r.text));
    c.char_count += static_cast<std::int64_t>(detail::codepoint_count(r.text));
  }
  return stats;
}

std::string corpus_stats_json(const CorpusStats& stats) {
  auto cls = [](const ClassStats& c) {
    return json{{"paragraph_count", c.paragraph_count},
                {"word_count", c.word_count},
                {"char_count", c.char_count},
                {"avg_words_per_paragraph", c.avg_words_per_paragraph()}};
  };
  return json{{"human", cls(stats.human)}, {"chatbot", cls(stats.chatbot)}}
      .dump(2);
}

std::pair<Corpus, Corpus> split(const Corpus& corpus, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw DataError("train_fraction must lie strictly between 0 and 1");

  std::vector<std::vector<std::size_t>> groups;
  if (spec.stratified) {
    std::vector<std::size_t> human, chatbot;
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
      (corpus.records[i].label == Label::human ? human : chatbot).push_back(i);
    }
    for (auto* g : {&human, &chatbot}) {
      if (!g->empty() && g->size() < 2)
        throw DataError("stratified split needs at least 2 records per class");
    }
    if (!human.empty()) groups.push_back(std::move(human));
    if (!chatbot.empty()) groups.push_back(std::move(chatbot));
  } else {
    std::vector<std::size_t> all(corpus.records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    groups.push_back(std::move(all));
  }

  Rng rng(spec.seed);
  std::vector<bool> in_train(corpus.records.size(), false);
  for (auto& g : groups) {
    rng.shuffle(g);
    auto n = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(g.size())));
    n = std::clamp<std::size_t>(n, 1, g.size() - 1);
    for (std::size_t i = 0; i < n; ++i) in_train[g[i]] = true;
  }

  Corpus train, test;
  train.source = test.source = corpus.source;
  train.format = test.format = corpus.format;
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    (in_train[i] ? train : test).records.push_back(corpus.records[i]);
  }
  return {std::move(train), std::move(test)};
}

Corpus similar_length_subset(const Corpus& corpus, int threshold_words) {
  // pair_id -> per-class word counts (summed over siblings) + presence
  struct PairInfo {
    std::int64_t words[2] = {0, 0};
    bool present[2] = {false, false};
  };
  std::map<std::string, PairInfo> pairs;
  bool any_pair = false;
  for (const ParagraphRecord& r : corpus.records) {
    if (r.pair_id.empty()) continue;
    any_pair = true;
    PairInfo& p = pairs[r.pair_id];
    int cls = static_cast<int>(r.label);
    p.words[cls] += static_cast<std::int64_t>(count_words(r.text));
    p.present[cls] = true;
  }
  if (!any_pair) throw DataError("corpus has no pair_ids; cannot pair records");

  Corpus out;
  out.source = corpus.source;
  out.format = corpus.format;
  for (const ParagraphRecord& r : corpus.records) {
    if (r.pair_id.empty()) continue;
    const PairInfo& p = pairs.at(r.pair_id);
    if (!p.present[0] || !p.present[1]) continue;  // incomplete pair
    if (std::llabs(p.words[0] - p.words[1]) < threshold_words)
      out.records.push_back(r);
  }
  return out;
}

}  // namespace stylo
