#include "stylo/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "stylo/error.hpp"

namespace stylo {

namespace {

const std::unordered_set<std::string> kBeForms = {
    "be", "am", "is", "are", "was", "were", "been", "being"};

const std::unordered_set<std::string> kNegations = {"not", "no", "never",
                                                    "n't", "none"};

const std::unordered_set<std::string> kModals = {"would", "could", "should"};

bool is_verbish(Pos p) { return p == Pos::verb || p == Pos::aux_verb; }

bool ends_with(const std::string& s, const char* suffix) {
  std::string_view v(suffix);
  return s.size() > v.size() && s.compare(s.size() - v.size(), v.size(), v) == 0;
}

bool is_past_participle(const Token& t, const Lexicon& lex) {
  if (lex.past_participles.count(t.lower)) return true;
  return t.pos == Pos::verb && ends_with(t.lower, "ed");
}

bool is_past_verb(const Token& t, const Lexicon& lex) {
  if (!is_verbish(t.pos)) return false;
  if (ends_with(t.lower, "ed")) return true;
  if (lex.past_participles.count(t.lower)) return true;
  return t.lower == "was" || t.lower == "were" || t.lower == "had" ||
         t.lower == "did";
}

bool is_quote_char(const std::string& surface) {
  return surface == "\"" || surface == "“" || surface == "”";
}

struct Analysis {
  std::vector<Sentence> sentences;
  std::vector<const Token*> words;  // word tokens in paragraph order

  explicit Analysis(const std::string& text, const Lexicon& lex)
      : sentences(analyze(text, lex)) {
    for (const Sentence& s : sentences)
      for (const Token& t : s.tokens)
        if (t.is_word()) words.push_back(&t);
  }
};

LinguisticFeatures linguistic_from(const Analysis& a, const std::string& id) {
  if (a.words.empty())
    throw DataError("record " + id + ": paragraph has no word tokens");
  double n = static_cast<double>(a.words.size());
  LinguisticFeatures f;
  for (const Token* t : a.words) {
    switch (t->pos) {
      case Pos::verb: f.verb_ratio += 1; break;
      case Pos::noun: f.noun_ratio += 1; break;
      case Pos::adjective: f.adjective_ratio += 1; break;
      case Pos::pronoun: f.pronoun_ratio += 1; break;
      case Pos::adverb: f.adverb_ratio += 1; break;
      case Pos::preposition: f.preposition_ratio += 1; break;
      case Pos::conjunction: f.conjunction_ratio += 1; break;
      case Pos::interjection: f.interjection_ratio += 1; break;
      default: break;
    }
  }
  f.verb_ratio /= n;
  f.noun_ratio /= n;
  f.adjective_ratio /= n;
  f.pronoun_ratio /= n;
  f.adverb_ratio /= n;
  f.preposition_ratio /= n;
  f.conjunction_ratio /= n;
  f.interjection_ratio /= n;
  return f;
}

StructuralFeatures structural_from(const Analysis& a, const std::string& text,
                                   const Lexicon& lex, const std::string& id) {
  if (a.sentences.empty() || a.words.empty())
    throw DataError("record " + id + ": paragraph has no sentences");

  StructuralFeatures f;
  f.sentence_count = static_cast<double>(a.sentences.size());
  f.word_count = static_cast<double>(a.words.size());
  f.average_sentence_length = f.word_count / f.sentence_count;

  // Case ratios over ASCII letters.
  std::int64_t lower = 0, upper = 0;
  for (char ch : text) {
    if (ch >= 'a' && ch <= 'z') ++lower;
    else if (ch >= 'A' && ch <= 'Z') ++upper;
  }
  if (lower + upper == 0)
    throw DataError("record " + id + ": no alphabetic characters");
  f.lowercase_letter_ratio = static_cast<double>(lower) / (lower + upper);
  f.capital_letter_ratio = static_cast<double>(upper) / (lower + upper);

  std::unordered_map<std::string, int> type_counts;
  int stopwords = 0;
  for (const Token* t : a.words) {
    ++type_counts[t->lower];
    if (t->is_stopword) ++stopwords;
  }
  f.lexical_diversity = static_cast<double>(type_counts.size()) / f.word_count;
  f.stopword_ratio = static_cast<double>(stopwords) / f.word_count;

  // Burstiness: population variance over mean of per-type counts.
  double mean = f.word_count / static_cast<double>(type_counts.size());
  double var = 0;
  for (const auto& [w, c] : type_counts) {
    double d = c - mean;
    var += d * d;
  }
  var /= static_cast<double>(type_counts.size());
  f.burstiness = var / mean;

  double clause_sum = 0;
  int complex_sentences = 0;
  for (const Sentence& s : a.sentences) {
    int clauses = count_clauses(s, lex);
    clause_sum += clauses;
    if (clauses >= 2) ++complex_sentences;
  }
  f.sentence_complexity = clause_sum / f.sentence_count;
  f.complex_ratio = static_cast<double>(complex_sentences) / f.sentence_count;
  return f;
}

// Simile detection: "as ADJ as" or "like" + noun phrase after a verb.
int simile_count(const Sentence& s) {
  std::vector<const Token*> words;
  for (const Token& t : s.tokens)
    if (t.is_word()) words.push_back(&t);
  int hits = 0;
  bool verb_seen = false;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i + 2 < words.size() && words[i]->lower == "as" &&
        words[i + 1]->pos == Pos::adjective && words[i + 2]->lower == "as") {
      ++hits;
    }
    if (words[i]->lower == "like" && verb_seen) {
      for (std::size_t k = i + 1; k < std::min(i + 5, words.size()); ++k) {
        Pos p = words[k]->pos;
        if (p == Pos::noun || p == Pos::pronoun) {
          ++hits;
          break;
        }
        if (p != Pos::determiner && p != Pos::adjective && p != Pos::number)
          break;
      }
    }
    if (is_verbish(words[i]->pos)) verb_seen = true;
  }
  return hits;
}

SemanticFeatures semantic_from(const Analysis& a, const Lexicon& lex,
                               const std::string& id) {
  if (a.words.empty())
    throw DataError("record " + id + ": paragraph has no word tokens");
  double n = static_cast<double>(a.words.size());
  SemanticFeatures f;

  double polarity_sum = 0;
  int bearing = 0, subjective = 0, homonyms = 0;
  for (const Token* t : a.words) {
    auto it = lex.sentiment.find(t->lower);
    if (it != lex.sentiment.end()) {
      polarity_sum += it->second.polarity;
      ++bearing;
      if (it->second.subjective) ++subjective;
    }
    if (lex.homonyms.count(t->lower)) ++homonyms;
  }
  f.sentiment_polarity = bearing ? polarity_sum / bearing : 0.0;
  f.subjectivity = bearing ? static_cast<double>(subjective) / bearing : 0.0;
  f.homonym_frequency = homonyms / n;

  int similes = 0;
  for (const Sentence& s : a.sentences) similes += simile_count(s);
  f.simile_frequency = similes / static_cast<double>(a.sentences.size());

  // Synonyms: token shares a synset with a *different* earlier token.
  int synonym_hits = 0;
  for (std::size_t i = 0; i < a.words.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (a.words[j]->lower != a.words[i]->lower &&
          lex.share_synset(a.words[i]->lower, a.words[j]->lower)) {
        ++synonym_hits;
        break;
      }
    }
  }
  f.synonym_frequency = synonym_hits / n;

  int antonym_hits = 0;
  for (std::size_t i = 0; i < a.words.size(); ++i) {
    for (std::size_t j = 0; j < a.words.size(); ++j) {
      if (j != i && lex.are_antonyms(a.words[i]->lower, a.words[j]->lower)) {
        ++antonym_hits;
        break;
      }
    }
  }
  f.antonym_frequency = antonym_hits / n;
  return f;
}

InteractionFeatures interaction_from(const Analysis& a, const Lexicon& lex,
                                     const std::string& id) {
  if (a.sentences.empty())
    throw DataError("record " + id + ": paragraph has no sentences");
  double n = static_cast<double>(a.sentences.size());
  InteractionFeatures f;
  int active = 0, passive = 0, direct = 0, indirect = 0;
  int conditional = 0, negation = 0, question = 0, exclamatory = 0;
  int imperative = 0, subjunctive = 0;

  for (const Sentence& s : a.sentences) {
    const auto& toks = s.tokens;
    std::vector<const Token*> words;
    for (const Token& t : toks)
      if (t.is_word()) words.push_back(&t);

    // Voice: form of "be" followed within 3 tokens by a past participle.
    bool is_passive = false, has_verb = false;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (is_verbish(toks[i].pos)) has_verb = true;
      if (kBeForms.count(toks[i].lower)) {
        for (std::size_t k = i + 1; k < std::min(i + 4, toks.size()); ++k) {
          if (is_past_participle(toks[k], lex)) {
            is_passive = true;
            break;
          }
        }
      }
    }
    if (is_passive) ++passive;
    else if (has_verb) ++active;

    int quote_chars = 0;
    bool reporting = false;
    for (const Token& t : toks) {
      if (is_quote_char(t.surface)) ++quote_chars;
      if (lex.reporting_verbs.count(t.lower)) reporting = true;
    }
    if (quote_chars >= 2) ++direct;
    else if (reporting) ++indirect;

    bool is_conditional = false, has_negation = false, has_wish = false;
    bool if_past = false, modal_base = false;
    for (std::size_t w = 0; w < words.size(); ++w) {
      const std::string& lw = words[w]->lower;
      if (lw == "if" || lw == "unless") is_conditional = true;
      if (lw == "provided" && w + 1 < words.size() &&
          words[w + 1]->lower == "that")
        is_conditional = true;
      if (kNegations.count(lw)) has_negation = true;
      if (lw == "wish" || lw == "wishes" || lw == "wished") has_wish = true;
      if (lw == "if") {
        for (std::size_t k = w + 1; k < words.size(); ++k) {
          if (is_past_verb(*words[k], lex)) {
            if_past = true;
            break;
          }
        }
      }
      if (kModals.count(lw)) {
        for (std::size_t k = w + 1; k < std::min(w + 3, words.size()); ++k) {
          if (lex.base_verbs.count(words[k]->lower)) {
            modal_base = true;
            break;
          }
        }
      }
    }
    if (is_conditional) ++conditional;
    if (has_negation) ++negation;
    if (s.terminator == Terminator::question) ++question;
    if (s.terminator == Terminator::exclamation) ++exclamatory;
    if (!words.empty() && lex.base_verbs.count(words.front()->lower))
      ++imperative;
    if (if_past || has_wish || modal_base) ++subjunctive;
  }

  f.active_passive_ratio = (active + 1.0) / (passive + 1.0);
  f.direct_indirect_speech_ratio = (direct + 1.0) / (indirect + 1.0);
  f.conditional_sentence_ratio = conditional / n;
  f.negation_ratio = negation / n;
  f.question_ratio = question / n;
  f.exclamatory_sentence_ratio = exclamatory / n;
  f.imperative_mood_ratio = imperative / n;
  f.subjunctive_mood_ratio = subjunctive / n;
  return f;
}

}  // namespace

std::array<double, kFeatureCount> FeatureVector::to_array() const {
  return {linguistic.verb_ratio,
          linguistic.noun_ratio,
          linguistic.adjective_ratio,
          linguistic.pronoun_ratio,
          linguistic.adverb_ratio,
          linguistic.preposition_ratio,
          linguistic.conjunction_ratio,
          linguistic.interjection_ratio,
          structural.average_sentence_length,
          structural.lowercase_letter_ratio,
          structural.capital_letter_ratio,
          structural.lexical_diversity,
          structural.sentence_complexity,
          structural.burstiness,
          structural.sentence_count,
          structural.word_count,
          structural.stopword_ratio,
          structural.complex_ratio,
          semantic.sentiment_polarity,
          semantic.subjectivity,
          semantic.homonym_frequency,
          semantic.simile_frequency,
          semantic.synonym_frequency,
          semantic.antonym_frequency,
          interaction.active_passive_ratio,
          interaction.direct_indirect_speech_ratio,
          interaction.conditional_sentence_ratio,
          interaction.negation_ratio,
          interaction.question_ratio,
          interaction.exclamatory_sentence_ratio,
          interaction.imperative_mood_ratio,
          interaction.subjunctive_mood_ratio};
}

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = {
      "verb_ratio",
      "noun_ratio",
      "adjective_ratio",
      "pronoun_ratio",
      "adverb_ratio",
      "preposition_ratio",
      "conjunction_ratio",
      "interjection_ratio",
      "average_sentence_length",
      "lowercase_letter_ratio",
      "capital_letter_ratio",
      "lexical_diversity",
      "sentence_complexity",
      "burstiness",
      "sentence_count",
      "word_count",
      "stopword_ratio",
      "complex_ratio",
      "sentiment_polarity",
      "subjectivity",
      "homonym_frequency",
      "simile_frequency",
      "synonym_frequency",
      "antonym_frequency",
      "active_passive_ratio",
      "direct_indirect_speech_ratio",
      "conditional_sentence_ratio",
      "negation_ratio",
      "question_ratio",
      "exclamatory_sentence_ratio",
      "imperative_mood_ratio",
      "subjunctive_mood_ratio"};
  return names;
}

Eigen::VectorXd FeatureMatrix::labels01() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i)
    y[static_cast<Eigen::Index>(i)] = labels[i] == Label::chatbot ? 1.0 : 0.0;
  return y;
}

LinguisticFeatures extract_linguistic(const ParagraphRecord& p, const Lexicon& lex) {
  return linguistic_from(Analysis(p.text, lex), p.id);
}

StructuralFeatures extract_structural(const ParagraphRecord& p, const Lexicon& lex) {
  return structural_from(Analysis(p.text, lex), p.text, lex, p.id);
}

SemanticFeatures extract_semantic(const ParagraphRecord& p, const Lexicon& lex) {
  return semantic_from(Analysis(p.text, lex), lex, p.id);
}

InteractionFeatures extract_interaction(const ParagraphRecord& p, const Lexicon& lex) {
  return interaction_from(Analysis(p.text, lex), lex, p.id);
}

FeatureVector extract_all(const ParagraphRecord& p, const Lexicon& lex) {
  Analysis a(p.text, lex);
  FeatureVector v;
  v.linguistic = linguistic_from(a, p.id);
  v.structural = structural_from(a, p.text, lex, p.id);
  v.semantic = semantic_from(a, lex, p.id);
  v.interaction = interaction_from(a, lex, p.id);
  return v;
}

FeatureMatrix feature_matrix(const Corpus& corpus, const Lexicon& lex) {
  FeatureMatrix m;
  m.columns = feature_names();
  m.values.resize(static_cast<Eigen::Index>(corpus.records.size()), kFeatureCount);
  m.labels.reserve(corpus.records.size());
  m.ids.reserve(corpus.records.size());
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const ParagraphRecord& r = corpus.records[i];
    std::array<double, kFeatureCount> row = extract_all(r, lex).to_array();
    for (int j = 0; j < kFeatureCount; ++j)
      m.values(static_cast<Eigen::Index>(i), j) = row[static_cast<std::size_t>(j)];
    m.labels.push_back(r.label);
    m.ids.push_back(r.id);
  }
  return m;
}

Eigen::MatrixXd correlation_matrix(const FeatureMatrix& m) {
  const Eigen::Index n = m.rows(), d = m.cols();
  if (n < 2) throw DataError("correlation needs at least 2 rows");
  Eigen::MatrixXd centered = m.values.rowwise() - m.values.colwise().mean();
  Eigen::VectorXd sd = (centered.array().square().colwise().sum() / double(n))
                           .sqrt()
                           .matrix();
  Eigen::MatrixXd cov = (centered.transpose() * centered) / double(n);
  Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i == j) {
        corr(i, j) = 1.0;
      } else if (sd[i] > 0 && sd[j] > 0) {
        corr(i, j) = std::clamp(cov(i, j) / (sd[i] * sd[j]), -1.0, 1.0);
      }
    }
  }
  return corr;
}

namespace {

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void save_matrix_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write matrix file: " + path.string());
  for (const std::string& c : m.columns) out << csv_quote(c) << ',';
  out << "label,id\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << format_value(m.values(i, j)) << ',';
    out << to_string(m.labels[static_cast<std::size_t>(i)]) << ','
        << csv_quote(m.ids[static_cast<std::size_t>(i)]) << '\n';
  }
}

FeatureMatrix load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open matrix file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty matrix file: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();

  // The matrix CSV dialect never embeds newlines, so parse per line.
  auto split_row = [](const std::string& row) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < row.size(); ++i) {
      char c = row[i];
      if (quoted) {
        if (c == '"' && i + 1 < row.size() && row[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else if (c == '"') {
          quoted = false;
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
    }
    fields.push_back(std::move(field));
    return fields;
  };

  std::vector<std::string> header = split_row(line);
  if (header.size() < 3 || header[header.size() - 2] != "label" ||
      header.back() != "id")
    throw DataError("matrix header must end with label,id: " + path.string());
  FeatureMatrix m;
  m.columns.assign(header.begin(), header.end() - 2);

  std::vector<std::vector<double>> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_row(line);
    if (f.size() != header.size())
      throw DataError("row " + std::to_string(row_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(f.size()));
    std::vector<double> vals(m.columns.size());
    for (std::size_t j = 0; j < m.columns.size(); ++j) {
      try {
        vals[j] = std::stod(f[j]);
      } catch (const std::exception&) {
        throw DataError("row " + std::to_string(row_no) + ": bad number \"" +
                        f[j] + "\"");
      }
    }
    rows.push_back(std::move(vals));
    m.labels.push_back(label_from_string(f[f.size() - 2]));
    m.ids.push_back(f.back());
  }
  m.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(m.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < m.columns.size(); ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return m;
}

void save_correlation_csv(const Eigen::MatrixXd& corr,
                          const std::vector<std::string>& names,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write correlation file: " + path.string());
  out << "feature";
  for (const std::string& n : names) out << ',' << csv_quote(n);
  out << '\n';
  for (Eigen::Index i = 0; i < corr.rows(); ++i) {
    out << csv_quote(names[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < corr.cols(); ++j)
      out << ',' << format_value(corr(i, j));
    out << '\n';
  }
}

}  // namespace stylo
