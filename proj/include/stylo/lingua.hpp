#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace stylo {

enum class Pos {
  noun,
  verb,
  aux_verb,
  adjective,
  adverb,
  pronoun,
  preposition,
  conjunction,
  interjection,
  determiner,
  number,
  punctuation,
  other,
};

const char* to_string(Pos pos);
Pos pos_from_string(const std::string& name);

struct Token {
  std::string surface;
  std::string lower;
  Pos pos = Pos::other;
  bool is_alpha = false;     // every code point alphabetic
  bool is_stopword = false;  // filled by tag_pos

  /// Word tokens carry at least one alphanumeric code point; everything else
  /// (punctuation, quotes, dashes) is not counted as a word anywhere.
  bool is_word() const;
};

enum class Terminator { period, question, exclamation, none };

struct Sentence {
  std::vector<Token> tokens;
  Terminator terminator = Terminator::none;
};

struct SentimentEntry {
  double polarity = 0.0;  // [-1, 1]
  bool subjective = false;
};

/// Bundled word-knowledge tables. All keys are lowercase.
struct Lexicon {
  std::unordered_map<std::string, std::vector<Pos>> pos_table;  // ranked tags
  std::unordered_set<std::string> stopwords;
  std::unordered_set<std::string> homonyms;
  std::unordered_map<std::string, std::vector<int>> synsets;
  std::set<std::pair<std::string, std::string>> antonym_pairs;  // lexicographic order
  std::unordered_map<std::string, SentimentEntry> sentiment;
  std::unordered_set<std::string> base_verbs;
  std::unordered_set<std::string> past_participles;
  std::unordered_set<std::string> reporting_verbs;

  bool are_antonyms(const std::string& a, const std::string& b) const;
  bool share_synset(const std::string& a, const std::string& b) const;
};

/// Splits text on whitespace and punctuation boundaries. Apostrophes between
/// letters stay inside the token ("it's" is one token) except the contraction
/// "n't", which always becomes its own token: "don't" -> [do, n't].
/// Deterministic; empty text yields an empty list.
std::vector<Token> tokenize(const std::string& text);

/// Splits on '.', '!', '?' followed by (optional closing quote/bracket and)
/// whitespace or end of text. A built-in abbreviation list ("e.g.", "Dr.",
/// single initials) suppresses splits. Tokens of the sentences partition the
/// token stream of the whole text.
std::vector<Sentence> segment(const std::string& text);

/// Assigns each token its highest-ranked lexicon tag and the stopword flag.
/// Unknown words fall through suffix rules (-ly adverb, -ing/-ed verb,
/// -tion/-ness noun, -ous/-ful adjective), else noun.
std::vector<Token> tag_pos(std::vector<Token> tokens, const Lexicon& lex);

/// Tokenize + segment + tag in one pass; the common entry point for feature
/// extraction.
std::vector<Sentence> analyze(const std::string& text, const Lexicon& lex);

/// 1 + subordinators/relative pronouns after position 0 + commas that join
/// two finite verbs. Requires a tagged sentence; always >= 1.
int count_clauses(const Sentence& sentence, const Lexicon& lex);

/// Number of word tokens in the text, the single word-count definition shared
/// by corpus statistics and the similar-length filter.
std::size_t count_words(const std::string& text);

/// Loads all lexicon tables from a directory. See data/lexicon/README for the
/// file list; every file is UTF-8, one entry per line, tab-separated, with
/// '#' comment lines.
Lexicon load_lexicon(const std::filesystem::path& dir);

namespace detail {
/// Decodes the next UTF-8 code point at `i`, advancing `i`. Invalid bytes are
/// consumed one at a time and returned verbatim.
char32_t next_codepoint(const std::string& s, std::size_t& i);
std::size_t codepoint_count(const std::string& s);
}  // namespace detail

}  // namespace stylo
