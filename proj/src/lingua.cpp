#include "stylo/lingua.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "stylo/error.hpp"

namespace stylo {

namespace {

bool is_ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

bool is_ascii_alpha(char32_t c) {
  return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
}

bool is_space_cp(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v' || c == 0x00A0;
}

// Non-ASCII code points count as letters unless they are common punctuation.
bool is_nonascii_punct(char32_t c) {
  switch (c) {
    case 0x2018: case 0x2019: case 0x201A: case 0x201B:
    case 0x201C: case 0x201D: case 0x201E: case 0x201F:
    case 0x2013: case 0x2014: case 0x2026:
    case 0x00AB: case 0x00BB:
      return true;
    default:
      return false;
  }
}

bool is_letter_cp(char32_t c) {
  if (c < 0x80) return is_ascii_alpha(c);
  return !is_nonascii_punct(c) && !is_space_cp(c);
}

bool is_word_cp(char32_t c) { return is_letter_cp(c) || is_ascii_digit(c); }

bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019; }

void append_cp(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

std::string lower_copy(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    unsigned char u = static_cast<unsigned char>(ch);
    out.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : ch);
  }
  return out;
}

Token make_token(std::string surface) {
  Token t;
  t.lower = lower_copy(surface);
  t.surface = std::move(surface);
  t.is_alpha = !t.surface.empty();
  std::size_t i = 0;
  while (i < t.surface.size()) {
    char32_t c = detail::next_codepoint(t.surface, i);
    if (!is_letter_cp(c)) {
      t.is_alpha = false;
      break;
    }
  }
  return t;
}

// Abbreviations that suppress sentence splits; stored with the trailing dot.
const std::array<const char*, 22> kAbbreviations = {
    "e.g.", "i.e.",  "etc.", "vs.",  "dr.",   "mr.",  "mrs.",    "ms.",
    "prof.", "st.",  "no.",  "fig.", "figs.", "al.",  "jr.",     "sr.",
    "inc.", "ltd.",  "co.",  "dept.", "univ.", "approx."};

bool is_abbreviation(const std::string& chunk_lower) {
  for (const char* a : kAbbreviations) {
    if (chunk_lower == a) return true;
  }
  // Single initials such as "J." in "J. Smith".
  if (chunk_lower.size() == 2 && chunk_lower[1] == '.' &&
      is_ascii_alpha(static_cast<char32_t>(chunk_lower[0]))) {
    return true;
  }
  return false;
}

bool is_closer(char32_t c) {
  return c == U'"' || c == U'\'' || c == 0x201D || c == 0x2019 || c == U')' ||
         c == U']' || c == 0x00BB;
}

const std::array<const char*, 10> kSubordinators = {
    "because", "although", "which", "that",   "who",
    "while",   "since",    "if",    "unless", "whereas"};

bool is_subordinator(const std::string& lower) {
  return std::find(kSubordinators.begin(), kSubordinators.end(), lower) !=
         kSubordinators.end();
}

bool is_verb_tag(Pos p) { return p == Pos::verb || p == Pos::aux_verb; }

bool ends_with(const std::string& s, const char* suffix) {
  std::string_view v(suffix);
  return s.size() > v.size() && s.compare(s.size() - v.size(), v.size(), v) == 0;
}

}  // namespace

namespace detail {

char32_t next_codepoint(const std::string& s, std::size_t& i) {
  unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = (b0 >= 0xF0) ? 4 : (b0 >= 0xE0) ? 3 : (b0 >= 0xC0) ? 2 : 1;
  if (len == 1 || i + len > s.size()) {  // invalid byte, consume as-is
    ++i;
    return b0;
  }
  char32_t cp = b0 & (0x7F >> len);
  for (int k = 1; k < len; ++k) {
    unsigned char bk = static_cast<unsigned char>(s[i + k]);
    if ((bk & 0xC0) != 0x80) {
      ++i;
      return b0;
    }
    cp = (cp << 6) | (bk & 0x3F);
  }
  i += len;
  return cp;
}

std::size_t codepoint_count(const std::string& s) {
  std::size_t i = 0, n = 0;
  while (i < s.size()) {
    next_codepoint(s, i);
    ++n;
  }
  return n;
}

}  // namespace detail

const char* to_string(Pos pos) {
  switch (pos) {
    case Pos::noun: return "noun";
    case Pos::verb: return "verb";
    case Pos::aux_verb: return "aux_verb";
    case Pos::adjective: return "adjective";
    case Pos::adverb: return "adverb";
    case Pos::pronoun: return "pronoun";
    case Pos::preposition: return "preposition";
    case Pos::conjunction: return "conjunction";
    case Pos::interjection: return "interjection";
    case Pos::determiner: return "determiner";
    case Pos::number: return "number";
    case Pos::punctuation: return "punctuation";
    case Pos::other: return "other";
  }
  return "other";
}

Pos pos_from_string(const std::string& name) {
  static const std::unordered_map<std::string, Pos> table = {
      {"noun", Pos::noun},
      {"verb", Pos::verb},
      {"aux_verb", Pos::aux_verb},
      {"adjective", Pos::adjective},
      {"adverb", Pos::adverb},
      {"pronoun", Pos::pronoun},
      {"preposition", Pos::preposition},
      {"conjunction", Pos::conjunction},
      {"interjection", Pos::interjection},
      {"determiner", Pos::determiner},
      {"number", Pos::number},
      {"punctuation", Pos::punctuation},
      {"other", Pos::other}};
  auto it = table.find(name);
  if (it == table.end()) throw DataError("unknown POS tag: " + name);
  return it->second;
}

bool Token::is_word() const {
  std::size_t i = 0;
  while (i < surface.size()) {
    char32_t c = detail::next_codepoint(surface, i);
    if (is_letter_cp(c) || is_ascii_digit(c)) return true;
  }
  return false;
}

bool Lexicon::are_antonyms(const std::string& a, const std::string& b) const {
  if (a == b) return false;
  auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  return antonym_pairs.count(key) > 0;
}

bool Lexicon::share_synset(const std::string& a, const std::string& b) const {
  auto ia = synsets.find(a);
  auto ib = synsets.find(b);
  if (ia == synsets.end() || ib == synsets.end()) return false;
  for (int sa : ia->second) {
    for (int sb : ib->second) {
      if (sa == sb) return true;
    }
  }
  return false;
}

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  std::string word;
  char32_t prev = 0;

  auto flush_word = [&]() {
    if (word.empty()) return;
    std::string lower = lower_copy(word);
    // Contraction rule: "n't" is always its own token.
    if (lower.size() > 3 && ends_with(lower, "n't")) {
      tokens.push_back(make_token(word.substr(0, word.size() - 3)));
      tokens.push_back(make_token(word.substr(word.size() - 3)));
    } else {
      tokens.push_back(make_token(word));
    }
    word.clear();
  };

  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t start = i;
    char32_t c = detail::next_codepoint(text, i);
    if (is_word_cp(c)) {
      word.append(text, start, i - start);
    } else if (!word.empty() && (is_apostrophe(c) ||
                                 ((c == U'.' || c == U',') &&
                                  is_ascii_digit(prev)))) {
      // Apostrophes join letters; '.'/',' join digits ("3.14", "54,005,604").
      std::size_t peek = i;
      char32_t nxt = peek < text.size() ? detail::next_codepoint(text, peek) : 0;
      bool joins = is_apostrophe(c) ? is_letter_cp(nxt) : is_ascii_digit(nxt);
      if (joins) {
        word.append(text, start, i - start);
      } else {
        flush_word();
        if (!is_space_cp(c)) tokens.push_back(make_token(text.substr(start, i - start)));
      }
    } else {
      flush_word();
      if (!is_space_cp(c)) tokens.push_back(make_token(text.substr(start, i - start)));
    }
    prev = c;
  }
  flush_word();
  return tokens;
}

std::vector<Sentence> segment(const std::string& text) {
  std::vector<Sentence> sentences;
  std::size_t sentence_start = 0;

  auto flush = [&](std::size_t end, Terminator term) {
    if (end <= sentence_start) return;
    Sentence s;
    s.tokens = tokenize(text.substr(sentence_start, end - sentence_start));
    s.terminator = term;
    if (!s.tokens.empty()) sentences.push_back(std::move(s));
    sentence_start = end;
  };

  std::size_t i = 0;
  std::size_t last_ws_end = 0;  // byte offset just past the last whitespace
  while (i < text.size()) {
    std::size_t cp_start = i;
    char32_t c = detail::next_codepoint(text, i);
    if (is_space_cp(c)) {
      last_ws_end = i;
      continue;
    }
    if (c != U'.' && c != U'!' && c != U'?') continue;

    if (c == U'.') {
      // Abbreviation check on the chunk since the last whitespace.
      std::string chunk = lower_copy(text.substr(last_ws_end, i - last_ws_end));
      if (is_abbreviation(chunk)) continue;
      // Decimal point.
      std::size_t peek = i;
      char32_t nxt = peek < text.size() ? detail::next_codepoint(text, peek) : 0;
      if (cp_start > 0 && is_ascii_digit(nxt)) continue;
    }

    Terminator term = c == U'.' ? Terminator::period
                      : c == U'?' ? Terminator::question
                                  : Terminator::exclamation;
    // Consume the run of terminators, then closing quotes/brackets.
    std::size_t j = i;
    while (j < text.size()) {
      std::size_t save = j;
      char32_t n = detail::next_codepoint(text, j);
      if (n != U'.' && n != U'!' && n != U'?') {
        j = save;
        break;
      }
    }
    while (j < text.size()) {
      std::size_t save = j;
      char32_t n = detail::next_codepoint(text, j);
      if (!is_closer(n)) {
        j = save;
        break;
      }
    }
    bool at_boundary = j >= text.size();
    if (!at_boundary) {
      std::size_t save = j;
      char32_t n = detail::next_codepoint(text, save);
      at_boundary = is_space_cp(n);
    }
    if (at_boundary) {
      flush(j, term);
      i = j;
    } else {
      i = j;
    }
  }

  if (sentence_start < text.size()) {
    // Trailing chunk without a detected boundary; recover the terminator from
    // its last terminator-class code point, if any.
    std::string rest = text.substr(sentence_start);
    Terminator term = Terminator::none;
    std::size_t k = 0;
    char32_t last_visible = 0;
    while (k < rest.size()) {
      char32_t c = detail::next_codepoint(rest, k);
      if (!is_space_cp(c) && !is_closer(c)) last_visible = c;
    }
    if (last_visible == U'.') term = Terminator::period;
    else if (last_visible == U'?') term = Terminator::question;
    else if (last_visible == U'!') term = Terminator::exclamation;
    flush(text.size(), term);
  }
  return sentences;
}

std::vector<Token> tag_pos(std::vector<Token> tokens, const Lexicon& lex) {
  for (Token& t : tokens) {
    if (!t.is_word()) {
      t.pos = Pos::punctuation;
      t.is_stopword = false;
      continue;
    }
    bool numeric = true;
    std::size_t i = 0;
    while (i < t.surface.size()) {
      char32_t c = detail::next_codepoint(t.surface, i);
      if (!is_ascii_digit(c) && c != U'.' && c != U',') {
        numeric = false;
        break;
      }
    }
    if (numeric) {
      t.pos = Pos::number;
      t.is_stopword = false;
      continue;
    }
    auto it = lex.pos_table.find(t.lower);
    if (it != lex.pos_table.end() && !it->second.empty()) {
      t.pos = it->second.front();
    } else if (ends_with(t.lower, "ly")) {
      t.pos = Pos::adverb;
    } else if (ends_with(t.lower, "ing") || ends_with(t.lower, "ed")) {
      t.pos = Pos::verb;
    } else if (ends_with(t.lower, "tion") || ends_with(t.lower, "ness")) {
      t.pos = Pos::noun;
    } else if (ends_with(t.lower, "ous") || ends_with(t.lower, "ful")) {
      t.pos = Pos::adjective;
    } else {
      t.pos = Pos::noun;
    }
    t.is_stopword = lex.stopwords.count(t.lower) > 0;
  }
  return tokens;
}

std::vector<Sentence> analyze(const std::string& text, const Lexicon& lex) {
  std::vector<Sentence> sentences = segment(text);
  for (Sentence& s : sentences) s.tokens = tag_pos(std::move(s.tokens), lex);
  return sentences;
}

int count_clauses(const Sentence& sentence, const Lexicon& lex) {
  (void)lex;
  int clauses = 1;
  int word_position = 0;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const Token& t = sentence.tokens[i];
    if (t.is_word()) {
      if (word_position > 0 && is_subordinator(t.lower)) ++clauses;
      ++word_position;
    } else if (t.surface == ",") {
      bool verb_before = false, verb_after = false;
      for (std::size_t j = 0; j < i && !verb_before; ++j)
        verb_before = is_verb_tag(sentence.tokens[j].pos);
      for (std::size_t j = i + 1; j < sentence.tokens.size() && !verb_after; ++j)
        verb_after = is_verb_tag(sentence.tokens[j].pos);
      if (verb_before && verb_after) ++clauses;
    }
  }
  return clauses;
}

std::size_t count_words(const std::string& text) {
  std::vector<Token> tokens = tokenize(text);
  std::size_t n = 0;
  for (const Token& t : tokens)
    if (t.is_word()) ++n;
  return n;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

// Applies `fn` to each non-comment, non-empty line of the file.
template <class Fn>
void for_each_line(const std::filesystem::path& path, Fn fn) {
  std::ifstream in(path);
  if (!in) throw DataError("lexicon file missing: " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    try {
      fn(split_fields(line));
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError(path.filename().string() + " line " +
                      std::to_string(line_no) + ": " + e.what());
    }
  }
}

void require_fields(const std::vector<std::string>& f, std::size_t n,
                    const char* what) {
  if (f.size() < n || f[0].empty())
    throw std::runtime_error(std::string("malformed ") + what + " entry");
}

}  // namespace

Lexicon load_lexicon(const std::filesystem::path& dir) {
  Lexicon lex;

  for_each_line(dir / "pos.tsv", [&](const std::vector<std::string>& f) {
    require_fields(f, 2, "pos");
    std::vector<Pos> tags;
    std::stringstream ss(f[1]);
    std::string tag;
    while (std::getline(ss, tag, ',')) tags.push_back(pos_from_string(tag));
    if (tags.empty()) throw std::runtime_error("empty tag list");
    lex.pos_table[lower_copy(f[0])] = std::move(tags);
  });

  for_each_line(dir / "stopwords.txt", [&](const std::vector<std::string>& f) {
    require_fields(f, 1, "stopword");
    lex.stopwords.insert(lower_copy(f[0]));
  });

  for_each_line(dir / "homonyms.txt", [&](const std::vector<std::string>& f) {
    require_fields(f, 1, "homonym");
    lex.homonyms.insert(lower_copy(f[0]));
  });

  for_each_line(dir / "synsets.tsv", [&](const std::vector<std::string>& f) {
    require_fields(f, 2, "synset");
    std::vector<int> ids;
    std::stringstream ss(f[1]);
    std::string id;
    while (std::getline(ss, id, ',')) ids.push_back(std::stoi(id));
    if (ids.empty()) throw std::runtime_error("empty synset list");
    lex.synsets[lower_copy(f[0])] = std::move(ids);
  });

  for_each_line(dir / "antonyms.tsv", [&](const std::vector<std::string>& f) {
    require_fields(f, 2, "antonym");
    std::string a = lower_copy(f[0]), b = lower_copy(f[1]);
    if (b.empty()) throw std::runtime_error("missing antonym counterpart");
    lex.antonym_pairs.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
  });

  for_each_line(dir / "sentiment.tsv", [&](const std::vector<std::string>& f) {
    require_fields(f, 3, "sentiment");
    SentimentEntry e;
    e.polarity = std::stod(f[1]);
    if (e.polarity < -1.0 || e.polarity > 1.0)
      throw std::runtime_error("polarity outside [-1, 1]");
    e.subjective = f[2] == "1" || f[2] == "true";
    lex.sentiment[lower_copy(f[0])] = e;
  });

  for_each_line(dir / "base_verbs.txt", [&](const std::vector<std::string>& f) {
    require_fields(f, 1, "base verb");
    lex.base_verbs.insert(lower_copy(f[0]));
  });

  for_each_line(dir / "past_participles.txt",
                [&](const std::vector<std::string>& f) {
                  require_fields(f, 1, "past participle");
                  lex.past_participles.insert(lower_copy(f[0]));
                });

  for_each_line(dir / "reporting_verbs.txt",
                [&](const std::vector<std::string>& f) {
                  require_fields(f, 1, "reporting verb");
                  lex.reporting_verbs.insert(lower_copy(f[0]));
                });

  return lex;
}

}  // namespace stylo
