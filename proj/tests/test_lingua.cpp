#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "stylo/error.hpp"
#include "stylo/lingua.hpp"
#include "test_util.hpp"

using namespace stylo;

namespace {

std::vector<std::string> surfaces(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const Token& t : tokens) out.push_back(t.surface);
  return out;
}

}  // namespace

TEST_CASE("tokenize basics") {
  auto tokens = tokenize("The cat sat.");
  CHECK(surfaces(tokens) == std::vector<std::string>{"The", "cat", "sat", "."});
  CHECK(tokens[0].lower == "the");
  CHECK(tokens[3].is_alpha == false);
  CHECK(tokens[3].is_word() == false);

  CHECK(surfaces(tokenize("don't")) == std::vector<std::string>{"do", "n't"});
  CHECK(surfaces(tokenize("can't stop")) ==
        std::vector<std::string>{"ca", "n't", "stop"});
  CHECK(surfaces(tokenize("it's")) == std::vector<std::string>{"it's"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \t\n ").empty());
  CHECK(surfaces(tokenize("3.14 and 54,005,604")) ==
        std::vector<std::string>{"3.14", "and", "54,005,604"});
}

TEST_CASE("tokenize golden paragraph") {
  const std::string text =
      "The quick brown fox jumps over the lazy dog. It doesn't stop, and we "
      "can't see why. After 2 days, the fox ran away to the deep forest. "
      "Wow! Isn't that a great story?";
  const std::vector<std::string> golden = {
      "The",  "quick", "brown", "fox", "jumps", "over",   "the", "lazy",
      "dog",  ".",     "It",    "does", "n't",  "stop",   ",",   "and",
      "we",   "ca",    "n't",   "see", "why",   ".",      "After", "2",
      "days", ",",     "the",   "fox", "ran",   "away",   "to",  "the",
      "deep", "forest", ".",    "Wow", "!",     "Is",     "n't", "that",
      "a",    "great", "story", "?"};
  CHECK(surfaces(tokenize(text)) == golden);
}

TEST_CASE("tokenize retokenization property") {
  // Joining word surfaces with single spaces and re-tokenizing is stable for
  // alphanumeric-only text.
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::string text;
    int words = 1 + static_cast<int>(rng.below(20));
    for (int w = 0; w < words; ++w) {
      if (w) text += ' ';
      int len = 1 + static_cast<int>(rng.below(8));
      for (int c = 0; c < len; ++c)
        text += static_cast<char>('a' + rng.below(26));
    }
    auto once = surfaces(tokenize(text));
    std::string joined;
    for (std::size_t i = 0; i < once.size(); ++i) {
      if (i) joined += ' ';
      joined += once[i];
    }
    CHECK(surfaces(tokenize(joined)) == once);
  }
}

TEST_CASE("segment basics") {
  auto sents = segment("Hi! How are you? Fine.");
  REQUIRE(sents.size() == 3);
  CHECK(sents[0].terminator == Terminator::exclamation);
  CHECK(sents[1].terminator == Terminator::question);
  CHECK(sents[2].terminator == Terminator::period);

  auto dr = segment("See Dr. Smith.");
  REQUIRE(dr.size() == 1);
  CHECK(dr[0].terminator == Terminator::period);

  CHECK(segment("No terminator here").size() == 1);
  CHECK(segment("No terminator here")[0].terminator == Terminator::none);
  CHECK(segment("").empty());
}

TEST_CASE("segment golden fixture") {
  const std::string text =
      "Dr. Smith arrived early. We saw him, e.g. near the lab. \"Stop!\" he "
      "shouted. Did you hear that? I think so. Prof. Jones left at 3.14 "
      "today. He wrote a note saying nothing. Amazing! The end.";
  auto sents = segment(text);
  std::vector<std::string> firsts;
  for (const auto& s : sents) firsts.push_back(s.tokens.front().surface);
  const std::vector<std::string> golden_firsts = {
      "Dr",  "We", "\"", "he", "Did", "I", "Prof", "He", "Amazing", "The"};
  CHECK(firsts == golden_firsts);
  REQUIRE(sents.size() == 10);
  CHECK(sents[2].terminator == Terminator::exclamation);
  CHECK(sents[4].terminator == Terminator::question);
  CHECK(sents[8].terminator == Terminator::exclamation);
}

TEST_CASE("segment partitions the token stream") {
  const std::string texts[] = {
      "Hi! How are you? Fine.",
      "See Dr. Smith. He said \"go away!\" twice. Then we left.",
      "One sentence only",
      "Numbers like 3.14 stay. New sentence here."};
  for (const std::string& text : texts) {
    auto all = tokenize(text);
    auto sents = segment(text);
    std::size_t total = 0;
    for (const auto& s : sents) {
      CHECK(!s.tokens.empty());
      total += s.tokens.size();
    }
    CHECK(total == all.size());
  }
}

TEST_CASE("tag_pos lexicon and suffix rules") {
  const Lexicon& lex = test::lexicon();
  auto tagged = tag_pos(tokenize("The cat sat"), lex);
  CHECK(tagged[0].pos == Pos::determiner);
  CHECK(tagged[1].pos == Pos::noun);
  CHECK(tagged[2].pos == Pos::verb);
  CHECK(tagged[0].is_stopword);
  CHECK(!tagged[1].is_stopword);

  auto unknown = tag_pos(tokenize("blorply zorb gronking flumed vastion "
                                  "blorpness damprous zorbful"),
                         lex);
  CHECK(unknown[0].pos == Pos::adverb);      // -ly
  CHECK(unknown[1].pos == Pos::noun);        // fallback
  CHECK(unknown[2].pos == Pos::verb);        // -ing
  CHECK(unknown[3].pos == Pos::verb);        // -ed
  CHECK(unknown[4].pos == Pos::noun);        // -tion
  CHECK(unknown[5].pos == Pos::noun);        // -ness
  CHECK(unknown[6].pos == Pos::adjective);   // -ous
  CHECK(unknown[7].pos == Pos::adjective);   // -ful

  auto punct = tag_pos(tokenize("hello, world! 42"), lex);
  CHECK(punct[1].pos == Pos::punctuation);
  CHECK(punct[4].pos == Pos::number);

  // Totality: every token gets exactly one tag.
  for (const Token& t : tag_pos(tokenize("Some mixed, text with 3 numbers!"), lex))
    CHECK(t.pos != Pos::other);
}

TEST_CASE("count_clauses") {
  const Lexicon& lex = test::lexicon();
  auto clause_count = [&](const std::string& text) {
    auto sents = analyze(text, lex);
    REQUIRE(sents.size() == 1);
    return count_clauses(sents[0], lex);
  };
  CHECK(clause_count("The cat sat.") == 1);
  CHECK(clause_count("I left because it rained.") == 2);

  const std::vector<std::string> fixture = {
      "The cat sat.",
      "I left because it rained.",
      "The book that he wrote is good.",
      "I left because it rained although he stayed.",
      "Wow!"};
  const std::vector<int> golden = {1, 2, 2, 3, 1};
  for (std::size_t i = 0; i < fixture.size(); ++i)
    CHECK(clause_count(fixture[i]) == golden[i]);

  // Subordinator at position 0 does not count.
  CHECK(clause_count("That cat sat.") == 1);
  // Comma joining two finite verbs adds one.
  CHECK(clause_count("He walked, she jumped.") == 2);

  // Never below 1.
  for (const auto& s : analyze("Yes. No! Why?", lex))
    CHECK(count_clauses(s, lex) >= 1);
}

TEST_CASE("load_lexicon bundled tables") {
  const Lexicon& lex = test::lexicon();
  CHECK(lex.pos_table.size() > 400);
  CHECK(lex.stopwords.size() > 100);
  CHECK(lex.homonyms.size() > 50);
  CHECK(lex.synsets.size() > 100);
  CHECK(lex.antonym_pairs.size() > 50);
  CHECK(lex.sentiment.size() > 100);
  CHECK(lex.base_verbs.size() > 100);
  CHECK(lex.past_participles.size() > 50);
  CHECK(lex.reporting_verbs.size() > 20);

  CHECK(lex.share_synset("big", "large"));
  CHECK(!lex.share_synset("big", "small"));
  CHECK(lex.are_antonyms("hot", "cold"));
  CHECK(lex.are_antonyms("cold", "hot"));
  CHECK(!lex.are_antonyms("hot", "hot"));
  CHECK(lex.sentiment.at("good").polarity > 0);
  CHECK(lex.sentiment.at("awful").polarity < 0);
}

TEST_CASE("load_lexicon missing file error") {
  auto dir = test::temp_dir("lexicon_missing");
  // Provide every file except sentiment.tsv.
  for (const char* name :
       {"pos.tsv", "stopwords.txt", "homonyms.txt", "synsets.tsv",
        "antonyms.tsv", "base_verbs.txt", "past_participles.txt",
        "reporting_verbs.txt"}) {
    std::ofstream out(dir / name);
    out << "# empty\n";
  }
  CHECK_THROWS_WITH_AS(load_lexicon(dir),
                       doctest::Contains("sentiment.tsv"), DataError);
}

TEST_CASE("load_lexicon custom fixture matches contents") {
  auto dir = test::temp_dir("lexicon_custom");
  std::ofstream(dir / "pos.tsv") << "alpha\tnoun\nbeta\tverb,noun\n";
  std::ofstream(dir / "stopwords.txt") << "alpha\n";
  std::ofstream(dir / "homonyms.txt") << "beta\n";
  std::ofstream(dir / "synsets.tsv") << "alpha\t1\ngamma\t1,2\n";
  std::ofstream(dir / "antonyms.tsv") << "alpha\tbeta\n";
  std::ofstream(dir / "sentiment.tsv") << "alpha\t0.5\t1\nbeta\t-0.25\t0\n";
  std::ofstream(dir / "base_verbs.txt") << "beta\n";
  std::ofstream(dir / "past_participles.txt") << "gamma\n";
  std::ofstream(dir / "reporting_verbs.txt") << "delta\n";

  Lexicon lex = load_lexicon(dir);
  CHECK(lex.pos_table.size() == 2);
  CHECK(lex.pos_table.at("beta") == std::vector<Pos>{Pos::verb, Pos::noun});
  CHECK(lex.stopwords == std::unordered_set<std::string>{"alpha"});
  CHECK(lex.homonyms == std::unordered_set<std::string>{"beta"});
  CHECK(lex.synsets.at("gamma") == std::vector<int>{1, 2});
  CHECK(lex.are_antonyms("beta", "alpha"));
  CHECK(lex.sentiment.at("alpha").polarity == doctest::Approx(0.5));
  CHECK(lex.sentiment.at("alpha").subjective);
  CHECK(!lex.sentiment.at("beta").subjective);
  CHECK(lex.base_verbs.count("beta") == 1);
  CHECK(lex.past_participles.count("gamma") == 1);
  CHECK(lex.reporting_verbs.count("delta") == 1);

  // Malformed line reports file and line number.
  std::ofstream(dir / "sentiment.tsv") << "alpha\t2.5\t1\n";
  CHECK_THROWS_WITH_AS(load_lexicon(dir), doctest::Contains("sentiment.tsv"),
                       DataError);
}
