#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stylo/corpus.hpp"
#include "stylo/lingua.hpp"

namespace stylo {

inline constexpr int kFeatureCount = 32;

struct LinguisticFeatures {
  double verb_ratio = 0;
  double noun_ratio = 0;
  double adjective_ratio = 0;
  double pronoun_ratio = 0;
  double adverb_ratio = 0;
  double preposition_ratio = 0;
  double conjunction_ratio = 0;
  double interjection_ratio = 0;
};

struct StructuralFeatures {
  double average_sentence_length = 0;  // words per sentence
  double lowercase_letter_ratio = 0;
  double capital_letter_ratio = 0;
  double lexical_diversity = 0;
  double sentence_complexity = 0;  // clauses per sentence
  double burstiness = 0;           // variance/mean of word-type counts
  double sentence_count = 0;
  double word_count = 0;
  double stopword_ratio = 0;
  double complex_ratio = 0;  // sentences with >= 2 clauses
};

struct SemanticFeatures {
  double sentiment_polarity = 0;  // [-1, 1]
  double subjectivity = 0;        // [0, 1]
  double homonym_frequency = 0;
  double simile_frequency = 0;  // per sentence
  double synonym_frequency = 0;
  double antonym_frequency = 0;
};

struct InteractionFeatures {
  double active_passive_ratio = 0;          // (active+1)/(passive+1)
  double direct_indirect_speech_ratio = 0;  // (direct+1)/(indirect+1)
  double conditional_sentence_ratio = 0;
  double negation_ratio = 0;
  double question_ratio = 0;
  double exclamatory_sentence_ratio = 0;
  double imperative_mood_ratio = 0;
  double subjunctive_mood_ratio = 0;
};

/// The 32 stylometric features of one paragraph, in the frozen column order
/// given by feature_names().
struct FeatureVector {
  LinguisticFeatures linguistic;
  StructuralFeatures structural;
  SemanticFeatures semantic;
  InteractionFeatures interaction;

  std::array<double, kFeatureCount> to_array() const;
};

/// Frozen, versioned feature column order.
const std::vector<std::string>& feature_names();

/// Rows of features (or embeddings) aligned with labels and record ids.
struct FeatureMatrix {
  Eigen::MatrixXd values;            // n x d
  std::vector<std::string> columns;  // d names, fixed order
  std::vector<Label> labels;         // n
  std::vector<std::string> ids;      // n

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  /// Labels as 0/1 doubles (human = 0, chatbot = 1).
  Eigen::VectorXd labels01() const;
};

LinguisticFeatures extract_linguistic(const ParagraphRecord& p, const Lexicon& lex);
StructuralFeatures extract_structural(const ParagraphRecord& p, const Lexicon& lex);
SemanticFeatures extract_semantic(const ParagraphRecord& p, const Lexicon& lex);
InteractionFeatures extract_interaction(const ParagraphRecord& p, const Lexicon& lex);
FeatureVector extract_all(const ParagraphRecord& p, const Lexicon& lex);

/// One FeatureVector row per record, rows aligned to corpus order.
FeatureMatrix feature_matrix(const Corpus& corpus, const Lexicon& lex);

/// Pearson correlations; symmetric with unit diagonal. Columns with zero
/// variance correlate 0 with everything else by convention.
Eigen::MatrixXd correlation_matrix(const FeatureMatrix& m);

/// CSV round-trip: header = column names + "label" + "id"; 6-decimal floats.
void save_matrix_csv(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix load_matrix_csv(const std::filesystem::path& path);

void save_correlation_csv(const Eigen::MatrixXd& corr,
                          const std::vector<std::string>& names,
                          const std::filesystem::path& path);

}  // namespace stylo
