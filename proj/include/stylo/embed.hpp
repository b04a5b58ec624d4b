#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "stylo/corpus.hpp"
#include "stylo/features.hpp"
#include "stylo/lingua.hpp"

namespace stylo {

using TokenDoc = std::vector<std::string>;  // lowercased word tokens

/// Lowercased word tokens of a paragraph, the document unit for embeddings.
TokenDoc embedding_tokens(const std::string& text);
std::vector<TokenDoc> corpus_token_docs(const Corpus& corpus);

struct Vocabulary {
  std::vector<std::string> words;              // index -> word
  std::unordered_map<std::string, int> index;  // word -> index
  std::vector<std::int64_t> doc_freq;          // documents containing word
  std::int64_t total_docs = 0;

  int size() const { return static_cast<int>(words.size()); }
};

/// Vocabulary ranked by document frequency (ties alphabetical), truncated to
/// the top `max_vocab` words.
Vocabulary tfidf_fit(const std::vector<TokenDoc>& docs, int max_vocab = 5000);

/// Sparse TFIDF row: entry(t) = (count(t)/doc length) * ln(N/n_t). Words
/// outside the fitted vocabulary are dropped; the TF denominator is the full
/// document length. An empty document yields an empty (all-zero) row.
std::vector<std::pair<int, double>> tfidf_transform(const Vocabulary& vocab,
                                                    const TokenDoc& doc);

/// Dense TFIDF design matrix with one column per vocabulary word.
FeatureMatrix tfidf_matrix(const Vocabulary& vocab,
                           const std::vector<TokenDoc>& docs,
                           const std::vector<Label>& labels,
                           const std::vector<std::string>& ids);

struct VectorTable {
  int dim = 0;
  std::vector<std::string> words;
  std::unordered_map<std::string, int> index;
  Eigen::MatrixXd vectors;  // |V| x dim

  const Eigen::MatrixXd& matrix() const { return vectors; }
  bool contains(const std::string& word) const { return index.count(word) > 0; }
};

struct CbowConfig {
  int dim = 100;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double learning_rate = 0.05;
  int min_count = 2;
  std::uint64_t seed = 0;
};

/// CBOW with negative sampling over averaged context vectors; the table
/// holds the trained input vectors. Deterministic given the seed; zero
/// epochs returns the seeded random initialization.
VectorTable train_cbow(const std::vector<TokenDoc>& docs, const CbowConfig& cfg,
                       std::vector<double>* epoch_loss = nullptr);

struct CooccurrenceMatrix {
  std::vector<std::string> words;
  std::unordered_map<std::string, int> index;
  struct Entry {
    int row;
    int col;
    double count;
  };
  std::vector<Entry> entries;  // sorted by (row, col)
  int window = 10;
  bool symmetric = true;
};

/// Distance-weighted co-occurrence counts: a pair at distance k contributes
/// 1/k to both (i,j) and (j,i).
CooccurrenceMatrix build_cooccurrence(const std::vector<TokenDoc>& docs,
                                      int window = 10, int min_count = 2);

struct GloveConfig {
  int dim = 100;
  double x_max = 100.0;
  double alpha = 0.75;
  int epochs = 25;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

/// Weight applied to each co-occurrence cell: min(1, (x/x_max)^alpha).
double glove_weight(double x, double x_max, double alpha);

/// AdaGrad weighted least squares on log co-occurrence counts; final vectors
/// are the sum of word and context vectors.
VectorTable train_glove(const CooccurrenceMatrix& matrix, const GloveConfig& cfg,
                        std::vector<double>* epoch_loss = nullptr);

/// GloVe-style text format: word then `dim` floats per line. The writer emits
/// round-trip-exact floats; duplicate words on load keep the last entry and
/// emit a warning on stderr.
VectorTable load_vectors(const std::filesystem::path& path);
void save_vectors(const VectorTable& table, const std::filesystem::path& path);

/// Mean of the vectors of in-vocabulary tokens; all-OOV or empty documents
/// map to the zero vector.
Eigen::VectorXd doc_embed(const TokenDoc& tokens, const VectorTable& table);

/// One averaged embedding row per record, columns e0..e(dim-1).
FeatureMatrix embed_matrix(const Corpus& corpus, const VectorTable& table);

}  // namespace stylo
