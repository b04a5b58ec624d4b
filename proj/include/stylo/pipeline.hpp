#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stylo/features.hpp"
#include "stylo/learn.hpp"

namespace stylo {

/// One model cell in the experiment grid: a kind name plus optional
/// hyperparameter overrides applied on top of the kind defaults.
struct ModelEntry {
  std::string kind = "logreg";  // logreg|linear_svm|random_forest|gbt|mlp|dnn
  std::optional<double> learning_rate;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<int> trees;
  std::optional<int> max_depth;
  std::optional<double> shrinkage;
  std::optional<double> svm_lambda;
  std::optional<std::vector<int>> hidden;

  ModelSpec to_spec(std::uint64_t seed) const;
};

/// Single source of truth for a reproducible experiment run; serialized
/// verbatim into the output directory.
struct ExperimentConfig {
  std::string corpus_path;
  std::string corpus_format = "jsonl";
  std::string lexicon_dir = "data/lexicon";

  double train_fraction = 0.8;
  bool stratified = true;
  bool similar_length_only = false;
  int similar_length_threshold = 15;

  std::string track = "features";  // features | embedding
  std::vector<std::string> selections = {"none"};  // none|pca|lda|rf|lasso
  std::vector<ModelEntry> models = {{}};

  // Embedding-track settings.
  std::string embedding = "tfidf";  // tfidf|cbow|glove|loaded
  std::string vectors_path;
  int embedding_dim = 100;
  int embedding_window = 5;
  int embedding_negatives = 5;
  int embedding_epochs = 10;
  double embedding_learning_rate = 0.05;
  int embedding_min_count = 2;
  double glove_x_max = 100.0;
  double glove_alpha = 0.75;
  int glove_window = 10;
  int tfidf_max_vocab = 5000;

  double pca_variance_target = 0.95;
  int rf_importance_trials = 5;
  int rf_importance_top_k = 15;
  std::optional<int> lasso_target_nonzero;

  // Ablation settings (consumed by the ablate command when given a config).
  std::vector<std::string> ablation_features;  // empty = every column
  std::vector<double> ablation_deltas = {0.10, -0.10};
  std::string ablation_target = "chatbot";

  std::string output_dir = "out";
  std::uint64_t seed = 42;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Hash of the canonical JSON form; identical configs hash identically.
  std::string hash() const;
};

struct PipelineCell {
  std::string selection;
  std::string model;
  double accuracy = 0.0;
  int n_test = 0;
  std::uint64_t cell_seed = 0;
};

struct PipelineResult {
  std::vector<PipelineCell> cells;
  std::filesystem::path accuracy_csv;
  std::filesystem::path manifest_path;
};

/// Runs split -> (track matrix) -> selection -> train -> eval over the whole
/// selection x model grid and writes accuracy.csv, the echoed config, and a
/// manifest into the output directory. Reruns with an identical config are
/// byte-identical except for manifest timestamps.
PipelineResult run_pipeline(const ExperimentConfig& config);

/// Keeps only the named columns, in the order given.
FeatureMatrix select_columns(const FeatureMatrix& m,
                             const std::vector<std::string>& names);

/// Writes a manifest JSON describing one command invocation.
void write_manifest(const std::filesystem::path& path,
                    const std::string& command,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    const std::string& config_json, std::uint64_t seed,
                    double wall_time_ms);

}  // namespace stylo
