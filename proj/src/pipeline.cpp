#include "stylo/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stylo/ablate.hpp"
#include "stylo/corpus.hpp"
#include "stylo/embed.hpp"
#include "stylo/error.hpp"
#include "stylo/rng.hpp"
#include "stylo/select.hpp"
#include "stylo/version.hpp"

namespace stylo {

using nlohmann::json;

ModelSpec ModelEntry::to_spec(std::uint64_t seed) const {
  ModelSpec spec = ModelSpec::defaults(kind, seed);
  if (learning_rate) spec.learning_rate = *learning_rate;
  if (epochs) spec.epochs = *epochs;
  if (batch_size) spec.batch_size = *batch_size;
  if (trees) spec.trees = *trees;
  if (max_depth) spec.max_depth = *max_depth;
  if (shrinkage) spec.shrinkage = *shrinkage;
  if (svm_lambda) spec.svm_lambda = *svm_lambda;
  if (hidden) spec.hidden = *hidden;
  return spec;
}

namespace {

json model_entry_to_json(const ModelEntry& e) {
  json j{{"kind", e.kind}};
  if (e.learning_rate) j["learning_rate"] = *e.learning_rate;
  if (e.epochs) j["epochs"] = *e.epochs;
  if (e.batch_size) j["batch_size"] = *e.batch_size;
  if (e.trees) j["trees"] = *e.trees;
  if (e.max_depth) j["max_depth"] = *e.max_depth;
  if (e.shrinkage) j["shrinkage"] = *e.shrinkage;
  if (e.svm_lambda) j["svm_lambda"] = *e.svm_lambda;
  if (e.hidden) j["hidden"] = *e.hidden;
  return j;
}

ModelEntry model_entry_from_json(const json& j) {
  ModelEntry e;
  if (j.is_string()) {
    e.kind = j.get<std::string>();
    return e;
  }
  e.kind = j.at("kind").get<std::string>();
  if (j.contains("learning_rate")) e.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("epochs")) e.epochs = j["epochs"].get<int>();
  if (j.contains("batch_size")) e.batch_size = j["batch_size"].get<int>();
  if (j.contains("trees")) e.trees = j["trees"].get<int>();
  if (j.contains("max_depth")) e.max_depth = j["max_depth"].get<int>();
  if (j.contains("shrinkage")) e.shrinkage = j["shrinkage"].get<double>();
  if (j.contains("svm_lambda")) e.svm_lambda = j["svm_lambda"].get<double>();
  if (j.contains("hidden")) e.hidden = j["hidden"].get<std::vector<int>>();
  return e;
}

json config_to_json_value(const ExperimentConfig& c) {
  json models = json::array();
  for (const ModelEntry& e : c.models) models.push_back(model_entry_to_json(e));
  json j{{"corpus_path", c.corpus_path},
         {"corpus_format", c.corpus_format},
         {"lexicon_dir", c.lexicon_dir},
         {"train_fraction", c.train_fraction},
         {"stratified", c.stratified},
         {"similar_length_only", c.similar_length_only},
         {"similar_length_threshold", c.similar_length_threshold},
         {"track", c.track},
         {"selections", c.selections},
         {"models", models},
         {"embedding", c.embedding},
         {"vectors_path", c.vectors_path},
         {"embedding_dim", c.embedding_dim},
         {"embedding_window", c.embedding_window},
         {"embedding_negatives", c.embedding_negatives},
         {"embedding_epochs", c.embedding_epochs},
         {"embedding_learning_rate", c.embedding_learning_rate},
         {"embedding_min_count", c.embedding_min_count},
         {"glove_x_max", c.glove_x_max},
         {"glove_alpha", c.glove_alpha},
         {"glove_window", c.glove_window},
         {"tfidf_max_vocab", c.tfidf_max_vocab},
         {"pca_variance_target", c.pca_variance_target},
         {"rf_importance_trials", c.rf_importance_trials},
         {"rf_importance_top_k", c.rf_importance_top_k},
         {"ablation_features", c.ablation_features},
         {"ablation_deltas", c.ablation_deltas},
         {"ablation_target", c.ablation_target},
         {"output_dir", c.output_dir},
         {"seed", c.seed}};
  if (c.lasso_target_nonzero) j["lasso_target_nonzero"] = *c.lasso_target_nonzero;
  return j;
}

}  // namespace

std::string ExperimentConfig::to_json() const {
  return config_to_json_value(*this).dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad config JSON: ") + e.what());
  }
  try {
    ExperimentConfig c;
    c.corpus_path = j.value("corpus_path", c.corpus_path);
    c.corpus_format = j.value("corpus_format", c.corpus_format);
    c.lexicon_dir = j.value("lexicon_dir", c.lexicon_dir);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.stratified = j.value("stratified", c.stratified);
    c.similar_length_only = j.value("similar_length_only", c.similar_length_only);
    c.similar_length_threshold =
        j.value("similar_length_threshold", c.similar_length_threshold);
    c.track = j.value("track", c.track);
    c.selections = j.value("selections", c.selections);
    if (j.contains("models")) {
      c.models.clear();
      for (const json& m : j["models"]) c.models.push_back(model_entry_from_json(m));
    }
    c.embedding = j.value("embedding", c.embedding);
    c.vectors_path = j.value("vectors_path", c.vectors_path);
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    c.embedding_window = j.value("embedding_window", c.embedding_window);
    c.embedding_negatives = j.value("embedding_negatives", c.embedding_negatives);
    c.embedding_epochs = j.value("embedding_epochs", c.embedding_epochs);
    c.embedding_learning_rate =
        j.value("embedding_learning_rate", c.embedding_learning_rate);
    c.embedding_min_count = j.value("embedding_min_count", c.embedding_min_count);
    c.glove_x_max = j.value("glove_x_max", c.glove_x_max);
    c.glove_alpha = j.value("glove_alpha", c.glove_alpha);
    c.glove_window = j.value("glove_window", c.glove_window);
    c.tfidf_max_vocab = j.value("tfidf_max_vocab", c.tfidf_max_vocab);
    c.pca_variance_target = j.value("pca_variance_target", c.pca_variance_target);
    c.rf_importance_trials = j.value("rf_importance_trials", c.rf_importance_trials);
    c.rf_importance_top_k = j.value("rf_importance_top_k", c.rf_importance_top_k);
    c.ablation_features = j.value("ablation_features", c.ablation_features);
    c.ablation_deltas = j.value("ablation_deltas", c.ablation_deltas);
    c.ablation_target = j.value("ablation_target", c.ablation_target);
    if (j.contains("lasso_target_nonzero"))
      c.lasso_target_nonzero = j["lasso_target_nonzero"].get<int>();
    c.output_dir = j.value("output_dir", c.output_dir);
    c.seed = j.value("seed", c.seed);
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad config JSON: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

std::string ExperimentConfig::hash() const {
  // FNV-1a over the canonical (sorted-key) JSON dump.
  std::string dump = config_to_json_value(*this).dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FeatureMatrix select_columns(const FeatureMatrix& m,
                             const std::vector<std::string>& names) {
  FeatureMatrix out;
  out.columns = names;
  out.labels = m.labels;
  out.ids = m.ids;
  out.values.resize(m.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto it = std::find(m.columns.begin(), m.columns.end(), names[j]);
    if (it == m.columns.end()) throw DataError("unknown column: " + names[j]);
    out.values.col(static_cast<Eigen::Index>(j)) =
        m.values.col(it - m.columns.begin());
  }
  return out;
}

void write_manifest(const std::filesystem::path& path,
                    const std::string& command,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    const std::string& config_json, std::uint64_t seed,
                    double wall_time_ms) {
  json j{{"schema_version", kManifestSchemaVersion},
         {"tool_version", kToolVersion},
         {"command", command},
         {"inputs", inputs},
         {"outputs", outputs},
         {"seed", seed},
         {"wall_time_ms", wall_time_ms},
         {"created_unix_ms",
          std::chrono::duration_cast<std::chrono::milliseconds>(
              std::chrono::system_clock::now().time_since_epoch())
              .count()}};
  if (!config_json.empty()) {
    j["config"] = json::parse(config_json);
    std::string dump = json::parse(config_json).dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : dump) {
      h ^= ch;
      h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    j["config_hash"] = buf;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path.string());
  out << j.dump(2) << '\n';
}

namespace {

struct TrackMatrices {
  FeatureMatrix train;
  FeatureMatrix test;
};

TrackMatrices build_track(const ExperimentConfig& cfg, const Corpus& train_c,
                          const Corpus& test_c) {
  if (cfg.track == "features") {
    Lexicon lex = load_lexicon(cfg.lexicon_dir);
    return {feature_matrix(train_c, lex), feature_matrix(test_c, lex)};
  }
  if (cfg.track != "embedding")
    throw DataError("unknown track: " + cfg.track + " (expected features|embedding)");

  std::vector<TokenDoc> train_docs = corpus_token_docs(train_c);
  auto labels_of = [](const Corpus& c) {
    std::vector<Label> labels;
    for (const auto& r : c.records) labels.push_back(r.label);
    return labels;
  };
  auto ids_of = [](const Corpus& c) {
    std::vector<std::string> ids;
    for (const auto& r : c.records) ids.push_back(r.id);
    return ids;
  };

  if (cfg.embedding == "tfidf") {
    Vocabulary vocab = tfidf_fit(train_docs, cfg.tfidf_max_vocab);
    return {tfidf_matrix(vocab, train_docs, labels_of(train_c), ids_of(train_c)),
            tfidf_matrix(vocab, corpus_token_docs(test_c), labels_of(test_c),
                         ids_of(test_c))};
  }

  VectorTable table;
  if (cfg.embedding == "cbow") {
    CbowConfig cc;
    cc.dim = cfg.embedding_dim;
    cc.window = cfg.embedding_window;
    cc.negatives = cfg.embedding_negatives;
    cc.epochs = cfg.embedding_epochs;
    cc.learning_rate = cfg.embedding_learning_rate;
    cc.min_count = cfg.embedding_min_count;
    cc.seed = Rng::derive(cfg.seed, 101);
    table = train_cbow(train_docs, cc);
  } else if (cfg.embedding == "glove") {
    CooccurrenceMatrix cooc =
        build_cooccurrence(train_docs, cfg.glove_window, cfg.embedding_min_count);
    GloveConfig gc;
    gc.dim = cfg.embedding_dim;
    gc.x_max = cfg.glove_x_max;
    gc.alpha = cfg.glove_alpha;
    gc.epochs = cfg.embedding_epochs;
    gc.learning_rate = cfg.embedding_learning_rate;
    gc.seed = Rng::derive(cfg.seed, 102);
    table = train_glove(cooc, gc);
  } else if (cfg.embedding == "loaded") {
    if (cfg.vectors_path.empty())
      throw DataError("embedding=loaded requires vectors_path");
    table = load_vectors(cfg.vectors_path);
  } else {
    throw DataError("unknown embedding: " + cfg.embedding);
  }
  return {embed_matrix(train_c, table), embed_matrix(test_c, table)};
}

struct SelectedMatrices {
  FeatureMatrix train;
  FeatureMatrix test;
};

SelectedMatrices apply_selection(const ExperimentConfig& cfg,
                                 const std::string& method,
                                 const FeatureMatrix& train_m,
                                 const FeatureMatrix& test_m,
                                 std::uint64_t cell_seed) {
  if (method == "none") return {train_m, test_m};
  if (method == "pca") {
    Projection proj = pca_fit(train_m, cfg.pca_variance_target);
    return {pca_transform(proj, train_m), pca_transform(proj, test_m)};
  }
  if (method == "lda") {
    Projection proj = lda_fit(train_m);
    return {lda_transform(proj, train_m), lda_transform(proj, test_m)};
  }
  if (method == "rf") {
    // Importance needs rows the ranking model never saw: carve a held-out
    // fifth from the training split.
    Rng rng(Rng::derive(cell_seed, 104));
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(train_m.rows()));
    for (Eigen::Index i = 0; i < train_m.rows(); ++i)
      idx[static_cast<std::size_t>(i)] = i;
    rng.shuffle(idx);
    Eigen::Index n_fit = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::llround(0.8 * double(train_m.rows()))));
    n_fit = std::min(n_fit, train_m.rows() - 1);

    FeatureMatrix fit_part, val_part;
    fit_part.columns = val_part.columns = train_m.columns;
    fit_part.values.resize(n_fit, train_m.cols());
    val_part.values.resize(train_m.rows() - n_fit, train_m.cols());
    for (Eigen::Index i = 0; i < train_m.rows(); ++i) {
      Eigen::Index src = idx[static_cast<std::size_t>(i)];
      FeatureMatrix& dst = i < n_fit ? fit_part : val_part;
      Eigen::Index row = i < n_fit ? i : i - n_fit;
      dst.values.row(row) = train_m.values.row(src);
      dst.labels.push_back(train_m.labels[static_cast<std::size_t>(src)]);
      dst.ids.push_back(train_m.ids[static_cast<std::size_t>(src)]);
    }
    ModelSpec ranker = ModelSpec::defaults("random_forest", Rng::derive(cell_seed, 105));
    TrainedModel model = train(ranker, fit_part);
    SelectionReport report =
        permutation_importance(model, val_part, cfg.rf_importance_trials,
                               Rng::derive(cell_seed, 106),
                               cfg.rf_importance_top_k);
    return {select_columns(train_m, report.kept),
            select_columns(test_m, report.kept)};
  }
  if (method == "lasso") {
    SelectionReport report = lasso_select(train_m, cfg.lasso_target_nonzero,
                                          Rng::derive(cell_seed, 107));
    if (report.kept.empty())
      throw DataError("lasso selection kept no features");
    return {select_columns(train_m, report.kept),
            select_columns(test_m, report.kept)};
  }
  throw DataError("unknown selection method: " + method);
}

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  if (cfg.corpus_path.empty()) throw DataError("config is missing corpus_path");

  Corpus corpus =
      load_corpus(cfg.corpus_path, corpus_format_from_string(cfg.corpus_format));
  if (cfg.similar_length_only)
    corpus = similar_length_subset(corpus, cfg.similar_length_threshold);

  SplitSpec split_spec{cfg.train_fraction, Rng::derive(cfg.seed, 103),
                       cfg.stratified};
  auto [train_c, test_c] = split(corpus, split_spec);
  TrackMatrices track = build_track(cfg, train_c, test_c);

  std::filesystem::create_directories(cfg.output_dir);
  std::filesystem::path out_dir(cfg.output_dir);

  PipelineResult result;
  std::size_t cell_index = 0;
  for (const std::string& selection : cfg.selections) {
    std::uint64_t selection_seed = Rng::derive(cfg.seed, 1000 + cell_index);
    SelectedMatrices selected =
        apply_selection(cfg, selection, track.train, track.test, selection_seed);
    for (const ModelEntry& entry : cfg.models) {
      std::uint64_t cell_seed = Rng::derive(cfg.seed, cell_index);
      ModelSpec spec = entry.to_spec(cell_seed);
      TrainedModel model = train(spec, selected.train);
      EvalReport report = evaluate(model, selected.test);
      result.cells.push_back({selection, entry.kind, report.accuracy,
                              report.n, cell_seed});
      ++cell_index;
    }
  }

  // accuracy.csv: the grid as plot data.
  result.accuracy_csv = out_dir / "accuracy.csv";
  {
    std::ofstream out(result.accuracy_csv);
    if (!out) throw DataError("cannot write " + result.accuracy_csv.string());
    out << "selection,model,accuracy,n_test\n";
    char buf[64];
    for (const PipelineCell& cell : result.cells) {
      std::snprintf(buf, sizeof(buf), "%.6f", cell.accuracy);
      out << cell.selection << ',' << cell.model << ',' << buf << ','
          << cell.n_test << '\n';
    }
  }

  // Echo the effective config verbatim.
  {
    std::ofstream out(out_dir / "config.json");
    out << cfg.to_json() << '\n';
  }

  double wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  result.manifest_path = out_dir / "manifest.json";
  write_manifest(result.manifest_path, "pipeline", {cfg.corpus_path},
                 {result.accuracy_csv.string(), (out_dir / "config.json").string()},
                 cfg.to_json(), cfg.seed, wall_ms);
  return result;
}

}  // namespace stylo
