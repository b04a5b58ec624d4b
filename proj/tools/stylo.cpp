// stylo: stylometric human-vs-chatbot text classification toolkit.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stylo/ablate.hpp"
#include "stylo/corpus.hpp"
#include "stylo/embed.hpp"
#include "stylo/error.hpp"
#include "stylo/features.hpp"
#include "stylo/learn.hpp"
#include "stylo/pipeline.hpp"
#include "stylo/rng.hpp"
#include "stylo/select.hpp"
#include "stylo/version.hpp"

// httplib (via genclient) must follow the Eigen-including headers; see the
// _res macro note in the tests.
#include "stylo/genclient.hpp"

namespace {

using namespace stylo;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
  }
};

CorpusFormat parse_format(const std::string& name) {
  return corpus_format_from_string(name);
}

void emit(const std::string& text, const std::string& output) {
  if (output.empty() || output == "-") {
    std::cout << text << '\n';
  } else {
    std::ofstream out(output);
    if (!out) throw DataError("cannot write output file: " + output);
    out << text << '\n';
  }
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> items;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) items.push_back(item);
  return items;
}

std::filesystem::path sibling_manifest(const std::string& output) {
  std::filesystem::path p(output);
  return p.parent_path() / (p.stem().string() + ".manifest.json");
}

// Effective invocation, recorded (and hashed) in every manifest.
std::string g_invocation_json;

int run(int argc, char** argv) {
  {
    nlohmann::json args = nlohmann::json::array();
    for (int i = 1; i < argc; ++i) args.push_back(argv[i]);
    g_invocation_json = nlohmann::json{{"args", args}}.dump();
  }
  CLI::App app{"stylometric human-vs-chatbot text classification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // ---- ingest ----
  std::string in_path, in_format = "jsonl", out_path, out_format = "jsonl";
  auto* ingest = app.add_subcommand("ingest", "validate and convert a corpus");
  ingest->add_option("--input", in_path)->required();
  ingest->add_option("--format", in_format)->capture_default_str();
  ingest->add_option("--output", out_path)->required();
  ingest->add_option("--output-format", out_format)->capture_default_str();
  ingest->callback([&] {
    Timer timer;
    Corpus corpus = load_corpus(in_path, parse_format(in_format));
    save_corpus(corpus, out_path, parse_format(out_format));
    std::cout << "ingested " << corpus.size() << " records\n";
    write_manifest(sibling_manifest(out_path), "ingest", {in_path}, {out_path},
                   g_invocation_json, 0, timer.ms());
  });

  // ---- stats ----
  std::string stats_in, stats_format = "jsonl", stats_out;
  auto* stats = app.add_subcommand("stats", "per-class corpus statistics");
  stats->add_option("--input", stats_in)->required();
  stats->add_option("--format", stats_format)->capture_default_str();
  stats->add_option("--output", stats_out);
  stats->callback([&] {
    Timer timer;
    Corpus corpus = load_corpus(stats_in, parse_format(stats_format));
    emit(corpus_stats_json(corpus_stats(corpus)), stats_out);
    if (!stats_out.empty())
      write_manifest(sibling_manifest(stats_out), "stats", {stats_in},
                     {stats_out}, g_invocation_json, 0, timer.ms());
  });

  // ---- extract ----
  std::string ex_in, ex_format = "jsonl", ex_lexicon = "data/lexicon", ex_out;
  auto* extract = app.add_subcommand("extract", "32-feature matrix from a corpus");
  extract->add_option("--input", ex_in)->required();
  extract->add_option("--format", ex_format)->capture_default_str();
  extract->add_option("--lexicon", ex_lexicon)->capture_default_str();
  extract->add_option("--output", ex_out)->required();
  extract->callback([&] {
    Timer timer;
    Corpus corpus = load_corpus(ex_in, parse_format(ex_format));
    Lexicon lex = load_lexicon(ex_lexicon);
    save_matrix_csv(feature_matrix(corpus, lex), ex_out);
    write_manifest(sibling_manifest(ex_out), "extract", {ex_in, ex_lexicon},
                   {ex_out}, g_invocation_json, 0, timer.ms());
  });

  // ---- correlate ----
  std::string corr_matrix, corr_out;
  auto* correlate = app.add_subcommand("correlate", "feature correlation matrix");
  correlate->add_option("--matrix", corr_matrix)->required();
  correlate->add_option("--output", corr_out)->required();
  correlate->callback([&] {
    Timer timer;
    FeatureMatrix m = load_matrix_csv(corr_matrix);
    save_correlation_csv(correlation_matrix(m), m.columns, corr_out);
    write_manifest(sibling_manifest(corr_out), "correlate", {corr_matrix},
                   {corr_out}, g_invocation_json, 0, timer.ms());
  });

  // ---- select ----
  std::string sel_matrix, sel_method, sel_out, sel_projection;
  std::uint64_t sel_seed = 42;
  int sel_trials = 5, sel_top_k = 15;
  double sel_variance = 0.95;
  std::optional<int> sel_target;
  int sel_target_raw = -1;
  auto* select_cmd = app.add_subcommand("select", "feature selection / reduction");
  select_cmd->add_option("--matrix", sel_matrix)->required();
  select_cmd->add_option("--method", sel_method)
      ->required()
      ->check(CLI::IsMember({"pca", "lda", "rf", "lasso"}));
  select_cmd->add_option("--output", sel_out)->required();
  select_cmd->add_option("--projection", sel_projection,
                         "write the fitted projection (pca/lda)");
  select_cmd->add_option("--seed", sel_seed)->capture_default_str();
  select_cmd->add_option("--trials", sel_trials)->capture_default_str();
  select_cmd->add_option("--top-k", sel_top_k)->capture_default_str();
  select_cmd->add_option("--variance-target", sel_variance)->capture_default_str();
  select_cmd->add_option("--target-nonzero", sel_target_raw,
                         "lasso: pick the lambda nearest this nonzero count");
  select_cmd->callback([&] {
    Timer timer;
    FeatureMatrix m = load_matrix_csv(sel_matrix);
    SelectionReport report;
    if (sel_method == "pca" || sel_method == "lda") {
      Projection proj =
          sel_method == "pca" ? pca_fit(m, sel_variance) : lda_fit(m);
      report.method = sel_method;
      for (Eigen::Index k = 0; k < proj.components.rows(); ++k)
        report.kept.push_back((sel_method == "pca" ? "pc" : "ld") +
                              std::to_string(k));
      if (sel_method == "pca") {
        for (Eigen::Index k = 0; k < proj.explained_variance.size(); ++k)
          report.scores.emplace_back("pc" + std::to_string(k),
                                     proj.explained_variance[k]);
      } else {
        report.scores.emplace_back("fisher_ratio", proj.fisher_ratio);
      }
      if (!sel_projection.empty()) save_projection(proj, sel_projection);
    } else if (sel_method == "rf") {
      // Internal 80/20 split: rank with a forest trained on one part,
      // measure importance on the other.
      ModelSpec ranker = ModelSpec::defaults("random_forest", sel_seed);
      Rng rng(Rng::derive(sel_seed, 104));
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(m.rows()));
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        idx[static_cast<std::size_t>(i)] = i;
      rng.shuffle(idx);
      Eigen::Index n_fit = std::max<Eigen::Index>(
          1, static_cast<Eigen::Index>(std::llround(0.8 * double(m.rows()))));
      n_fit = std::min(n_fit, m.rows() - 1);
      FeatureMatrix fit_part, val_part;
      fit_part.columns = val_part.columns = m.columns;
      fit_part.values.resize(n_fit, m.cols());
      val_part.values.resize(m.rows() - n_fit, m.cols());
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Eigen::Index src = idx[static_cast<std::size_t>(i)];
        FeatureMatrix& dst = i < n_fit ? fit_part : val_part;
        dst.values.row(i < n_fit ? i : i - n_fit) = m.values.row(src);
        dst.labels.push_back(m.labels[static_cast<std::size_t>(src)]);
        dst.ids.push_back(m.ids[static_cast<std::size_t>(src)]);
      }
      TrainedModel model = train(ranker, fit_part);
      report = permutation_importance(model, val_part, sel_trials,
                                      Rng::derive(sel_seed, 106), sel_top_k);
    } else {
      if (sel_target_raw >= 0) sel_target = sel_target_raw;
      report = lasso_select(m, sel_target, Rng::derive(sel_seed, 107));
    }
    emit(selection_report_json(report), sel_out);
    std::vector<std::string> outputs = {sel_out};
    if (!sel_projection.empty()) outputs.push_back(sel_projection);
    write_manifest(sibling_manifest(sel_out), "select", {sel_matrix}, outputs,
                   g_invocation_json, sel_seed, timer.ms());
  });

  // ---- train ----
  std::string tr_matrix, tr_kind = "logreg", tr_out;
  std::uint64_t tr_seed = 42;
  int tr_epochs = -1, tr_trees = -1, tr_depth = -1, tr_batch = -1;
  double tr_lr = -1, tr_shrinkage = -1, tr_lambda = -1;
  std::string tr_hidden;
  auto* train_cmd = app.add_subcommand("train", "train a classifier");
  train_cmd->add_option("--matrix", tr_matrix)->required();
  train_cmd->add_option("--model", tr_kind)
      ->check(CLI::IsMember(
          {"logreg", "linear_svm", "random_forest", "gbt", "mlp", "dnn"}))
      ->capture_default_str();
  train_cmd->add_option("--seed", tr_seed)->capture_default_str();
  train_cmd->add_option("--output", tr_out)->required();
  train_cmd->add_option("--epochs", tr_epochs);
  train_cmd->add_option("--trees", tr_trees);
  train_cmd->add_option("--max-depth", tr_depth);
  train_cmd->add_option("--batch-size", tr_batch);
  train_cmd->add_option("--learning-rate", tr_lr);
  train_cmd->add_option("--shrinkage", tr_shrinkage);
  train_cmd->add_option("--svm-lambda", tr_lambda);
  train_cmd->add_option("--hidden", tr_hidden, "comma-separated layer widths");
  train_cmd->callback([&] {
    Timer timer;
    FeatureMatrix m = load_matrix_csv(tr_matrix);
    ModelSpec spec = ModelSpec::defaults(tr_kind, tr_seed);
    if (tr_epochs >= 0) spec.epochs = tr_epochs;
    if (tr_trees >= 0) spec.trees = tr_trees;
    if (tr_depth >= 0) spec.max_depth = tr_depth;
    if (tr_batch >= 0) spec.batch_size = tr_batch;
    if (tr_lr >= 0) spec.learning_rate = tr_lr;
    if (tr_shrinkage >= 0) spec.shrinkage = tr_shrinkage;
    if (tr_lambda >= 0) spec.svm_lambda = tr_lambda;
    if (!tr_hidden.empty()) {
      spec.hidden.clear();
      for (const std::string& w : split_list(tr_hidden))
        spec.hidden.push_back(std::stoi(w));
    }
    TrainedModel model = train(spec, m);
    save_model(model, tr_out);
    std::cout << "train_accuracy " << model.train_accuracy << '\n';
    write_manifest(sibling_manifest(tr_out), "train", {tr_matrix}, {tr_out},
                   g_invocation_json, tr_seed, timer.ms());
  });

  // ---- eval ----
  std::string ev_model, ev_matrix, ev_out;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a matrix");
  eval_cmd->add_option("--model", ev_model)->required();
  eval_cmd->add_option("--matrix", ev_matrix)->required();
  eval_cmd->add_option("--output", ev_out);
  eval_cmd->callback([&] {
    Timer timer;
    TrainedModel model = load_model(ev_model);
    FeatureMatrix m = load_matrix_csv(ev_matrix);
    emit(eval_report_json(evaluate(model, m)), ev_out);
    if (!ev_out.empty())
      write_manifest(sibling_manifest(ev_out), "eval", {ev_model, ev_matrix},
                     {ev_out}, g_invocation_json, 0, timer.ms());
  });

  // ---- embed ----
  std::string em_in, em_format = "jsonl", em_method = "tfidf", em_out;
  std::string em_vectors_in, em_vectors_out;
  std::uint64_t em_seed = 42;
  int em_dim = 100, em_window = 5, em_negatives = 5, em_epochs = 10;
  int em_min_count = 2, em_max_vocab = 5000, em_glove_window = 10;
  double em_lr = 0.05, em_x_max = 100.0, em_alpha = 0.75;
  auto* embed_cmd = app.add_subcommand("embed", "embedding design matrix");
  embed_cmd->add_option("--input", em_in)->required();
  embed_cmd->add_option("--format", em_format)->capture_default_str();
  embed_cmd->add_option("--method", em_method)
      ->check(CLI::IsMember({"tfidf", "cbow", "glove", "loaded"}))
      ->capture_default_str();
  embed_cmd->add_option("--output", em_out)->required();
  embed_cmd->add_option("--vectors", em_vectors_in, "vector file for --method loaded");
  embed_cmd->add_option("--save-vectors", em_vectors_out,
                        "write the trained vector table");
  embed_cmd->add_option("--dim", em_dim)->capture_default_str();
  embed_cmd->add_option("--window", em_window)->capture_default_str();
  embed_cmd->add_option("--negatives", em_negatives)->capture_default_str();
  embed_cmd->add_option("--epochs", em_epochs)->capture_default_str();
  embed_cmd->add_option("--learning-rate", em_lr)->capture_default_str();
  embed_cmd->add_option("--min-count", em_min_count)->capture_default_str();
  embed_cmd->add_option("--max-vocab", em_max_vocab)->capture_default_str();
  embed_cmd->add_option("--glove-window", em_glove_window)->capture_default_str();
  embed_cmd->add_option("--x-max", em_x_max)->capture_default_str();
  embed_cmd->add_option("--alpha", em_alpha)->capture_default_str();
  embed_cmd->add_option("--seed", em_seed)->capture_default_str();
  embed_cmd->callback([&] {
    Timer timer;
    Corpus corpus = load_corpus(em_in, parse_format(em_format));
    std::vector<TokenDoc> docs = corpus_token_docs(corpus);
    std::vector<std::string> outputs = {em_out};
    if (em_method == "tfidf") {
      Vocabulary vocab = tfidf_fit(docs, em_max_vocab);
      std::vector<Label> labels;
      std::vector<std::string> ids;
      for (const auto& r : corpus.records) {
        labels.push_back(r.label);
        ids.push_back(r.id);
      }
      save_matrix_csv(tfidf_matrix(vocab, docs, labels, ids), em_out);
    } else {
      VectorTable table;
      if (em_method == "cbow") {
        CbowConfig cc{em_dim, em_window, em_negatives, em_epochs,
                      em_lr,  em_min_count, em_seed};
        table = train_cbow(docs, cc);
      } else if (em_method == "glove") {
        CooccurrenceMatrix cooc =
            build_cooccurrence(docs, em_glove_window, em_min_count);
        GloveConfig gc{em_dim, em_x_max, em_alpha, em_epochs, em_lr, em_seed};
        table = train_glove(cooc, gc);
      } else {
        if (em_vectors_in.empty())
          throw DataError("--method loaded requires --vectors");
        table = load_vectors(em_vectors_in);
      }
      if (!em_vectors_out.empty()) {
        save_vectors(table, em_vectors_out);
        outputs.push_back(em_vectors_out);
      }
      save_matrix_csv(embed_matrix(corpus, table), em_out);
    }
    write_manifest(sibling_manifest(em_out), "embed", {em_in}, outputs, "",
                   em_seed, timer.ms());
  });

  // ---- ablate ----
  std::string ab_model, ab_matrix, ab_features, ab_deltas = "0.10,-0.10";
  std::string ab_target = "chatbot", ab_csv, ab_json;
  std::uint64_t ab_seed = 42;
  auto* ablate_cmd =
      app.add_subcommand("ablate", "feature perturbation study on a fixed model");
  ablate_cmd->add_option("--model", ab_model)->required();
  ablate_cmd->add_option("--matrix", ab_matrix)->required();
  ablate_cmd->add_option("--features", ab_features,
                         "comma-separated; default: every matrix column");
  ablate_cmd->add_option("--deltas", ab_deltas)->capture_default_str();
  ablate_cmd->add_option("--target", ab_target)
      ->check(CLI::IsMember({"chatbot", "human", "both"}))
      ->capture_default_str();
  ablate_cmd->add_option("--output-csv", ab_csv)->required();
  ablate_cmd->add_option("--output-json", ab_json);
  ablate_cmd->callback([&] {
    Timer timer;
    TrainedModel model = load_model(ab_model);
    FeatureMatrix m = load_matrix_csv(ab_matrix);
    std::vector<std::string> features =
        ab_features.empty() ? m.columns : split_list(ab_features);
    std::vector<double> deltas;
    for (const std::string& d : split_list(ab_deltas))
      deltas.push_back(std::stod(d));
    AblationReport report = ablation_eval(
        model, m, features, deltas, perturbation_target_from_string(ab_target));
    save_ablation_csv(report, ab_csv);
    std::vector<std::string> outputs = {ab_csv};
    if (!ab_json.empty()) {
      emit(ablation_report_json(report, ab_seed), ab_json);
      outputs.push_back(ab_json);
    }
    write_manifest(sibling_manifest(ab_csv), "ablate", {ab_model, ab_matrix},
                   outputs, g_invocation_json, ab_seed, timer.ms());
  });

  // ---- sweep ----
  std::string sw_model, sw_matrix, sw_feature, sw_out;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "linear-SVM per-weight accuracy sweep");
  sweep_cmd->add_option("--model", sw_model)->required();
  sweep_cmd->add_option("--matrix", sw_matrix)->required();
  sweep_cmd->add_option("--feature", sw_feature)->required();
  sweep_cmd->add_option("--output", sw_out)->required();
  sweep_cmd->callback([&] {
    Timer timer;
    TrainedModel model = load_model(sw_model);
    FeatureMatrix m = load_matrix_csv(sw_matrix);
    save_sweep_csv(svm_weight_sweep(model, m, sw_feature), sw_out);
    write_manifest(sibling_manifest(sw_out), "sweep", {sw_model, sw_matrix},
                   {sw_out}, g_invocation_json, 0, timer.ms());
  });

  // ---- generate ----
  std::string gen_in, gen_format = "jsonl", gen_out, gen_endpoint;
  std::string gen_model_name = "gpt-3.5-turbo", gen_cache = "gen_cache";
  std::string gen_template;
  int gen_retries = 3, gen_rate = 60, gen_limit = 0;
  bool gen_split = false;
  auto* generate_cmd = app.add_subcommand(
      "generate", "produce chatbot counterparts via a chat-completion API");
  generate_cmd->add_option("--input", gen_in)->required();
  generate_cmd->add_option("--format", gen_format)->capture_default_str();
  generate_cmd->add_option("--output", gen_out)->required();
  generate_cmd->add_option("--endpoint", gen_endpoint)->required();
  generate_cmd->add_option("--model-name", gen_model_name)->capture_default_str();
  generate_cmd->add_option("--cache", gen_cache)->capture_default_str();
  generate_cmd->add_option("--template", gen_template,
                           "prompt template file (default: built-in)");
  generate_cmd->add_option("--max-retries", gen_retries)->capture_default_str();
  generate_cmd->add_option("--rate-limit", gen_rate)->capture_default_str();
  generate_cmd->add_option("--limit", gen_limit, "stop after N source records");
  generate_cmd->add_flag("--split-paragraphs", gen_split,
                         "split multi-paragraph completions into siblings");
  generate_cmd->callback([&] {
    Timer timer;
    Corpus corpus = load_corpus(gen_in, parse_format(gen_format));
    PromptTemplate tmpl = PromptTemplate::wikihow_default();
    if (!gen_template.empty()) {
      std::ifstream in(gen_template);
      if (!in) throw DataError("cannot open template file: " + gen_template);
      std::stringstream ss;
      ss << in.rdbuf();
      tmpl.text = ss.str();
      while (!tmpl.text.empty() &&
             (tmpl.text.back() == '\n' || tmpl.text.back() == '\r'))
        tmpl.text.pop_back();
    }
    GenerationJob job;
    job.endpoint = gen_endpoint;
    job.model_name = gen_model_name;
    job.max_retries = gen_retries;
    job.rate_limit = gen_rate;
    job.cache_dir = gen_cache;
    SystemClock clock;
    RateLimiter limiter(job.rate_limit, clock);
    GenerationStats gen_stats;

    Corpus out;
    out.source = gen_in;
    out.format = "memory";
    int processed = 0;
    for (const ParagraphRecord& r : corpus.records) {
      if (r.label != Label::human) continue;
      if (gen_limit > 0 && processed >= gen_limit) break;
      ParagraphRecord generated =
          generate(job, tmpl, r, clock, &limiter, &gen_stats);
      if (gen_split) {
        for (ParagraphRecord& part : split_generated(generated))
          out.records.push_back(std::move(part));
      } else {
        out.records.push_back(std::move(generated));
      }
      ++processed;
    }
    save_corpus(out, gen_out, parse_format("jsonl"));
    std::cout << "generated " << out.records.size() << " records ("
              << gen_stats.network_calls << " network calls, "
              << gen_stats.cache_hits << " cache hits)\n";
    write_manifest(sibling_manifest(gen_out), "generate", {gen_in}, {gen_out},
                   g_invocation_json, 0, timer.ms());
  });

  // ---- pipeline ----
  std::string pl_config, pl_output_dir, pl_corpus;
  std::uint64_t pl_seed = 0;
  auto* pipeline_cmd = app.add_subcommand(
      "pipeline", "selection x model experiment grid from a config file");
  pipeline_cmd->add_option("--config", pl_config)->required();
  pipeline_cmd->add_option("--output-dir", pl_output_dir, "override output_dir");
  pipeline_cmd->add_option("--corpus", pl_corpus, "override corpus_path");
  pipeline_cmd->add_option("--seed", pl_seed, "override seed");
  pipeline_cmd->callback([&] {
    ExperimentConfig cfg = ExperimentConfig::load(pl_config);
    if (!pl_output_dir.empty()) cfg.output_dir = pl_output_dir;
    if (!pl_corpus.empty()) cfg.corpus_path = pl_corpus;
    if (pipeline_cmd->count("--seed") > 0) cfg.seed = pl_seed;
    PipelineResult result = run_pipeline(cfg);
    for (const PipelineCell& cell : result.cells) {
      std::cout << cell.selection << ' ' << cell.model << ' ' << cell.accuracy
                << '\n';
    }
    std::cout << "wrote " << result.accuracy_csv.string() << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help / --version
    std::cerr << "error: " << e.what()
              << " (usage: stylo SUBCOMMAND [OPTIONS]; see stylo --help)\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const stylo::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
