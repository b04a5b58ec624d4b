#include "stylo/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "stylo/error.hpp"
#include "stylo/rng.hpp"

namespace stylo {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Deterministic vocabulary from occurrence counts: frequency-descending,
// ties alphabetical.
std::vector<std::string> ranked_words(
    const std::map<std::string, std::int64_t>& counts, std::int64_t min_count) {
  std::vector<std::pair<std::string, std::int64_t>> items;
  for (const auto& [word, count] : counts)
    if (count >= min_count) items.emplace_back(word, count);
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(items.size());
  for (auto& [word, count] : items) words.push_back(std::move(word));
  return words;
}

struct IndexedCorpus {
  std::vector<std::string> words;
  std::unordered_map<std::string, int> index;
  std::vector<std::vector<int>> docs;  // OOV tokens dropped
  std::vector<std::int64_t> counts;    // per word occurrences
};

IndexedCorpus index_corpus(const std::vector<TokenDoc>& docs,
                           std::int64_t min_count) {
  std::map<std::string, std::int64_t> counts;
  for (const TokenDoc& doc : docs)
    for (const std::string& w : doc) counts[w] += 1;

  IndexedCorpus out;
  out.words = ranked_words(counts, min_count);
  if (out.words.empty())
    throw DataError("vocabulary is empty after applying min_count");
  for (std::size_t i = 0; i < out.words.size(); ++i)
    out.index[out.words[i]] = static_cast<int>(i);
  out.counts.resize(out.words.size());
  for (std::size_t i = 0; i < out.words.size(); ++i)
    out.counts[i] = counts[out.words[i]];

  out.docs.reserve(docs.size());
  for (const TokenDoc& doc : docs) {
    std::vector<int> ids;
    ids.reserve(doc.size());
    for (const std::string& w : doc) {
      auto it = out.index.find(w);
      if (it != out.index.end()) ids.push_back(it->second);
    }
    out.docs.push_back(std::move(ids));
  }
  return out;
}

}  // namespace

TokenDoc embedding_tokens(const std::string& text) {
  TokenDoc doc;
  for (const Token& t : tokenize(text))
    if (t.is_word()) doc.push_back(t.lower);
  return doc;
}

std::vector<TokenDoc> corpus_token_docs(const Corpus& corpus) {
  std::vector<TokenDoc> docs;
  docs.reserve(corpus.records.size());
  for (const ParagraphRecord& r : corpus.records)
    docs.push_back(embedding_tokens(r.text));
  return docs;
}

Vocabulary tfidf_fit(const std::vector<TokenDoc>& docs, int max_vocab) {
  if (docs.empty()) throw DataError("tfidf_fit: corpus is empty");
  if (max_vocab < 1) throw DataError("tfidf_fit: max_vocab must be >= 1");

  std::map<std::string, std::int64_t> df;
  for (const TokenDoc& doc : docs) {
    std::map<std::string, bool> seen;
    for (const std::string& w : doc) {
      if (!seen[w]) {
        seen[w] = true;
        df[w] += 1;
      }
    }
  }

  std::vector<std::pair<std::string, std::int64_t>> items(df.begin(), df.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (items.size() > static_cast<std::size_t>(max_vocab))
    items.resize(static_cast<std::size_t>(max_vocab));

  Vocabulary vocab;
  vocab.total_docs = static_cast<std::int64_t>(docs.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    vocab.words.push_back(items[i].first);
    vocab.index[items[i].first] = static_cast<int>(i);
    vocab.doc_freq.push_back(items[i].second);
  }
  return vocab;
}

std::vector<std::pair<int, double>> tfidf_transform(const Vocabulary& vocab,
                                                    const TokenDoc& doc) {
  std::vector<std::pair<int, double>> row;
  if (doc.empty()) return row;

  std::map<int, std::int64_t> counts;
  for (const std::string& w : doc) {
    auto it = vocab.index.find(w);
    if (it != vocab.index.end()) counts[it->second] += 1;
  }
  const double len = static_cast<double>(doc.size());
  row.reserve(counts.size());
  for (const auto& [idx, count] : counts) {
    double tf = static_cast<double>(count) / len;
    double idf = std::log(static_cast<double>(vocab.total_docs) /
                          static_cast<double>(vocab.doc_freq[idx]));
    row.emplace_back(idx, tf * idf);
  }
  return row;
}

FeatureMatrix tfidf_matrix(const Vocabulary& vocab,
                           const std::vector<TokenDoc>& docs,
                           const std::vector<Label>& labels,
                           const std::vector<std::string>& ids) {
  if (docs.size() != labels.size() || docs.size() != ids.size())
    throw DataError("tfidf_matrix: docs, labels, and ids must align");
  FeatureMatrix m;
  m.columns = vocab.words;
  m.labels = labels;
  m.ids = ids;
  m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(docs.size()),
                                   vocab.size());
  for (std::size_t i = 0; i < docs.size(); ++i)
    for (const auto& [idx, value] : tfidf_transform(vocab, docs[i]))
      m.values(static_cast<Eigen::Index>(i), idx) = value;
  return m;
}

VectorTable train_cbow(const std::vector<TokenDoc>& docs, const CbowConfig& cfg,
                       std::vector<double>* epoch_loss) {
  if (cfg.dim < 1 || cfg.window < 1 || cfg.negatives < 1)
    throw DataError("train_cbow: dim, window, and negatives must be >= 1");
  IndexedCorpus corpus = index_corpus(docs, cfg.min_count);
  const int v = static_cast<int>(corpus.words.size());
  const int d = cfg.dim;

  Rng rng(cfg.seed);
  Eigen::MatrixXd input(v, d);   // the trained table
  for (int i = 0; i < v; ++i)
    for (int j = 0; j < d; ++j)
      input(i, j) = rng.uniform(-0.5, 0.5) / d;
  Eigen::MatrixXd output = Eigen::MatrixXd::Zero(v, d);

  // Unigram^(3/4) negative-sampling distribution as a cumulative table.
  std::vector<double> cdf(static_cast<std::size_t>(v));
  double acc = 0;
  for (int i = 0; i < v; ++i) {
    acc += std::pow(static_cast<double>(corpus.counts[static_cast<std::size_t>(i)]),
                    0.75);
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  auto sample_negative = [&](int exclude) {
    for (int tries = 0; tries < 16; ++tries) {
      double u = rng.uniform() * acc;
      int idx = static_cast<int>(
          std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      idx = std::min(idx, v - 1);
      if (idx != exclude) return idx;
    }
    return (exclude + 1) % v;
  };

  Eigen::VectorXd h(d), grad_h(d);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss = 0;
    std::int64_t examples = 0;
    for (const std::vector<int>& doc : corpus.docs) {
      const int len = static_cast<int>(doc.size());
      for (int t = 0; t < len; ++t) {
        int lo = std::max(0, t - cfg.window);
        int hi = std::min(len - 1, t + cfg.window);
        int context = hi - lo;  // excludes the target itself
        if (context < 1) continue;

        h.setZero();
        for (int c = lo; c <= hi; ++c)
          if (c != t) h += input.row(doc[static_cast<std::size_t>(c)]);
        h /= static_cast<double>(context);

        grad_h.setZero();
        for (int k = 0; k <= cfg.negatives; ++k) {
          int target = k == 0
                           ? doc[static_cast<std::size_t>(t)]
                           : sample_negative(doc[static_cast<std::size_t>(t)]);
          double label = k == 0 ? 1.0 : 0.0;
          double z = output.row(target).dot(h);
          double p = sigmoid(z);
          loss += label > 0.5 ? -std::log(std::max(p, 1e-12))
                              : -std::log(std::max(1.0 - p, 1e-12));
          double g = p - label;
          grad_h += g * output.row(target).transpose();
          output.row(target) -= cfg.learning_rate * g * h.transpose();
        }
        grad_h /= static_cast<double>(context);
        for (int c = lo; c <= hi; ++c)
          if (c != t)
            input.row(doc[static_cast<std::size_t>(c)]) -=
                cfg.learning_rate * grad_h.transpose();
        ++examples;
      }
    }
    if (epoch_loss)
      epoch_loss->push_back(examples ? loss / static_cast<double>(examples) : 0.0);
  }

  VectorTable table;
  table.dim = d;
  table.words = corpus.words;
  table.index = corpus.index;
  table.vectors = std::move(input);
  return table;
}

CooccurrenceMatrix build_cooccurrence(const std::vector<TokenDoc>& docs,
                                      int window, int min_count) {
  if (window < 1) throw DataError("build_cooccurrence: window must be >= 1");
  IndexedCorpus corpus = index_corpus(docs, min_count);

  std::map<std::pair<int, int>, double> cells;
  for (const std::vector<int>& doc : corpus.docs) {
    const int len = static_cast<int>(doc.size());
    for (int t = 0; t < len; ++t) {
      for (int k = 1; k <= window && t + k < len; ++k) {
        double weight = 1.0 / static_cast<double>(k);
        int a = doc[static_cast<std::size_t>(t)];
        int b = doc[static_cast<std::size_t>(t + k)];
        cells[{a, b}] += weight;
        cells[{b, a}] += weight;
      }
    }
  }

  CooccurrenceMatrix matrix;
  matrix.words = std::move(corpus.words);
  matrix.index = std::move(corpus.index);
  matrix.window = window;
  matrix.symmetric = true;
  matrix.entries.reserve(cells.size());
  for (const auto& [key, count] : cells)
    matrix.entries.push_back({key.first, key.second, count});
  return matrix;
}

double glove_weight(double x, double x_max, double alpha) {
  if (x >= x_max) return 1.0;
  return std::pow(x / x_max, alpha);
}

VectorTable train_glove(const CooccurrenceMatrix& matrix, const GloveConfig& cfg,
                        std::vector<double>* epoch_loss) {
  if (matrix.entries.empty())
    throw DataError("train_glove: co-occurrence matrix has no entries");
  if (cfg.dim < 1) throw DataError("train_glove: dim must be >= 1");

  const int v = static_cast<int>(matrix.words.size());
  const int d = cfg.dim;
  Rng rng(cfg.seed);
  Eigen::MatrixXd w(v, d), wc(v, d);
  Eigen::VectorXd b(v), bc(v);
  for (int i = 0; i < v; ++i) {
    for (int j = 0; j < d; ++j) {
      w(i, j) = rng.uniform(-0.5, 0.5) / d;
      wc(i, j) = rng.uniform(-0.5, 0.5) / d;
    }
    b[i] = rng.uniform(-0.5, 0.5) / d;
    bc[i] = rng.uniform(-0.5, 0.5) / d;
  }
  Eigen::MatrixXd gw = Eigen::MatrixXd::Ones(v, d), gwc = Eigen::MatrixXd::Ones(v, d);
  Eigen::VectorXd gb = Eigen::VectorXd::Ones(v), gbc = Eigen::VectorXd::Ones(v);

  std::vector<std::size_t> order(matrix.entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss = 0;
    for (std::size_t o : order) {
      const auto& e = matrix.entries[o];
      double f = glove_weight(e.count, cfg.x_max, cfg.alpha);
      double diff = w.row(e.row).dot(wc.row(e.col)) + b[e.row] + bc[e.col] -
                    std::log(e.count);
      loss += f * diff * diff;
      double fdiff = f * diff;

      for (int j = 0; j < d; ++j) {
        double grad_w = fdiff * wc(e.col, j);
        double grad_c = fdiff * w(e.row, j);
        w(e.row, j) -= cfg.learning_rate * grad_w / std::sqrt(gw(e.row, j));
        wc(e.col, j) -= cfg.learning_rate * grad_c / std::sqrt(gwc(e.col, j));
        gw(e.row, j) += grad_w * grad_w;
        gwc(e.col, j) += grad_c * grad_c;
      }
      b[e.row] -= cfg.learning_rate * fdiff / std::sqrt(gb[e.row]);
      bc[e.col] -= cfg.learning_rate * fdiff / std::sqrt(gbc[e.col]);
      gb[e.row] += fdiff * fdiff;
      gbc[e.col] += fdiff * fdiff;
    }
    if (epoch_loss) epoch_loss->push_back(loss);
  }

  VectorTable table;
  table.dim = d;
  table.words = matrix.words;
  table.index = matrix.index;
  table.vectors = w + wc;
  return table;
}

VectorTable load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vector file: " + path.string());
  VectorTable table;
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> values;
    std::string field;
    while (ss >> field) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw DataError("line " + std::to_string(line_no) +
                        ": unparseable float \"" + field + "\"");
      }
    }
    if (values.empty())
      throw DataError("line " + std::to_string(line_no) + ": no vector values");
    if (table.dim == 0) table.dim = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != table.dim)
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.dim) + " values, got " +
                      std::to_string(values.size()));
    auto it = table.index.find(word);
    if (it != table.index.end()) {
      std::cerr << "warning: duplicate vector for \"" << word << "\" at line "
                << line_no << "; keeping the last entry\n";
      rows[static_cast<std::size_t>(it->second)] = std::move(values);
    } else {
      table.index[word] = static_cast<int>(table.words.size());
      table.words.push_back(word);
      rows.push_back(std::move(values));
    }
  }
  if (rows.empty()) throw DataError("vector file is empty: " + path.string());
  table.vectors.resize(static_cast<Eigen::Index>(rows.size()), table.dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < table.dim; ++j)
      table.vectors(static_cast<Eigen::Index>(i), j) =
          rows[i][static_cast<std::size_t>(j)];
  return table;
}

void save_vectors(const VectorTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vector file: " + path.string());
  char buf[40];
  for (std::size_t i = 0; i < table.words.size(); ++i) {
    out << table.words[i];
    for (int j = 0; j < table.dim; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g",
                    table.vectors(static_cast<Eigen::Index>(i), j));
      out << ' ' << buf;
    }
    out << '\n';
  }
}

Eigen::VectorXd doc_embed(const TokenDoc& tokens, const VectorTable& table) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dim);
  int hits = 0;
  for (const std::string& w : tokens) {
    auto it = table.index.find(w);
    if (it != table.index.end()) {
      sum += table.vectors.row(it->second).transpose();
      ++hits;
    }
  }
  if (hits > 0) sum /= static_cast<double>(hits);
  return sum;
}

FeatureMatrix embed_matrix(const Corpus& corpus, const VectorTable& table) {
  FeatureMatrix m;
  for (int j = 0; j < table.dim; ++j) m.columns.push_back("e" + std::to_string(j));
  m.values.resize(static_cast<Eigen::Index>(corpus.records.size()), table.dim);
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const ParagraphRecord& r = corpus.records[i];
    m.values.row(static_cast<Eigen::Index>(i)) =
        doc_embed(embedding_tokens(r.text), table).transpose();
    m.labels.push_back(r.label);
    m.ids.push_back(r.id);
  }
  return m;
}

}  // namespace stylo
