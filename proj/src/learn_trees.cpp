#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "stylo/error.hpp"
#include "stylo/learn.hpp"
#include "stylo/rng.hpp"

namespace stylo {
namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double score = std::numeric_limits<double>::infinity();
};

// Candidate features for one split: all of them, or a sqrt(d) sample drawn
// without replacement, returned in ascending order for deterministic
// tie-breaking.
std::vector<int> candidate_features(int d, bool subsample, Rng& rng) {
  std::vector<int> all(static_cast<std::size_t>(d));
  std::iota(all.begin(), all.end(), 0);
  if (!subsample) return all;
  int k = std::max(1, static_cast<int>(std::floor(std::sqrt(double(d)))));
  rng.shuffle(all);
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

// Weighted Gini impurity of a candidate split, scanned over sorted values.
// `targets` are 0/1 class labels.
SplitChoice best_gini_split(const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& targets,
                            const std::vector<int>& rows,
                            const std::vector<int>& features) {
  SplitChoice best;
  const double n = static_cast<double>(rows.size());
  for (int f : features) {
    std::vector<int> order = rows;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (x(a, f) != x(b, f)) return x(a, f) < x(b, f);
      return a < b;
    });
    double left_pos = 0, left_n = 0;
    double total_pos = 0;
    for (int r : rows) total_pos += targets[r];
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      int r = order[k];
      left_pos += targets[r];
      left_n += 1;
      double v = x(r, f), next = x(order[k + 1], f);
      if (v == next) continue;
      double right_n = n - left_n;
      double right_pos = total_pos - left_pos;
      double pl = left_pos / left_n, pr = right_pos / right_n;
      double gini_l = 1.0 - pl * pl - (1.0 - pl) * (1.0 - pl);
      double gini_r = 1.0 - pr * pr - (1.0 - pr) * (1.0 - pr);
      double score = (left_n * gini_l + right_n * gini_r) / n;
      if (score < best.score - 1e-15) {
        best.score = score;
        best.feature = f;
        best.threshold = 0.5 * (v + next);
      }
    }
  }
  return best;
}

// Minimum-SSE split on regression targets.
SplitChoice best_sse_split(const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& targets,
                           const std::vector<int>& rows,
                           const std::vector<int>& features) {
  SplitChoice best;
  const double n = static_cast<double>(rows.size());
  double total_sum = 0;
  for (int r : rows) total_sum += targets[r];
  for (int f : features) {
    std::vector<int> order = rows;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (x(a, f) != x(b, f)) return x(a, f) < x(b, f);
      return a < b;
    });
    double left_sum = 0, left_n = 0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      int r = order[k];
      left_sum += targets[r];
      left_n += 1;
      double v = x(r, f), next = x(order[k + 1], f);
      if (v == next) continue;
      double right_n = n - left_n;
      double right_sum = total_sum - left_sum;
      // SSE up to a constant: -sum^2/n per side.
      double score = -left_sum * left_sum / left_n -
                     right_sum * right_sum / right_n;
      if (score < best.score - 1e-15) {
        best.score = score;
        best.feature = f;
        best.threshold = 0.5 * (v + next);
      }
    }
  }
  return best;
}

struct TreeBuilder {
  const Eigen::MatrixXd& x;
  const Eigen::VectorXd& targets;   // labels (classification) or gradients
  const Eigen::VectorXd* hessians;  // gbt leaf weights; null for forest
  int max_depth;
  bool subsample_features;
  Rng& rng;
  Tree tree;

  int build(std::vector<int> rows, int depth) {
    double sum = 0;
    for (int r : rows) sum += targets[r];
    double mean = sum / static_cast<double>(rows.size());

    bool pure = true;
    for (int r : rows) {
      if (targets[r] != targets[rows.front()]) {
        pure = false;
        break;
      }
    }

    auto make_leaf = [&]() {
      TreeNode leaf;
      if (hessians) {
        double h = 0;
        for (int r : rows) h += (*hessians)[r];
        leaf.value = sum / (h + 1e-12);  // Newton step on logistic loss
      } else {
        leaf.value = mean;
      }
      tree.nodes.push_back(leaf);
      return static_cast<int>(tree.nodes.size()) - 1;
    };

    if (depth >= max_depth || rows.size() < 2 || pure) return make_leaf();

    std::vector<int> features =
        candidate_features(static_cast<int>(x.cols()), subsample_features, rng);
    SplitChoice split = hessians ? best_sse_split(x, targets, rows, features)
                                 : best_gini_split(x, targets, rows, features);
    if (split.feature < 0) return make_leaf();

    std::vector<int> left, right;
    for (int r : rows)
      (x(r, split.feature) <= split.threshold ? left : right).push_back(r);
    if (left.empty() || right.empty()) return make_leaf();

    int self = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{split.feature, split.threshold, -1, -1, 0.0});
    int l = build(std::move(left), depth + 1);
    int r = build(std::move(right), depth + 1);
    tree.nodes[static_cast<std::size_t>(self)].left = l;
    tree.nodes[static_cast<std::size_t>(self)].right = r;
    return self;
  }
};

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

namespace detail {

TrainedModel train_forest(const ModelSpec& spec, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& y01) {
  if (spec.trees < 1) throw DataError("random forest needs at least 1 tree");
  const int n = static_cast<int>(x.rows());
  ForestParams forest;
  forest.trees.reserve(static_cast<std::size_t>(spec.trees));
  for (int t = 0; t < spec.trees; ++t) {
    Rng rng(Rng::derive(spec.seed, static_cast<std::uint64_t>(t)));
    std::vector<int> rows(static_cast<std::size_t>(n));
    if (spec.bootstrap) {
      for (int i = 0; i < n; ++i)
        rows[static_cast<std::size_t>(i)] =
            static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeBuilder builder{x, y01, nullptr, spec.max_depth, spec.feature_subsample,
                        rng, {}};
    builder.build(std::move(rows), 0);
    forest.trees.push_back(std::move(builder.tree));
  }
  TrainedModel model;
  model.params = std::move(forest);
  return model;
}

TrainedModel train_gbt(const ModelSpec& spec, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y01) {
  if (spec.trees < 1) throw DataError("gbt needs at least 1 round");
  const Eigen::Index n = x.rows();
  double p0 = y01.mean();
  GbtParams gbt;
  gbt.shrinkage = spec.shrinkage;
  gbt.base_score = std::log(p0 / (1.0 - p0));
  gbt.trees.reserve(static_cast<std::size_t>(spec.trees));

  Eigen::VectorXd f = Eigen::VectorXd::Constant(n, gbt.base_score);
  TrainedModel model;
  model.training_loss.reserve(static_cast<std::size_t>(spec.trees));
  Rng rng(spec.seed);
  for (int round = 0; round < spec.trees; ++round) {
    Eigen::VectorXd p(n), grad(n), hess(n);
    double loss = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      p[i] = sigmoid(f[i]);
      grad[i] = y01[i] - p[i];
      hess[i] = std::max(p[i] * (1.0 - p[i]), 1e-12);
      loss += -(y01[i] * std::log(std::max(p[i], 1e-12)) +
                (1.0 - y01[i]) * std::log(std::max(1.0 - p[i], 1e-12)));
    }
    model.training_loss.push_back(loss / static_cast<double>(n));

    std::vector<int> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);
    TreeBuilder builder{x, grad, &hess, spec.max_depth, false, rng, {}};
    builder.build(std::move(rows), 0);
    for (Eigen::Index i = 0; i < n; ++i)
      f[i] += spec.shrinkage * builder.tree.predict(x.row(i));
    gbt.trees.push_back(std::move(builder.tree));
  }
  model.params = std::move(gbt);
  return model;
}

}  // namespace detail
}  // namespace stylo
