#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "stylo/features.hpp"
#include "stylo/standardize.hpp"

namespace stylo {

enum class ModelKind { logreg, linear_svm, random_forest, gbt, mlp };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);  // accepts "dnn"

/// Classifier family plus hyperparameters. Every field has a documented
/// default; the seed is mandatory for reproducible training.
struct ModelSpec {
  ModelKind kind = ModelKind::logreg;
  std::uint64_t seed = 0;

  double learning_rate = 0.1;  // logreg / mlp step size
  int epochs = 200;
  int batch_size = 64;  // 0 = full batch
  double l2 = 0.0;      // logreg weight decay

  double svm_lambda = 1e-3;  // linear_svm L2 strength

  int trees = 100;
  int max_depth = 12;
  bool bootstrap = true;          // random_forest row bagging
  bool feature_subsample = true;  // random_forest sqrt(d) features per split
  double shrinkage = 0.1;         // gbt learning rate

  std::vector<int> hidden = {64, 64};  // mlp layout; dnn = deeper layout

  /// Kind-appropriate defaults; "dnn" yields an mlp with four hidden layers
  /// of 128.
  static ModelSpec defaults(const std::string& kind_name, std::uint64_t seed);
};

struct LinearParams {
  Eigen::VectorXd weights;  // in standardized feature space
  double bias = 0.0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf: class-1 fraction (forest) or logit step (gbt)
};

struct Tree {
  std::vector<TreeNode> nodes;
  double predict(const Eigen::RowVectorXd& x) const;
};

struct ForestParams {
  std::vector<Tree> trees;
};

struct GbtParams {
  std::vector<Tree> trees;
  double base_score = 0.0;  // prior log-odds
  double shrinkage = 0.1;
};

struct MlpParams {
  std::vector<Eigen::MatrixXd> weights;  // layer l: (out x in)
  std::vector<Eigen::VectorXd> biases;
};

struct TrainedModel {
  ModelSpec spec;
  std::vector<std::string> feature_schema;
  Standardizer standardizer;
  std::variant<LinearParams, ForestParams, GbtParams, MlpParams> params;
  std::vector<double> training_loss;  // per-epoch log (empty for trees)
  double train_accuracy = 0.0;
};

struct EvalReport {
  double accuracy = 0.0;
  // confusion[actual][predicted], classes ordered human, chatbot
  std::array<std::array<int, 2>, 2> confusion = {{{0, 0}, {0, 0}}};
  int n = 0;
};

TrainedModel train(const ModelSpec& spec, const FeatureMatrix& data);

std::vector<Label> predict(const TrainedModel& model, const FeatureMatrix& m);

/// Raw decision scores: linear models emit w.x+b, trees the chatbot vote
/// fraction, gbt the boosted logit, mlp the sigmoid output. Scores at the
/// decision point (0 for margins, 0.5 for probabilities) classify as chatbot.
Eigen::VectorXd predict_score(const TrainedModel& model, const FeatureMatrix& m);

EvalReport evaluate(const TrainedModel& model, const FeatureMatrix& test);

std::string eval_report_json(const EvalReport& report);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

/// Forward/backward pass used by the mlp trainer and by gradient-check tests.
struct MlpGradients {
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> weight_grads;
  std::vector<Eigen::VectorXd> bias_grads;
};
MlpGradients mlp_loss_and_gradients(const MlpParams& params,
                                    const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& y01);
double mlp_loss(const MlpParams& params, const Eigen::MatrixXd& x,
                const Eigen::VectorXd& y01);

/// Hinge + L2 objective, used by the trainer and invariants tests.
double svm_objective(const Eigen::VectorXd& w, double b, double lambda,
                     const Eigen::MatrixXd& x, const Eigen::VectorXd& y_pm1);

namespace detail {
TrainedModel train_linear(const ModelSpec& spec, const Eigen::MatrixXd& x_std,
                          const Eigen::VectorXd& y);
TrainedModel train_forest(const ModelSpec& spec, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& y01);
TrainedModel train_gbt(const ModelSpec& spec, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y01);
TrainedModel train_mlp(const ModelSpec& spec, const Eigen::MatrixXd& x_std,
                       const Eigen::VectorXd& y01);
}  // namespace detail

}  // namespace stylo
