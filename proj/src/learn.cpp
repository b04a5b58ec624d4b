#include "stylo/learn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stylo/error.hpp"

namespace stylo {

using nlohmann::json;

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::logreg: return "logreg";
    case ModelKind::linear_svm: return "linear_svm";
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::gbt: return "gbt";
    case ModelKind::mlp: return "mlp";
  }
  return "logreg";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "logreg") return ModelKind::logreg;
  if (name == "linear_svm") return ModelKind::linear_svm;
  if (name == "random_forest") return ModelKind::random_forest;
  if (name == "gbt") return ModelKind::gbt;
  if (name == "mlp" || name == "dnn") return ModelKind::mlp;
  throw DataError("unknown model kind: " + name);
}

ModelSpec ModelSpec::defaults(const std::string& kind_name, std::uint64_t seed) {
  ModelSpec spec;
  spec.kind = model_kind_from_string(kind_name);
  spec.seed = seed;
  switch (spec.kind) {
    case ModelKind::logreg:
      spec.learning_rate = 0.1;
      spec.epochs = 200;
      spec.batch_size = 64;
      break;
    case ModelKind::linear_svm:
      spec.svm_lambda = 1e-3;
      spec.epochs = 200;
      spec.batch_size = 64;
      break;
    case ModelKind::random_forest:
      spec.trees = 100;
      spec.max_depth = 12;
      break;
    case ModelKind::gbt:
      spec.trees = 100;
      spec.max_depth = 3;
      spec.shrinkage = 0.1;
      break;
    case ModelKind::mlp:
      spec.learning_rate = 0.05;
      spec.epochs = 200;
      spec.batch_size = 32;
      spec.hidden = kind_name == "dnn" ? std::vector<int>{128, 128, 128, 128}
                                       : std::vector<int>{64, 64};
      break;
  }
  return spec;
}

double Tree::predict(const Eigen::RowVectorXd& x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(node)];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

namespace {

void validate_training_data(const FeatureMatrix& data) {
  if (data.rows() == 0) throw DataError("training set is empty");
  bool has_human = false, has_chatbot = false;
  for (Label l : data.labels) (l == Label::human ? has_human : has_chatbot) = true;
  if (!has_human || !has_chatbot)
    throw DataError("training set contains a single class");
  if (!data.values.allFinite())
    throw DataError("training features contain NaN or Inf");
  Eigen::VectorXd mins = data.values.colwise().minCoeff();
  Eigen::VectorXd maxs = data.values.colwise().maxCoeff();
  if (((maxs - mins).array() == 0.0).all())
    throw DataError("every feature is constant; nothing to learn");
}

void check_schema(const TrainedModel& model, const FeatureMatrix& m) {
  if (model.feature_schema == m.columns) return;
  std::ostringstream msg;
  msg << "feature schema mismatch;";
  for (const std::string& c : model.feature_schema)
    if (std::find(m.columns.begin(), m.columns.end(), c) == m.columns.end())
      msg << " missing:" << c;
  for (const std::string& c : m.columns)
    if (std::find(model.feature_schema.begin(), model.feature_schema.end(), c) ==
        model.feature_schema.end())
      msg << " unexpected:" << c;
  if (model.feature_schema.size() == m.columns.size()) msg << " (column order differs)";
  throw DataError(msg.str());
}

double accuracy_of(const TrainedModel& model, const FeatureMatrix& data) {
  std::vector<Label> pred = predict(model, data);
  int correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == data.labels[i]) ++correct;
  return pred.empty() ? 0.0 : static_cast<double>(correct) / pred.size();
}

}  // namespace

TrainedModel train(const ModelSpec& spec, const FeatureMatrix& data) {
  validate_training_data(data);

  TrainedModel model;
  switch (spec.kind) {
    case ModelKind::logreg:
    case ModelKind::linear_svm: {
      Standardizer std = Standardizer::fit(data.values);
      model = detail::train_linear(spec, std.apply(data.values), data.labels01());
      model.standardizer = std;
      break;
    }
    case ModelKind::random_forest: {
      model = detail::train_forest(spec, data.values, data.labels01());
      model.standardizer = Standardizer::identity(data.cols());
      break;
    }
    case ModelKind::gbt: {
      model = detail::train_gbt(spec, data.values, data.labels01());
      model.standardizer = Standardizer::identity(data.cols());
      break;
    }
    case ModelKind::mlp: {
      Standardizer std = Standardizer::fit(data.values);
      model = detail::train_mlp(spec, std.apply(data.values), data.labels01());
      model.standardizer = std;
      break;
    }
  }
  model.spec = spec;
  model.feature_schema = data.columns;
  model.train_accuracy = accuracy_of(model, data);
  return model;
}

Eigen::VectorXd predict_score(const TrainedModel& model, const FeatureMatrix& m) {
  check_schema(model, m);
  if (!m.values.allFinite()) throw DataError("prediction features contain NaN or Inf");
  const Eigen::Index n = m.rows();
  Eigen::VectorXd scores(n);
  if (n == 0) return scores;

  if (std::holds_alternative<LinearParams>(model.params)) {
    const auto& p = std::get<LinearParams>(model.params);
    Eigen::MatrixXd z = model.standardizer.apply(m.values);
    scores = (z * p.weights).array() + p.bias;
  } else if (std::holds_alternative<ForestParams>(model.params)) {
    const auto& p = std::get<ForestParams>(model.params);
    for (Eigen::Index i = 0; i < n; ++i) {
      int votes = 0;
      for (const Tree& t : p.trees)
        if (t.predict(m.values.row(i)) >= 0.5) ++votes;
      scores[i] = static_cast<double>(votes) / static_cast<double>(p.trees.size());
    }
  } else if (std::holds_alternative<GbtParams>(model.params)) {
    const auto& p = std::get<GbtParams>(model.params);
    for (Eigen::Index i = 0; i < n; ++i) {
      double f = p.base_score;
      for (const Tree& t : p.trees) f += p.shrinkage * t.predict(m.values.row(i));
      scores[i] = f;
    }
  } else {
    const auto& p = std::get<MlpParams>(model.params);
    Eigen::MatrixXd a = model.standardizer.apply(m.values);
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      Eigen::MatrixXd z =
          (a * p.weights[l].transpose()).rowwise() + p.biases[l].transpose();
      if (l + 1 < p.weights.size())
        a = z.array().max(0.0);
      else
        a = (1.0 / (1.0 + (-z.array()).exp()));
    }
    scores = a.col(0);
  }
  return scores;
}

std::vector<Label> predict(const TrainedModel& model, const FeatureMatrix& m) {
  Eigen::VectorXd scores = predict_score(model, m);
  bool probability = std::holds_alternative<ForestParams>(model.params) ||
                     std::holds_alternative<MlpParams>(model.params);
  double cut = probability ? 0.5 : 0.0;
  std::vector<Label> labels(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    labels[static_cast<std::size_t>(i)] =
        scores[i] >= cut ? Label::chatbot : Label::human;
  return labels;
}

EvalReport evaluate(const TrainedModel& model, const FeatureMatrix& test) {
  if (test.rows() == 0) throw DataError("test set is empty");
  std::vector<Label> pred = predict(model, test);
  EvalReport report;
  report.n = static_cast<int>(test.rows());
  int correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    int actual = static_cast<int>(test.labels[i]);
    int predicted = static_cast<int>(pred[i]);
    report.confusion[actual][predicted] += 1;
    if (actual == predicted) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / report.n;
  return report;
}

std::string eval_report_json(const EvalReport& report) {
  return json{{"accuracy", report.accuracy},
              {"n", report.n},
              {"confusion",
               {{"human", {{"human", report.confusion[0][0]},
                           {"chatbot", report.confusion[0][1]}}},
                {"chatbot", {{"human", report.confusion[1][0]},
                             {"chatbot", report.confusion[1][1]}}}}}}
      .dump(2);
}

}  // namespace stylo
