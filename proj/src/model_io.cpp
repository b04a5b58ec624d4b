#include <fstream>

#include <nlohmann/json.hpp>

#include "stylo/error.hpp"
#include "stylo/learn.hpp"
#include "stylo/version.hpp"

namespace stylo {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) =
        vector_from_json(rows[i]).transpose();
  return m;
}

json tree_to_json(const Tree& t) {
  json nodes = json::array();
  for (const TreeNode& n : t.nodes) {
    nodes.push_back(json{{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value}});
  }
  return nodes;
}

Tree tree_from_json(const json& nodes) {
  Tree t;
  for (const json& n : nodes) {
    t.nodes.push_back(TreeNode{n.at("feature").get<int>(),
                               n.at("threshold").get<double>(),
                               n.at("left").get<int>(),
                               n.at("right").get<int>(),
                               n.at("value").get<double>()});
  }
  return t;
}

json spec_to_json(const ModelSpec& s) {
  return json{{"kind", to_string(s.kind)},
              {"seed", s.seed},
              {"learning_rate", s.learning_rate},
              {"epochs", s.epochs},
              {"batch_size", s.batch_size},
              {"l2", s.l2},
              {"svm_lambda", s.svm_lambda},
              {"trees", s.trees},
              {"max_depth", s.max_depth},
              {"bootstrap", s.bootstrap},
              {"feature_subsample", s.feature_subsample},
              {"shrinkage", s.shrinkage},
              {"hidden", s.hidden}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  s.kind = model_kind_from_string(j.at("kind").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  s.learning_rate = j.at("learning_rate").get<double>();
  s.epochs = j.at("epochs").get<int>();
  s.batch_size = j.at("batch_size").get<int>();
  s.l2 = j.at("l2").get<double>();
  s.svm_lambda = j.at("svm_lambda").get<double>();
  s.trees = j.at("trees").get<int>();
  s.max_depth = j.at("max_depth").get<int>();
  s.bootstrap = j.at("bootstrap").get<bool>();
  s.feature_subsample = j.at("feature_subsample").get<bool>();
  s.shrinkage = j.at("shrinkage").get<double>();
  s.hidden = j.at("hidden").get<std::vector<int>>();
  return s;
}

}  // namespace

std::string model_to_json(const TrainedModel& model) {
  json j{{"schema_version", kModelSchemaVersion},
         {"spec", spec_to_json(model.spec)},
         {"feature_schema", model.feature_schema},
         {"standardizer",
          {{"mean", vector_to_json(model.standardizer.mean)},
           {"scale", vector_to_json(model.standardizer.scale)}}},
         {"training_loss", model.training_loss},
         {"train_accuracy", model.train_accuracy}};

  if (std::holds_alternative<LinearParams>(model.params)) {
    const auto& p = std::get<LinearParams>(model.params);
    j["params"] = {{"type", "linear"},
                   {"weights", vector_to_json(p.weights)},
                   {"bias", p.bias}};
  } else if (std::holds_alternative<ForestParams>(model.params)) {
    const auto& p = std::get<ForestParams>(model.params);
    json trees = json::array();
    for (const Tree& t : p.trees) trees.push_back(tree_to_json(t));
    j["params"] = {{"type", "forest"}, {"trees", trees}};
  } else if (std::holds_alternative<GbtParams>(model.params)) {
    const auto& p = std::get<GbtParams>(model.params);
    json trees = json::array();
    for (const Tree& t : p.trees) trees.push_back(tree_to_json(t));
    j["params"] = {{"type", "gbt"},
                   {"trees", trees},
                   {"base_score", p.base_score},
                   {"shrinkage", p.shrinkage}};
  } else {
    const auto& p = std::get<MlpParams>(model.params);
    json weights = json::array(), biases = json::array();
    for (const auto& w : p.weights) weights.push_back(matrix_to_json(w));
    for (const auto& b : p.biases) biases.push_back(vector_to_json(b));
    j["params"] = {{"type", "mlp"}, {"weights", weights}, {"biases", biases}};
  }
  return j.dump(2);
}

TrainedModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad model JSON: ") + e.what());
  }
  try {
    TrainedModel model;
    int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion)
      throw DataError("unsupported model schema version " +
                      std::to_string(version));
    model.spec = spec_from_json(j.at("spec"));
    model.feature_schema = j.at("feature_schema").get<std::vector<std::string>>();
    model.standardizer.mean = vector_from_json(j.at("standardizer").at("mean"));
    model.standardizer.scale = vector_from_json(j.at("standardizer").at("scale"));
    model.training_loss = j.at("training_loss").get<std::vector<double>>();
    model.train_accuracy = j.at("train_accuracy").get<double>();

    const json& p = j.at("params");
    std::string type = p.at("type").get<std::string>();
    if (type == "linear") {
      model.params = LinearParams{vector_from_json(p.at("weights")),
                                  p.at("bias").get<double>()};
    } else if (type == "forest") {
      ForestParams fp;
      for (const json& t : p.at("trees")) fp.trees.push_back(tree_from_json(t));
      model.params = std::move(fp);
    } else if (type == "gbt") {
      GbtParams gp;
      for (const json& t : p.at("trees")) gp.trees.push_back(tree_from_json(t));
      gp.base_score = p.at("base_score").get<double>();
      gp.shrinkage = p.at("shrinkage").get<double>();
      model.params = std::move(gp);
    } else if (type == "mlp") {
      MlpParams mp;
      for (const json& w : p.at("weights"))
        mp.weights.push_back(matrix_from_json(w));
      for (const json& b : p.at("biases"))
        mp.biases.push_back(vector_from_json(b));
      model.params = std::move(mp);
    } else {
      throw DataError("unknown params type: " + type);
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad model JSON: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file: " + path.string());
  out << model_to_json(model) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return model_from_json(text);
}

}  // namespace stylo
