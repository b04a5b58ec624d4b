#include "stylo/ablate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stylo/error.hpp"

namespace stylo {

using nlohmann::json;

namespace {

Eigen::Index column_of(const FeatureMatrix& m, const std::string& feature) {
  auto it = std::find(m.columns.begin(), m.columns.end(), feature);
  if (it == m.columns.end())
    throw DataError("unknown feature: " + feature);
  return static_cast<Eigen::Index>(it - m.columns.begin());
}

bool row_targeted(Label label, Perturbation::Target target) {
  switch (target) {
    case Perturbation::Target::chatbot: return label == Label::chatbot;
    case Perturbation::Target::human: return label == Label::human;
    case Perturbation::Target::both: return true;
  }
  return false;
}

std::string format_delta(double delta) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+g%%", delta * 100.0);
  return buf;
}

}  // namespace

Perturbation::Target perturbation_target_from_string(const std::string& name) {
  if (name == "chatbot") return Perturbation::Target::chatbot;
  if (name == "human") return Perturbation::Target::human;
  if (name == "both") return Perturbation::Target::both;
  throw DataError("unknown perturbation target: " + name);
}

FeatureMatrix perturb(const FeatureMatrix& m, const Perturbation& p) {
  if (p.delta <= -1.0) throw DataError("perturbation delta must be > -1");
  Eigen::Index col = column_of(m, p.feature);
  FeatureMatrix out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    if (row_targeted(out.labels[static_cast<std::size_t>(i)], p.target))
      out.values(i, col) *= (1.0 + p.delta);
  }
  return out;
}

AblationReport ablation_eval(const TrainedModel& model, const FeatureMatrix& test,
                             const std::vector<std::string>& features,
                             const std::vector<double>& deltas,
                             Perturbation::Target target) {
  AblationReport report;
  report.baseline_accuracy = evaluate(model, test).accuracy;
  report.features = features;
  report.deltas = deltas;
  report.target = target;
  report.accuracy.resize(static_cast<Eigen::Index>(features.size()),
                         static_cast<Eigen::Index>(deltas.size()));
  for (std::size_t f = 0; f < features.size(); ++f) {
    for (std::size_t d = 0; d < deltas.size(); ++d) {
      Perturbation p{features[f], deltas[d], target,
                     Perturbation::Phase::test_only};
      report.accuracy(static_cast<Eigen::Index>(f),
                      static_cast<Eigen::Index>(d)) =
          evaluate(model, perturb(test, p)).accuracy;
    }
  }
  return report;
}

EvalReport ablation_retrain(const ModelSpec& spec, const FeatureMatrix& train_m,
                            const FeatureMatrix& test_m, const Perturbation& p) {
  Perturbation applied = p;
  applied.phase = Perturbation::Phase::train_and_test;
  TrainedModel model = train(spec, perturb(train_m, applied));
  return evaluate(model, perturb(test_m, applied));
}

std::vector<double> default_sweep_deltas() {
  std::vector<double> deltas;
  for (int k = -10; k <= 10; ++k) deltas.push_back(k / 100.0);
  return deltas;
}

SweepCurve svm_weight_sweep(const TrainedModel& model, const FeatureMatrix& test,
                            const std::string& feature,
                            const std::vector<double>& deltas) {
  if (model.spec.kind != ModelKind::linear_svm)
    throw DataError("weight sweep requires a linear_svm model");
  auto schema_it = std::find(model.feature_schema.begin(),
                             model.feature_schema.end(), feature);
  if (schema_it == model.feature_schema.end())
    throw DataError("unknown feature: " + feature);
  Eigen::Index col =
      static_cast<Eigen::Index>(schema_it - model.feature_schema.begin());

  SweepCurve curve;
  curve.feature = feature;
  curve.deltas = deltas;
  curve.baseline_accuracy = evaluate(model, test).accuracy;
  TrainedModel scaled = model;  // model restored by working on a copy
  const double original = std::get<LinearParams>(model.params).weights[col];
  for (double delta : deltas) {
    std::get<LinearParams>(scaled.params).weights[col] = original * (1.0 + delta);
    curve.accuracy.push_back(evaluate(scaled, test).accuracy);
  }
  return curve;
}

void save_ablation_csv(const AblationReport& report,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write ablation file: " + path.string());
  out << "feature";
  for (double d : report.deltas) out << ',' << format_delta(d);
  out << "\nbaseline";
  for (std::size_t d = 0; d < report.deltas.size(); ++d) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", report.baseline_accuracy);
    out << ',' << buf;
  }
  out << '\n';
  for (std::size_t f = 0; f < report.features.size(); ++f) {
    out << report.features[f];
    for (std::size_t d = 0; d < report.deltas.size(); ++d) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6f",
                    report.accuracy(static_cast<Eigen::Index>(f),
                                    static_cast<Eigen::Index>(d)));
      out << ',' << buf;
    }
    out << '\n';
  }
}

std::string ablation_report_json(const AblationReport& report,
                                 std::uint64_t seed) {
  const char* target = report.target == Perturbation::Target::chatbot ? "chatbot"
                       : report.target == Perturbation::Target::human ? "human"
                                                                      : "both";
  json rows = json::array();
  for (std::size_t f = 0; f < report.features.size(); ++f) {
    json cells = json::object();
    for (std::size_t d = 0; d < report.deltas.size(); ++d)
      cells[format_delta(report.deltas[d])] =
          report.accuracy(static_cast<Eigen::Index>(f),
                          static_cast<Eigen::Index>(d));
    rows.push_back(json{{"feature", report.features[f]}, {"accuracy", cells}});
  }
  return json{{"baseline_accuracy", report.baseline_accuracy},
              {"target_class", target},
              {"deltas", report.deltas},
              {"seed", seed},
              {"rows", rows}}
      .dump(2);
}

void save_sweep_csv(const SweepCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write sweep file: " + path.string());
  out << "delta,accuracy\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.deltas.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.2f,%.6f", curve.deltas[i],
                  curve.accuracy[i]);
    out << buf << '\n';
  }
}

}  // namespace stylo
