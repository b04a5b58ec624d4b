#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stylo/features.hpp"
#include "stylo/learn.hpp"

namespace stylo {

/// One controlled feature modification: multiply the feature column of the
/// target-class rows by (1 + delta), in raw (pre-standardization) space.
struct Perturbation {
  std::string feature;
  double delta = 0.0;  // > -1
  enum class Target { chatbot, human, both };
  Target target = Target::chatbot;
  enum class Phase { test_only, train_and_test };
  Phase phase = Phase::test_only;
};

Perturbation::Target perturbation_target_from_string(const std::string& name);

/// Pure: returns a copy with the perturbation applied; non-target rows and
/// all other columns are bit-identical to the input.
FeatureMatrix perturb(const FeatureMatrix& m, const Perturbation& p);

struct AblationReport {
  double baseline_accuracy = 0.0;
  std::vector<std::string> features;
  std::vector<double> deltas;        // e.g. {+0.10, -0.10}
  Eigen::MatrixXd accuracy;          // features x deltas
  Perturbation::Target target = Perturbation::Target::chatbot;
};

/// Accuracy of a fixed model on per-(feature, delta) perturbed copies of the
/// test set, plus the unperturbed baseline.
AblationReport ablation_eval(const TrainedModel& model, const FeatureMatrix& test,
                             const std::vector<std::string>& features,
                             const std::vector<double>& deltas = {0.10, -0.10},
                             Perturbation::Target target =
                                 Perturbation::Target::chatbot);

/// Applies the perturbation to both partitions, retrains from the spec with
/// the same seed, and evaluates on the perturbed test split.
EvalReport ablation_retrain(const ModelSpec& spec, const FeatureMatrix& train,
                            const FeatureMatrix& test, const Perturbation& p);

struct SweepCurve {
  std::string feature;
  double baseline_accuracy = 0.0;
  std::vector<double> deltas;
  std::vector<double> accuracy;
};

/// Default sweep grid: -0.10 to +0.10 in steps of 0.01.
std::vector<double> default_sweep_deltas();

/// Scales the linear-SVM weight of one feature by (1 + delta) per grid point
/// and records accuracy on the unmodified test set. The model is not
/// mutated.
SweepCurve svm_weight_sweep(const TrainedModel& model, const FeatureMatrix& test,
                            const std::string& feature,
                            const std::vector<double>& deltas =
                                default_sweep_deltas());

/// CSV layout: feature, then one accuracy column per delta.
void save_ablation_csv(const AblationReport& report,
                       const std::filesystem::path& path);
/// Full provenance (target class, deltas, baseline) as JSON.
std::string ablation_report_json(const AblationReport& report,
                                 std::uint64_t seed);

void save_sweep_csv(const SweepCurve& curve, const std::filesystem::path& path);

}  // namespace stylo
