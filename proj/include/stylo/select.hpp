#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "stylo/features.hpp"
#include "stylo/learn.hpp"
#include "stylo/standardize.hpp"

namespace stylo {

/// Linear feature-space reduction fitted on training data. PCA and LDA both
/// standardize internally (z-score with fit-set statistics, kept in
/// `standardizer`); transform maps x to ((x - mean)/scale) * components^T.
struct Projection {
  enum class Kind { pca, lda };
  Kind kind = Kind::pca;
  Standardizer standardizer;         // fit-set column stats
  Eigen::VectorXd mean;              // post-standardization column means
  Eigen::MatrixXd components;        // k x d, orthonormal rows for pca
  Eigen::VectorXd explained_variance;  // pca only, descending
  double fisher_ratio = 0.0;           // lda only
  std::vector<std::string> feature_schema;
};

struct SelectionReport {
  std::string method;  // none | pca | lda | rf | lasso
  std::vector<std::string> kept;
  std::vector<std::pair<std::string, double>> scores;  // per-feature
};

/// Principal components of the standardized fit data; keeps the smallest
/// component count whose cumulative explained variance reaches the target.
Projection pca_fit(const FeatureMatrix& m, double variance_target = 0.95);
FeatureMatrix pca_transform(const Projection& proj, const FeatureMatrix& m);

/// Binary Fisher discriminant; within-class scatter is ridge-regularized
/// with eps = 1e-6 * trace / d when singular.
Projection lda_fit(const FeatureMatrix& m);
FeatureMatrix lda_transform(const Projection& proj, const FeatureMatrix& m);

/// Permutation importance on held-out rows: baseline accuracy minus the mean
/// accuracy over `trials` seeded shuffles of each feature column. The top
/// `top_k` features by importance are marked kept.
SelectionReport permutation_importance(const TrainedModel& model,
                                       const FeatureMatrix& heldout, int trials,
                                       std::uint64_t seed, int top_k = 15);

/// L1-regularized logistic regression solved by proximal gradient descent
/// with soft-thresholding, warm-started along a descending lambda path.
/// Coefficients live in standardized feature space; the intercept is
/// unpenalized.
struct LassoPath {
  std::vector<double> lambdas;       // descending
  Eigen::MatrixXd coefficients;      // d x L, column per lambda
  Eigen::VectorXd intercepts;        // L
  std::vector<int> nonzero_counts;   // per lambda
};

LassoPath lasso_path(const FeatureMatrix& m, const std::vector<double>& lambdas);

/// Default lambda grid for lasso_select, descending, ending at 0.
std::vector<double> default_lasso_lambdas();

/// Picks the lambda whose nonzero count is closest to `target_nonzero`;
/// without a target, picks the smallest lambda on the validation-accuracy
/// plateau (within 0.005 of the best). Nonzero-coefficient features are kept.
SelectionReport lasso_select(const FeatureMatrix& m,
                             std::optional<int> target_nonzero = std::nullopt,
                             std::uint64_t seed = 0);

std::string selection_report_json(const SelectionReport& report);

void save_projection(const Projection& proj, const std::filesystem::path& path);
Projection load_projection(const std::filesystem::path& path);

}  // namespace stylo
