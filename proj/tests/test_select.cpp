#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "stylo/error.hpp"
#include "stylo/learn.hpp"
#include "stylo/rng.hpp"
#include "stylo/select.hpp"
#include "test_util.hpp"

using namespace stylo;

namespace {

FeatureMatrix make_matrix(const Eigen::MatrixXd& x,
                          const std::vector<Label>& labels) {
  FeatureMatrix m;
  m.values = x;
  m.labels = labels;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    m.columns.push_back("f" + std::to_string(j));
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    m.ids.push_back("r" + std::to_string(i));
  return m;
}

std::vector<Label> alternating_labels(int n) {
  std::vector<Label> labels;
  for (int i = 0; i < n; ++i)
    labels.push_back(i % 2 ? Label::chatbot : Label::human);
  return labels;
}

// Cyclic Jacobi eigensolver for symmetric matrices; the independent oracle
// for PCA eigenpairs.
void jacobi_eigen(Eigen::MatrixXd a, Eigen::VectorXd& values,
                  Eigen::MatrixXd& vectors) {
  const Eigen::Index n = a.rows();
  vectors = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-24) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-30) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(n, n);
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        a = rot.transpose() * a * rot;
        vectors = vectors * rot;
      }
    }
  }
  values = a.diagonal();
}

}  // namespace

TEST_CASE("pca on collinear 3-D data") {
  Rng rng(5);
  Eigen::MatrixXd x(40, 3);
  for (int i = 0; i < 40; ++i) {
    double t = rng.gaussian();
    x(i, 0) = t;
    x(i, 1) = 2 * t;
    x(i, 2) = -t;
  }
  FeatureMatrix m = make_matrix(x, alternating_labels(40));
  Projection proj = pca_fit(m, 0.95);
  CHECK(proj.components.rows() == 1);
  CHECK(proj.explained_variance[0] ==
        doctest::Approx(proj.explained_variance.sum()));
}

TEST_CASE("pca eigenpairs match jacobi oracle on 4-feature fixture") {
  Rng rng(17);
  Eigen::MatrixXd x(12, 4);
  for (Eigen::Index i = 0; i < 12; ++i) {
    double base = rng.gaussian();
    x(i, 0) = base + 0.3 * rng.gaussian();
    x(i, 1) = -base + 0.5 * rng.gaussian();
    x(i, 2) = 2.0 * rng.gaussian();
    x(i, 3) = 0.5 * base + rng.gaussian();
  }
  FeatureMatrix m = make_matrix(x, alternating_labels(12));
  Projection proj = pca_fit(m, 1.0);
  REQUIRE(proj.components.rows() == 4);

  // Independent covariance + Jacobi solve.
  Eigen::MatrixXd z = proj.standardizer.apply(x);
  Eigen::MatrixXd centered = z.rowwise() - z.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / 11.0;
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  jacobi_eigen(cov, values, vectors);

  std::vector<int> order = {0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return values[a] > values[b]; });
  for (int k = 0; k < 4; ++k) {
    CHECK(proj.explained_variance[k] ==
          doctest::Approx(values[order[static_cast<std::size_t>(k)]])
              .epsilon(1e-8));
    double dot = std::abs(proj.components.row(k).dot(
        vectors.col(order[static_cast<std::size_t>(k)])));
    CHECK(dot == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("pca orthonormality, reconstruction, variance accounting") {
  Rng rng(23);
  Eigen::MatrixXd x(60, 6);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      x(i, j) = rng.gaussian() * double(j + 1) + (j == 2 ? x(i, 0) : 0.0);
  FeatureMatrix m = make_matrix(x, alternating_labels(60));
  Projection proj = pca_fit(m, 1.0);

  Eigen::MatrixXd gram = proj.components * proj.components.transpose();
  CHECK((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-8);

  // Full-rank reconstruction of the standardized data.
  Eigen::MatrixXd z = proj.standardizer.apply(x);
  FeatureMatrix reduced = pca_transform(proj, m);
  Eigen::MatrixXd rebuilt =
      (reduced.values * proj.components).rowwise() + proj.mean.transpose();
  CHECK((rebuilt - z).cwiseAbs().maxCoeff() <= 1e-6);

  // Explained variance is non-increasing and sums to the total variance.
  for (Eigen::Index k = 1; k < proj.explained_variance.size(); ++k)
    CHECK(proj.explained_variance[k] <= proj.explained_variance[k - 1] + 1e-12);
  Eigen::MatrixXd centered = z.rowwise() - z.colwise().mean();
  double total = (centered.array().square().colwise().sum() / 59.0).sum();
  CHECK(proj.explained_variance.sum() == doctest::Approx(total).epsilon(1e-6));

  // Deterministic transforms.
  FeatureMatrix again = pca_transform(proj, m);
  CHECK((again.values - reduced.values).cwiseAbs().maxCoeff() == 0.0);

  // Transforming the fitted mean vector lands on zero.
  FeatureMatrix mean_row = make_matrix(x.colwise().mean(), {Label::human});
  FeatureMatrix mapped = pca_transform(proj, mean_row);
  CHECK(mapped.values.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("pca isotropic gaussian spreads variance evenly") {
  Rng rng(31);
  const int d = 32, n = 4000;
  Eigen::MatrixXd x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.gaussian();
  FeatureMatrix m = make_matrix(x, alternating_labels(n));
  Projection proj = pca_fit(m, 1.0);
  double total = proj.explained_variance.sum();
  for (Eigen::Index k = 0; k < proj.explained_variance.size(); ++k) {
    CHECK(proj.explained_variance[k] / total >= 0.7 / d);
    CHECK(proj.explained_variance[k] / total <= 1.4 / d);
  }
}

TEST_CASE("pca degenerate input") {
  Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(5, 3, 2.0);
  FeatureMatrix m = make_matrix(constant, alternating_labels(5));
  CHECK_THROWS_AS(pca_fit(m, 0.95), DataError);
}

TEST_CASE("lda separates two gaussians") {
  Rng rng(41);
  Eigen::MatrixXd x(80, 2);
  std::vector<Label> labels;
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = -3.0 + 0.4 * rng.gaussian();
    x(i, 1) = 1.0 + 0.4 * rng.gaussian();
    labels.push_back(Label::human);
  }
  for (int i = 40; i < 80; ++i) {
    x(i, 0) = 3.0 + 0.4 * rng.gaussian();
    x(i, 1) = -1.0 + 0.4 * rng.gaussian();
    labels.push_back(Label::chatbot);
  }
  FeatureMatrix m = make_matrix(x, labels);
  Projection proj = lda_fit(m);
  CHECK(proj.components.rows() == 1);
  CHECK(proj.fisher_ratio > 1.0);

  FeatureMatrix projected = lda_transform(proj, m);
  double human_max = -1e30, human_min = 1e30;
  double bot_max = -1e30, bot_min = 1e30;
  for (Eigen::Index i = 0; i < projected.rows(); ++i) {
    double v = projected.values(i, 0);
    if (labels[static_cast<std::size_t>(i)] == Label::human) {
      human_max = std::max(human_max, v);
      human_min = std::min(human_min, v);
    } else {
      bot_max = std::max(bot_max, v);
      bot_min = std::min(bot_min, v);
    }
  }
  // Zero training errors with a threshold between the classes.
  CHECK((human_max < bot_min || bot_max < human_min));
}

TEST_CASE("lda with identical class means reports degeneracy") {
  Rng rng(43);
  Eigen::MatrixXd x(100, 2);
  for (Eigen::Index i = 0; i < 100; ++i) {
    x(i, 0) = rng.gaussian();
    x(i, 1) = rng.gaussian();
  }
  Eigen::MatrixXd both(200, 2);
  both << x, x;  // same rows for both classes -> identical means
  std::vector<Label> labels(100, Label::human);
  labels.insert(labels.end(), 100, Label::chatbot);
  FeatureMatrix m = make_matrix(both, labels);
  Projection proj = lda_fit(m);
  CHECK(proj.fisher_ratio == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("permutation importance") {
  // Feature 0 equals the label; features 1..4 are noise.
  Rng rng(51);
  const int n = 400;
  Eigen::MatrixXd x(n, 5);
  std::vector<Label> labels;
  for (int i = 0; i < n; ++i) {
    int y = i % 2;
    x(i, 0) = y;
    for (int j = 1; j < 5; ++j) x(i, j) = rng.gaussian();
    labels.push_back(y ? Label::chatbot : Label::human);
  }
  FeatureMatrix all = make_matrix(x, labels);
  FeatureMatrix fit_part = all, heldout = all;
  fit_part.values = x.topRows(200);
  fit_part.labels.assign(labels.begin(), labels.begin() + 200);
  fit_part.ids.assign(all.ids.begin(), all.ids.begin() + 200);
  heldout.values = x.bottomRows(200);
  heldout.labels.assign(labels.begin() + 200, labels.end());
  heldout.ids.assign(all.ids.begin() + 200, all.ids.end());

  ModelSpec spec = ModelSpec::defaults("random_forest", 3);
  spec.trees = 30;
  TrainedModel model = train(spec, fit_part);
  REQUIRE(evaluate(model, heldout).accuracy == doctest::Approx(1.0));

  SelectionReport report = permutation_importance(model, heldout, 20, 7, 3);
  CHECK(report.scores.front().first == "f0");      // perfect predictor first
  CHECK(report.scores.front().second > 0.2);
  for (const auto& [name, importance] : report.scores) {
    if (name != "f0") CHECK(std::abs(importance) <= 0.02);  // pure noise
  }
  CHECK(report.kept.size() == 3);
  CHECK(report.kept.front() == "f0");

  SUBCASE("trials=0 errors") {
    CHECK_THROWS_AS(permutation_importance(model, heldout, 0, 7), DataError);
  }

  SUBCASE("provably ignored feature has zero importance") {
    TrainedModel manual;
    manual.spec = ModelSpec::defaults("linear_svm", 1);
    manual.feature_schema = heldout.columns;
    manual.standardizer = Standardizer::identity(5);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(5);
    w[0] = 1.0;  // uses only f0; weight on every other feature exactly 0
    manual.params = LinearParams{w, -0.5};
    SelectionReport r = permutation_importance(manual, heldout, 20, 13);
    for (const auto& [name, importance] : r.scores) {
      if (name != "f0") CHECK(std::abs(importance) <= 0.01);
    }
  }
}

TEST_CASE("lasso path") {
  // Overlapping classes: finite optimum for the unregularized fit.
  Rng rng(61);
  const int n = 120;
  Eigen::MatrixXd x(n, 3);
  std::vector<Label> labels;
  for (int i = 0; i < n; ++i) {
    int y = i % 2;
    x(i, 0) = (y ? 0.8 : -0.8) + rng.gaussian();  // informative
    x(i, 1) = rng.gaussian();                     // noise
    x(i, 2) = rng.gaussian();                     // noise
    labels.push_back(y ? Label::chatbot : Label::human);
  }
  FeatureMatrix m = make_matrix(x, labels);

  SUBCASE("huge lambda zeroes everything") {
    LassoPath path = lasso_path(m, {100.0, 50.0});
    CHECK(path.nonzero_counts[0] == 0);
    CHECK(path.nonzero_counts[1] == 0);
    CHECK(path.coefficients.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("nonzero count non-increasing in lambda") {
    LassoPath path = lasso_path(m, default_lasso_lambdas());
    // Walk from small lambda to large: counts must not increase.
    for (std::size_t k = 1; k < path.lambdas.size(); ++k)
      CHECK(path.nonzero_counts[k - 1] <= path.nonzero_counts[k]);
  }

  SUBCASE("lambda zero matches the unregularized logistic fit") {
    LassoPath path = lasso_path(m, {0.01, 0.0});
    Eigen::VectorXd lasso_w = path.coefficients.col(1);
    double lasso_b = path.intercepts[1];

    ModelSpec spec = ModelSpec::defaults("logreg", 5);
    spec.batch_size = 0;  // full batch with backtracking
    spec.learning_rate = 4.0;
    spec.epochs = 20000;
    TrainedModel lr = train(spec, m);
    const auto& p = std::get<LinearParams>(lr.params);

    Eigen::VectorXd diff(4);
    diff << (lasso_w - p.weights), (lasso_b - p.bias);
    CHECK(diff.norm() < 1e-4);
  }

  SUBCASE("informative feature survives longer than noise") {
    LassoPath path = lasso_path(m, default_lasso_lambdas());
    // Largest lambda at which each feature is active (first index since
    // lambdas descend).
    auto first_active = [&](Eigen::Index f) {
      for (std::size_t k = 0; k < path.lambdas.size(); ++k)
        if (path.coefficients(f, static_cast<Eigen::Index>(k)) != 0.0) return k;
      return path.lambdas.size();
    };
    CHECK(first_active(0) < first_active(1));
    CHECK(first_active(0) < first_active(2));
  }

  SUBCASE("non-descending lambdas rejected") {
    CHECK_THROWS_AS(lasso_path(m, {0.1, 0.1}), DataError);
    CHECK_THROWS_AS(lasso_path(m, {0.1, 0.5}), DataError);
  }
}

TEST_CASE("lasso_select") {
  Rng rng(71);
  const int n = 200;
  Eigen::MatrixXd x(n, 6);
  std::vector<Label> labels;
  for (int i = 0; i < n; ++i) {
    int y = i % 2;
    x(i, 0) = (y ? 1.0 : -1.0) + 0.6 * rng.gaussian();
    x(i, 1) = (y ? 0.5 : -0.5) + 0.6 * rng.gaussian();
    for (int j = 2; j < 6; ++j) x(i, j) = rng.gaussian();
    labels.push_back(y ? Label::chatbot : Label::human);
  }
  FeatureMatrix m = make_matrix(x, labels);

  SelectionReport targeted = lasso_select(m, 2);
  CHECK(targeted.method == "lasso");
  CHECK(targeted.kept.size() >= 1);
  CHECK(std::find(targeted.kept.begin(), targeted.kept.end(), "f0") !=
        targeted.kept.end());

  SelectionReport plateau = lasso_select(m, std::nullopt, 3);
  CHECK(!plateau.kept.empty());
  CHECK(std::find(plateau.kept.begin(), plateau.kept.end(), "f0") !=
        plateau.kept.end());
  CHECK(plateau.scores.size() == 6);
}

TEST_CASE("projection save/load round trip") {
  Rng rng(81);
  Eigen::MatrixXd x(30, 4);
  for (Eigen::Index i = 0; i < 30; ++i)
    for (Eigen::Index j = 0; j < 4; ++j) x(i, j) = rng.gaussian() * double(j + 1);
  FeatureMatrix m = make_matrix(x, alternating_labels(30));
  auto dir = test::temp_dir("projection");

  Projection pca = pca_fit(m, 0.9);
  save_projection(pca, dir / "pca.json");
  Projection back = load_projection(dir / "pca.json");
  CHECK(back.feature_schema == pca.feature_schema);
  CHECK((back.components - pca.components).cwiseAbs().maxCoeff() == 0.0);
  FeatureMatrix t1 = pca_transform(pca, m);
  FeatureMatrix t2 = pca_transform(back, m);
  CHECK((t1.values - t2.values).cwiseAbs().maxCoeff() == 0.0);

  // Schema mismatch rejected.
  FeatureMatrix renamed = m;
  renamed.columns[0] = "other";
  CHECK_THROWS_AS(pca_transform(pca, renamed), DataError);
}
