#include "stylo/select.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "stylo/error.hpp"
#include "stylo/rng.hpp"
#include "stylo/version.hpp"

namespace stylo {

using nlohmann::json;

namespace {

// Largest-magnitude entry of each component made positive so projections are
// reproducible across eigensolvers.
void orient_rows(Eigen::MatrixXd& components) {
  for (Eigen::Index r = 0; r < components.rows(); ++r) {
    Eigen::Index argmax = 0;
    components.row(r).cwiseAbs().maxCoeff(&argmax);
    if (components(r, argmax) < 0) components.row(r) = -components.row(r);
  }
}

void check_schema(const Projection& proj, const FeatureMatrix& m) {
  if (proj.feature_schema != m.columns)
    throw DataError("projection fitted on a different feature schema");
}

FeatureMatrix project(const Projection& proj, const FeatureMatrix& m,
                      const std::string& prefix) {
  check_schema(proj, m);
  Eigen::MatrixXd z = proj.standardizer.apply(m.values);
  FeatureMatrix out;
  out.values = (z.rowwise() - proj.mean.transpose()) * proj.components.transpose();
  for (Eigen::Index k = 0; k < proj.components.rows(); ++k)
    out.columns.push_back(prefix + std::to_string(k));
  out.labels = m.labels;
  out.ids = m.ids;
  return out;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Spectral-norm squared of z via power iteration on z^T z; deterministic.
double lipschitz_constant(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd gram = z.transpose() * z;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(gram.cols()).normalized();
  double eig = 0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd w = gram * v;
    double norm = w.norm();
    if (norm == 0) return 0;
    v = w / norm;
    eig = norm;
  }
  return eig / (4.0 * static_cast<double>(z.rows()));
}

struct LassoFit {
  Eigen::VectorXd w;
  double b = 0;
};

// FISTA with soft-thresholding on the mean logistic loss; the intercept is
// unpenalized. Warm-started from `init`.
LassoFit lasso_solve(const Eigen::MatrixXd& z, const Eigen::VectorXd& y01,
                     double lambda, const LassoFit& init, double step) {
  const Eigen::Index n = z.rows(), d = z.cols();
  LassoFit cur = init;
  LassoFit prev = cur;
  double momentum = 1.0;
  Eigen::VectorXd look_w = cur.w;
  double look_b = cur.b;

  for (int iter = 0; iter < 20000; ++iter) {
    Eigen::VectorXd p = (z * look_w).array() + look_b;
    for (Eigen::Index i = 0; i < n; ++i) p[i] = sigmoid(p[i]);
    Eigen::VectorXd resid = p - y01;
    Eigen::VectorXd grad_w = z.transpose() * resid / static_cast<double>(n);
    double grad_b = resid.mean();

    prev = cur;
    Eigen::VectorXd u = look_w - step * grad_w;
    for (Eigen::Index j = 0; j < d; ++j) {
      double t = std::abs(u[j]) - step * lambda;
      cur.w[j] = t > 0 ? (u[j] > 0 ? t : -t) : 0.0;
    }
    cur.b = look_b - step * grad_b;

    double m_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    double gamma = (momentum - 1.0) / m_next;
    look_w = cur.w + gamma * (cur.w - prev.w);
    look_b = cur.b + gamma * (cur.b - prev.b);
    momentum = m_next;

    double delta = (cur.w - prev.w).cwiseAbs().maxCoeff();
    delta = std::max(delta, std::abs(cur.b - prev.b));
    if (delta < 1e-10) break;
  }
  return cur;
}

LassoPath fit_path(const Eigen::MatrixXd& z, const Eigen::VectorXd& y01,
                   const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw DataError("lambda list is empty");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (lambdas[i] >= lambdas[i - 1])
      throw DataError("lambda list must be strictly descending");

  LassoPath path;
  path.lambdas = lambdas;
  path.coefficients.resize(z.cols(), static_cast<Eigen::Index>(lambdas.size()));
  path.intercepts.resize(static_cast<Eigen::Index>(lambdas.size()));

  double step = 1.0 / std::max(lipschitz_constant(z), 1e-12);
  LassoFit fit{Eigen::VectorXd::Zero(z.cols()), 0.0};
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    fit = lasso_solve(z, y01, lambdas[k], fit, step);
    path.coefficients.col(static_cast<Eigen::Index>(k)) = fit.w;
    path.intercepts[static_cast<Eigen::Index>(k)] = fit.b;
    int nz = 0;
    for (Eigen::Index j = 0; j < fit.w.size(); ++j)
      if (fit.w[j] != 0.0) ++nz;
    path.nonzero_counts.push_back(nz);
  }
  return path;
}

}  // namespace

Projection pca_fit(const FeatureMatrix& m, double variance_target) {
  if (m.rows() < 2) throw DataError("pca needs at least 2 rows");
  if (variance_target <= 0.0 || variance_target > 1.0)
    throw DataError("variance target must lie in (0, 1]");

  Projection proj;
  proj.kind = Projection::Kind::pca;
  proj.standardizer = Standardizer::fit(m.values);
  proj.feature_schema = m.columns;

  Eigen::MatrixXd z = proj.standardizer.apply(m.values);
  proj.mean = z.colwise().mean();
  Eigen::MatrixXd centered = z.rowwise() - proj.mean.transpose();
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(m.rows() - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw DataError("pca eigendecomposition failed");
  Eigen::VectorXd evals = solver.eigenvalues().reverse();
  Eigen::MatrixXd evecs = solver.eigenvectors().rowwise().reverse().transpose();
  for (Eigen::Index i = 0; i < evals.size(); ++i)
    evals[i] = std::max(evals[i], 0.0);

  double total = evals.sum();
  if (total <= 0.0)
    throw DataError("degenerate covariance: all features constant");

  Eigen::Index k = evals.size();
  if (variance_target < 1.0) {
    double cumulative = 0.0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
      cumulative += evals[i];
      if (cumulative / total >= variance_target) {
        k = i + 1;
        break;
      }
    }
  }
  proj.components = evecs.topRows(k);
  orient_rows(proj.components);
  proj.explained_variance = evals.head(k);
  return proj;
}

FeatureMatrix pca_transform(const Projection& proj, const FeatureMatrix& m) {
  if (proj.kind != Projection::Kind::pca)
    throw DataError("projection is not a pca projection");
  return project(proj, m, "pc");
}

Projection lda_fit(const FeatureMatrix& m) {
  if (m.rows() < 2) throw DataError("lda needs at least 2 rows");
  Projection proj;
  proj.kind = Projection::Kind::lda;
  proj.standardizer = Standardizer::fit(m.values);
  proj.feature_schema = m.columns;

  Eigen::MatrixXd z = proj.standardizer.apply(m.values);
  proj.mean = z.colwise().mean();

  const Eigen::Index d = z.cols();
  Eigen::VectorXd mean0 = Eigen::VectorXd::Zero(d), mean1 = Eigen::VectorXd::Zero(d);
  Eigen::Index n0 = 0, n1 = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (m.labels[static_cast<std::size_t>(i)] == Label::human) {
      mean0 += z.row(i).transpose();
      ++n0;
    } else {
      mean1 += z.row(i).transpose();
      ++n1;
    }
  }
  if (n0 == 0 || n1 == 0) throw DataError("lda needs both classes present");
  mean0 /= static_cast<double>(n0);
  mean1 /= static_cast<double>(n1);

  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const Eigen::VectorXd& mu =
        m.labels[static_cast<std::size_t>(i)] == Label::human ? mean0 : mean1;
    Eigen::VectorXd diff = z.row(i).transpose() - mu;
    sw += diff * diff.transpose();
  }
  double eps = 1e-6 * std::max(sw.trace(), 1.0) / static_cast<double>(d);
  sw += eps * Eigen::MatrixXd::Identity(d, d);

  Eigen::VectorXd direction = sw.ldlt().solve(mean1 - mean0);
  double norm = direction.norm();
  if (norm > 0) direction /= norm;

  proj.components = direction.transpose();
  orient_rows(proj.components);
  direction = proj.components.row(0).transpose();

  double between = std::pow(direction.dot(mean1 - mean0), 2.0);
  double within = direction.dot(sw * direction);
  proj.fisher_ratio = within > 0 ? between / within : 0.0;
  return proj;
}

FeatureMatrix lda_transform(const Projection& proj, const FeatureMatrix& m) {
  if (proj.kind != Projection::Kind::lda)
    throw DataError("projection is not an lda projection");
  return project(proj, m, "ld");
}

SelectionReport permutation_importance(const TrainedModel& model,
                                       const FeatureMatrix& heldout, int trials,
                                       std::uint64_t seed, int top_k) {
  if (trials < 1) throw DataError("permutation importance needs trials >= 1");
  if (heldout.rows() < 1) throw DataError("held-out set is empty");

  double baseline = evaluate(model, heldout).accuracy;
  const Eigen::Index d = heldout.cols();

  std::vector<std::pair<std::string, double>> scores;
  FeatureMatrix shuffled = heldout;
  for (Eigen::Index f = 0; f < d; ++f) {
    double acc_sum = 0;
    for (int t = 0; t < trials; ++t) {
      Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(f) * 1000003ULL +
                                    static_cast<std::uint64_t>(t)));
      std::vector<Eigen::Index> perm(static_cast<std::size_t>(heldout.rows()));
      for (Eigen::Index i = 0; i < heldout.rows(); ++i)
        perm[static_cast<std::size_t>(i)] = i;
      rng.shuffle(perm);
      for (Eigen::Index i = 0; i < heldout.rows(); ++i)
        shuffled.values(i, f) =
            heldout.values(perm[static_cast<std::size_t>(i)], f);
      acc_sum += evaluate(model, shuffled).accuracy;
    }
    shuffled.values.col(f) = heldout.values.col(f);
    scores.emplace_back(heldout.columns[static_cast<std::size_t>(f)],
                        baseline - acc_sum / trials);
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a].second > scores[b].second;
  });

  SelectionReport report;
  report.method = "rf";
  for (std::size_t r : order) report.scores.push_back(scores[r]);
  for (std::size_t i = 0; i < order.size() && i < static_cast<std::size_t>(top_k);
       ++i)
    report.kept.push_back(scores[order[i]].first);
  return report;
}

LassoPath lasso_path(const FeatureMatrix& m, const std::vector<double>& lambdas) {
  if (m.rows() < 2) throw DataError("lasso needs at least 2 rows");
  Standardizer std = Standardizer::fit(m.values);
  return fit_path(std.apply(m.values), m.labels01(), lambdas);
}

std::vector<double> default_lasso_lambdas() {
  return {0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 0.0};
}

SelectionReport lasso_select(const FeatureMatrix& m,
                             std::optional<int> target_nonzero,
                             std::uint64_t seed) {
  std::vector<double> lambdas = default_lasso_lambdas();
  LassoPath full = lasso_path(m, lambdas);

  std::size_t chosen = 0;
  if (target_nonzero.has_value()) {
    int best_gap = std::numeric_limits<int>::max();
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      int gap = std::abs(full.nonzero_counts[k] - *target_nonzero);
      if (gap < best_gap) {
        best_gap = gap;
        chosen = k;
      }
    }
  } else {
    // Deterministic 80/20 validation split; accuracy plateau within 0.005 of
    // the best, smallest lambda on the plateau.
    Rng rng(seed);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(m.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    Eigen::Index n_train = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::llround(0.8 * double(m.rows()))));
    n_train = std::min(n_train, m.rows() - 1);

    FeatureMatrix train, val;
    train.columns = val.columns = m.columns;
    train.values.resize(n_train, m.cols());
    val.values.resize(m.rows() - n_train, m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      Eigen::Index src = idx[static_cast<std::size_t>(i)];
      if (i < n_train) {
        train.values.row(i) = m.values.row(src);
        train.labels.push_back(m.labels[static_cast<std::size_t>(src)]);
        train.ids.push_back(m.ids[static_cast<std::size_t>(src)]);
      } else {
        val.values.row(i - n_train) = m.values.row(src);
        val.labels.push_back(m.labels[static_cast<std::size_t>(src)]);
        val.ids.push_back(m.ids[static_cast<std::size_t>(src)]);
      }
    }

    Standardizer std = Standardizer::fit(train.values);
    LassoPath vp = fit_path(std.apply(train.values), train.labels01(), lambdas);
    Eigen::MatrixXd zval = std.apply(val.values);
    Eigen::VectorXd yval = val.labels01();

    std::vector<double> accuracy(lambdas.size());
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      Eigen::VectorXd score =
          (zval * vp.coefficients.col(static_cast<Eigen::Index>(k))).array() +
          vp.intercepts[static_cast<Eigen::Index>(k)];
      int correct = 0;
      for (Eigen::Index i = 0; i < score.size(); ++i) {
        double predicted = score[i] >= 0 ? 1.0 : 0.0;
        if (predicted == yval[i]) ++correct;
      }
      accuracy[k] = static_cast<double>(correct) / double(score.size());
    }
    double best = *std::max_element(accuracy.begin(), accuracy.end());
    chosen = 0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      if (accuracy[k] >= best - 0.005) chosen = k;  // lambdas descend
    }
  }

  SelectionReport report;
  report.method = "lasso";
  Eigen::VectorXd coef = full.coefficients.col(static_cast<Eigen::Index>(chosen));
  for (Eigen::Index j = 0; j < coef.size(); ++j) {
    report.scores.emplace_back(m.columns[static_cast<std::size_t>(j)], coef[j]);
    if (coef[j] != 0.0)
      report.kept.push_back(m.columns[static_cast<std::size_t>(j)]);
  }
  return report;
}

std::string selection_report_json(const SelectionReport& report) {
  json scores = json::array();
  for (const auto& [name, score] : report.scores)
    scores.push_back(json{{"feature", name}, {"score", score}});
  return json{{"method", report.method},
              {"kept", report.kept},
              {"scores", scores}}
      .dump(2);
}

namespace {

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

}  // namespace

void save_projection(const Projection& proj, const std::filesystem::path& path) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < proj.components.rows(); ++r)
    rows.push_back(vec_json(proj.components.row(r).transpose()));
  json j{{"schema_version", kProjectionSchemaVersion},
         {"kind", proj.kind == Projection::Kind::pca ? "pca" : "lda"},
         {"standardizer",
          {{"mean", vec_json(proj.standardizer.mean)},
           {"scale", vec_json(proj.standardizer.scale)}}},
         {"mean", vec_json(proj.mean)},
         {"components", rows},
         {"explained_variance", vec_json(proj.explained_variance)},
         {"fisher_ratio", proj.fisher_ratio},
         {"feature_schema", proj.feature_schema}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write projection file: " + path.string());
  out << j.dump(2) << '\n';
}

Projection load_projection(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open projection file: " + path.string());
  json j;
  try {
    in >> j;
    Projection proj;
    proj.kind = j.at("kind").get<std::string>() == "pca" ? Projection::Kind::pca
                                                         : Projection::Kind::lda;
    proj.standardizer.mean = vec_from(j.at("standardizer").at("mean"));
    proj.standardizer.scale = vec_from(j.at("standardizer").at("scale"));
    proj.mean = vec_from(j.at("mean"));
    const json& rows = j.at("components");
    proj.components.resize(static_cast<Eigen::Index>(rows.size()),
                           proj.mean.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      proj.components.row(static_cast<Eigen::Index>(r)) =
          vec_from(rows[r]).transpose();
    proj.explained_variance = vec_from(j.at("explained_variance"));
    proj.fisher_ratio = j.at("fisher_ratio").get<double>();
    proj.feature_schema = j.at("feature_schema").get<std::vector<std::string>>();
    return proj;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad projection JSON: ") + e.what());
  }
}

}  // namespace stylo
