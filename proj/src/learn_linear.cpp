#include <cmath>
#include <vector>

#include "stylo/error.hpp"
#include "stylo/learn.hpp"
#include "stylo/rng.hpp"

namespace stylo {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {  // log(1 + e^z), stable
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

// Mean log-loss plus L2 penalty.
double logreg_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y01,
                   const Eigen::VectorXd& w, double b, double l2) {
  Eigen::VectorXd z = (x * w).array() + b;
  double loss = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    loss += softplus(z[i]) - y01[i] * z[i];
  loss /= static_cast<double>(z.size());
  return loss + 0.5 * l2 * w.squaredNorm();
}

std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  rng.shuffle(idx);
  return idx;
}

TrainedModel train_logreg(const ModelSpec& spec, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& y01) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0;
  Rng rng(spec.seed);
  const Eigen::Index batch =
      spec.batch_size <= 0 ? n : std::min<Eigen::Index>(spec.batch_size, n);
  const bool full_batch = batch == n;
  double lr = spec.learning_rate;

  TrainedModel model;
  model.training_loss.reserve(static_cast<std::size_t>(spec.epochs));
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    std::vector<Eigen::Index> idx = shuffled_indices(n, rng);
    for (Eigen::Index start = 0; start < n; start += batch) {
      Eigen::Index len = std::min(batch, n - start);
      Eigen::VectorXd gw = Eigen::VectorXd::Zero(d);
      double gb = 0;
      for (Eigen::Index k = 0; k < len; ++k) {
        Eigen::Index i = idx[static_cast<std::size_t>(start + k)];
        double err = sigmoid(x.row(i).dot(w) + b) - y01[i];
        gw += err * x.row(i).transpose();
        gb += err;
      }
      gw /= static_cast<double>(len);
      gb /= static_cast<double>(len);
      gw += spec.l2 * w;

      if (full_batch) {
        // Backtrack until the step does not increase the loss; keeps the
        // epoch loss log monotone.
        double before = logreg_loss(x, y01, w, b, spec.l2);
        double step = lr;
        for (int tries = 0; tries < 40; ++tries) {
          Eigen::VectorXd w2 = w - step * gw;
          double b2 = b - step * gb;
          if (logreg_loss(x, y01, w2, b2, spec.l2) <= before) {
            w = std::move(w2);
            b = b2;
            break;
          }
          step *= 0.5;
        }
      } else {
        w -= lr * gw;
        b -= lr * gb;
      }
    }
    model.training_loss.push_back(logreg_loss(x, y01, w, b, spec.l2));
  }
  model.params = LinearParams{std::move(w), b};
  return model;
}

TrainedModel train_svm(const ModelSpec& spec, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& y01) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::VectorXd y = (y01.array() * 2.0 - 1.0).matrix();  // +/-1
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0;
  Eigen::VectorXd best_w = w;
  double best_b = b;
  double best_obj = svm_objective(w, b, spec.svm_lambda, x, y);

  Rng rng(spec.seed);
  const Eigen::Index batch =
      spec.batch_size <= 0 ? n : std::min<Eigen::Index>(spec.batch_size, n);
  std::int64_t t = 0;

  TrainedModel model;
  model.training_loss.reserve(static_cast<std::size_t>(spec.epochs));
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    std::vector<Eigen::Index> idx = shuffled_indices(n, rng);
    for (Eigen::Index start = 0; start < n; start += batch) {
      Eigen::Index len = std::min(batch, n - start);
      ++t;
      double eta = 1.0 / (spec.svm_lambda * static_cast<double>(t));
      Eigen::VectorXd gw = spec.svm_lambda * w;
      double gb = 0;
      for (Eigen::Index k = 0; k < len; ++k) {
        Eigen::Index i = idx[static_cast<std::size_t>(start + k)];
        if (y[i] * (x.row(i).dot(w) + b) < 1.0) {
          gw -= (y[i] / static_cast<double>(len)) * x.row(i).transpose();
          gb -= y[i] / static_cast<double>(len);
        }
      }
      w -= eta * gw;
      b -= eta * gb;
    }
    double obj = svm_objective(w, b, spec.svm_lambda, x, y);
    model.training_loss.push_back(obj);
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
      best_b = b;
    }
  }
  model.params = LinearParams{std::move(best_w), best_b};
  return model;
}

}  // namespace

double svm_objective(const Eigen::VectorXd& w, double b, double lambda,
                     const Eigen::MatrixXd& x, const Eigen::VectorXd& y_pm1) {
  Eigen::VectorXd margins =
      (y_pm1.array() * ((x * w).array() + b)).matrix();
  double hinge = 0;
  for (Eigen::Index i = 0; i < margins.size(); ++i)
    hinge += std::max(0.0, 1.0 - margins[i]);
  hinge /= static_cast<double>(margins.size());
  return 0.5 * lambda * w.squaredNorm() + hinge;
}

namespace detail {

TrainedModel train_linear(const ModelSpec& spec, const Eigen::MatrixXd& x_std,
                          const Eigen::VectorXd& y) {
  return spec.kind == ModelKind::logreg ? train_logreg(spec, x_std, y)
                                        : train_svm(spec, x_std, y);
}

}  // namespace detail

}  // namespace stylo
