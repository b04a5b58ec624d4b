#include <cmath>
#include <vector>

#include "stylo/error.hpp"
#include "stylo/learn.hpp"
#include "stylo/rng.hpp"

namespace stylo {
namespace {

MlpParams init_network(Eigen::Index input_dim, const std::vector<int>& hidden,
                       std::uint64_t seed) {
  std::vector<Eigen::Index> sizes;
  sizes.push_back(input_dim);
  for (int h : hidden) {
    if (h < 1) throw DataError("hidden layer width must be >= 1");
    sizes.push_back(h);
  }
  sizes.push_back(1);

  MlpParams params;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Eigen::Index in = sizes[l], out = sizes[l + 1];
    bool output_layer = l + 2 == sizes.size();
    // He init for ReLU layers, Xavier for the sigmoid output.
    double sd = output_layer ? std::sqrt(1.0 / double(in))
                             : std::sqrt(2.0 / double(in));
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) w(r, c) = sd * rng.gaussian();
    params.weights.push_back(std::move(w));
    params.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return params;
}

}  // namespace

MlpGradients mlp_loss_and_gradients(const MlpParams& params,
                                    const Eigen::MatrixXd& x,
                                    const Eigen::VectorXd& y01) {
  const std::size_t layers = params.weights.size();
  const Eigen::Index n = x.rows();

  std::vector<Eigen::MatrixXd> activations;  // a[0] = x, a[l] post-activation
  std::vector<Eigen::MatrixXd> zs;           // pre-activation per layer
  activations.push_back(x);
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = (activations.back() * params.weights[l].transpose())
                            .rowwise() +
                        params.biases[l].transpose();
    zs.push_back(z);
    if (l + 1 < layers)
      activations.push_back(z.array().max(0.0).matrix());
    else
      activations.push_back((1.0 / (1.0 + (-z.array()).exp())).matrix());
  }

  const Eigen::VectorXd p = activations.back().col(0);
  double loss = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double pi = std::clamp(p[i], 1e-12, 1.0 - 1e-12);
    loss += -(y01[i] * std::log(pi) + (1.0 - y01[i]) * std::log(1.0 - pi));
  }
  loss /= static_cast<double>(n);

  MlpGradients grads;
  grads.loss = loss;
  grads.weight_grads.resize(layers);
  grads.bias_grads.resize(layers);

  // Sigmoid + BCE collapse to (p - y)/n at the output.
  Eigen::MatrixXd delta = (p - y01) / static_cast<double>(n);
  for (std::size_t l = layers; l-- > 0;) {
    grads.weight_grads[l] = delta.transpose() * activations[l];
    grads.bias_grads[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd relu_mask =
          (zs[l - 1].array() > 0.0).cast<double>().matrix();
      delta = (delta * params.weights[l]).cwiseProduct(relu_mask);
    }
  }
  return grads;
}

double mlp_loss(const MlpParams& params, const Eigen::MatrixXd& x,
                const Eigen::VectorXd& y01) {
  return mlp_loss_and_gradients(params, x, y01).loss;
}

namespace detail {

TrainedModel train_mlp(const ModelSpec& spec, const Eigen::MatrixXd& x_std,
                       const Eigen::VectorXd& y01) {
  const Eigen::Index n = x_std.rows();
  MlpParams params = init_network(x_std.cols(), spec.hidden, spec.seed);
  Rng rng(Rng::derive(spec.seed, 0x6D6C70));  // separate stream from init

  const Eigen::Index batch =
      spec.batch_size <= 0 ? n : std::min<Eigen::Index>(spec.batch_size, n);

  TrainedModel model;
  model.training_loss.reserve(static_cast<std::size_t>(spec.epochs));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;

  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    rng.shuffle(idx);
    for (Eigen::Index start = 0; start < n; start += batch) {
      Eigen::Index len = std::min(batch, n - start);
      Eigen::MatrixXd xb(len, x_std.cols());
      Eigen::VectorXd yb(len);
      for (Eigen::Index k = 0; k < len; ++k) {
        xb.row(k) = x_std.row(idx[static_cast<std::size_t>(start + k)]);
        yb[k] = y01[idx[static_cast<std::size_t>(start + k)]];
      }
      MlpGradients grads = mlp_loss_and_gradients(params, xb, yb);
      for (std::size_t l = 0; l < params.weights.size(); ++l) {
        params.weights[l] -= spec.learning_rate * grads.weight_grads[l];
        params.biases[l] -= spec.learning_rate * grads.bias_grads[l];
      }
    }
    model.training_loss.push_back(mlp_loss(params, x_std, y01));
  }
  model.params = std::move(params);
  return model;
}

}  // namespace detail
}  // namespace stylo
