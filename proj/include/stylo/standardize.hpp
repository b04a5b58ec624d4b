#pragma once

#include <Eigen/Core>

namespace stylo {

/// Per-column z-score transform with train-set statistics. Zero-variance
/// columns get scale 1 so they pass through centered.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& x) {
    Standardizer s;
    s.mean = x.colwise().mean();
    Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
    s.scale = (centered.array().square().colwise().sum() / double(x.rows()))
                  .sqrt()
                  .matrix();
    for (Eigen::Index j = 0; j < s.scale.size(); ++j)
      if (s.scale[j] == 0.0) s.scale[j] = 1.0;
    return s;
  }

  static Standardizer identity(Eigen::Index dim) {
    Standardizer s;
    s.mean = Eigen::VectorXd::Zero(dim);
    s.scale = Eigen::VectorXd::Ones(dim);
    return s;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean.transpose()).array().rowwise() /
           scale.transpose().array();
  }

  Eigen::MatrixXd invert(const Eigen::MatrixXd& z) const {
    return (z.array().rowwise() * scale.transpose().array()).matrix().rowwise() +
           mean.transpose();
  }
};

}  // namespace stylo
