#include "sandinv/bo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sandinv/common/error.hpp"

namespace sandinv::bo {

double kernel(double x, double x2, const KernelHyper& hyper) {
  const double d = x - x2;
  return hyper.signal_variance * std::exp(-d * d / (2.0 * hyper.length_scale * hyper.length_scale));
}

GPModel GPModel::fit(std::vector<double> xs, std::vector<double> ys, const KernelHyper& hyper) {
  if (xs.empty() || xs.size() != ys.size()) {
    throw InvalidArgument("gp_fit: need matching, non-empty xs and ys");
  }
  if (!(hyper.signal_variance > 0.0 && hyper.length_scale > 0.0 && hyper.noise_variance > 0.0)) {
    throw InvalidArgument("gp_fit: hyperparameters must be > 0");
  }
  GPModel m;
  m.xs_ = std::move(xs);
  m.ys_ = std::move(ys);
  m.hyper_ = hyper;
  const std::size_t n = m.xs_.size();

  double sum = 0.0;
  std::size_t finite = 0;
  for (double y : m.ys_) {
    if (std::isfinite(y)) {
      sum += y;
      ++finite;
    }
  }
  if (finite > 0) {
    m.y_mean_ = sum / finite;
    double ss = 0.0;
    for (double y : m.ys_) {
      if (std::isfinite(y)) ss += (y - m.y_mean_) * (y - m.y_mean_);
    }
    const double sd = std::sqrt(ss / finite);
    m.y_scale_ = sd > 0.0 ? sd : 1.0;
  }

  m.z_.resize(static_cast<Eigen::Index>(n));
  double worst = finite > 0 ? -std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(m.ys_[i])) {
      m.z_[i] = m.standardize(m.ys_[i]);
      worst = std::max(worst, m.z_[i]);
    }
  }
  const double penalty = finite > 0 ? worst + kPenaltyMargin : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(m.ys_[i])) m.z_[i] = penalty;
  }

  Eigen::MatrixXd k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k(i, j) = kernel(m.xs_[i], m.xs_[j], hyper);
    k(i, i) += hyper.noise_variance;
  }
  m.llt_.compute(k);
  if (m.llt_.info() != Eigen::Success) {
    throw Error("gp_fit: kernel matrix is not positive definite; increase noise_variance");
  }
  m.alpha_ = m.llt_.solve(m.z_);
  return m;
}

Prediction GPModel::predict_standardized(double x) const {
  const Eigen::Index n = static_cast<Eigen::Index>(xs_.size());
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks[i] = kernel(x, xs_[i], hyper_);
  Prediction p;
  p.mean = ks.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(ks);
  p.variance = std::max(0.0, hyper_.signal_variance - v.squaredNorm());
  return p;
}

Prediction GPModel::predict(double x) const {
  const Prediction z = predict_standardized(x);
  return {unstandardize(z.mean), z.variance * y_scale_ * y_scale_};
}

}  // namespace sandinv::bo
