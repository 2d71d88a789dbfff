#pragma once

#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace sandinv::bo {

/// Squared-exponential hyperparameters, expressed on the standardized scale.
struct KernelHyper {
  double signal_variance = 1.0;
  double length_scale = 5.0;  // degrees
  double noise_variance = 1e-6;
};

/// signal_variance * exp(-(x - x2)^2 / (2 length_scale^2)).
double kernel(double x, double x2, const KernelHyper& hyper);

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// GP posterior over a 1-D input. Targets are standardized with the mean and
/// (population) standard deviation of the finite training values; non-finite
/// targets are replaced by a penalty above the worst finite one.
class GPModel {
 public:
  /// Standardized value assigned to non-finite targets: worst finite + this.
  static constexpr double kPenaltyMargin = 2.0;

  static GPModel fit(std::vector<double> xs, std::vector<double> ys, const KernelHyper& hyper);

  /// Posterior in the original units of y.
  Prediction predict(double x) const;
  /// Posterior on the standardized scale the kernel lives on.
  Prediction predict_standardized(double x) const;

  double standardize(double y) const { return (y - y_mean_) / y_scale_; }
  double unstandardize(double z) const { return z * y_scale_ + y_mean_; }

  const std::vector<double>& train_x() const { return xs_; }
  const std::vector<double>& train_y() const { return ys_; }
  const Eigen::VectorXd& standardized_targets() const { return z_; }
  const KernelHyper& hyper() const { return hyper_; }
  double y_mean() const { return y_mean_; }
  double y_scale() const { return y_scale_; }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
  KernelHyper hyper_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  Eigen::VectorXd z_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

inline GPModel gp_fit(std::vector<double> xs, std::vector<double> ys, const KernelHyper& hyper) {
  return GPModel::fit(std::move(xs), std::move(ys), hyper);
}
inline Prediction gp_predict(const GPModel& model, double x) { return model.predict(x); }

}  // namespace sandinv::bo
