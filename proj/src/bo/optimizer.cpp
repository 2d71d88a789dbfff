#include "sandinv/bo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sandinv/common/rng.hpp"
#include "sandinv/common/text.hpp"

namespace sandinv::bo {

double expected_improvement(double mu, double sigma, double best_y) {
  const double gain = best_y - mu;
  if (!(sigma > 0.0)) return std::max(gain, 0.0);
  const double z = gain / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(0.0, gain * cdf + sigma * pdf);
}

double expected_improvement(const GPModel& model, double x, double best_y) {
  const Prediction p = model.predict(x);
  return expected_improvement(p.mean, std::sqrt(p.variance), best_y);
}

double propose_next(const GPModel& model, const Bounds& bounds, double best_y, int grid_size) {
  if (!(bounds.hi >= bounds.lo)) throw InvalidArgument("propose_next: empty bounds");
  if (grid_size < 2) throw InvalidArgument("propose_next: grid_size must be >= 2");
  const double best_z = std::isfinite(best_y) ? model.standardize(best_y) : 0.0;
  double best_x = bounds.lo;
  double best_ei = -1.0;
  for (int i = 0; i < grid_size; ++i) {
    const double x = bounds.lo + (bounds.hi - bounds.lo) * i / (grid_size - 1);
    const Prediction p = model.predict_standardized(x);
    const double ei = expected_improvement(p.mean, std::sqrt(p.variance), best_z);
    if (ei > best_ei) {
      best_ei = ei;
      best_x = x;
    }
  }
  return std::clamp(best_x, bounds.lo, bounds.hi);
}

namespace {

void finalize(BOResult& r) {
  r.n_evals = static_cast<int>(r.history.size());
  r.best_x = std::numeric_limits<double>::quiet_NaN();
  r.best_y = std::numeric_limits<double>::infinity();
  for (const Evaluation& e : r.history) {
    if (e.y < r.best_y || std::isnan(r.best_x)) {
      r.best_x = e.x;
      r.best_y = e.y;
    }
  }
}

}  // namespace

BOResult run_bo(const Objective& objective, const Bounds& bounds, int budget, int n_init,
                std::uint64_t seed, const KernelHyper& hyper) {
  if (!(bounds.hi >= bounds.lo)) throw InvalidArgument("run_bo: empty bounds");
  if (n_init < 1 || budget < n_init) throw InvalidArgument("run_bo: need budget >= n_init >= 1");

  BOResult result;
  Rng rng(seed);
  const auto evaluate = [&](double x, bool is_init) {
    double y = 0.0;
    try {
      y = objective(x);
    } catch (const std::exception& e) {
      finalize(result);
      throw BoAborted(e.what(), result);
    }
    if (std::isnan(y)) y = std::numeric_limits<double>::infinity();
    result.history.push_back({x, y, is_init});
  };

  for (int i = 0; i < n_init; ++i) evaluate(rng.uniform(bounds.lo, bounds.hi), true);

  while (static_cast<int>(result.history.size()) < budget) {
    std::vector<double> xs;
    std::vector<double> ys;
    double best = std::numeric_limits<double>::infinity();
    for (const Evaluation& e : result.history) {
      xs.push_back(e.x);
      ys.push_back(e.y);
      best = std::min(best, e.y);
    }
    const GPModel model = GPModel::fit(std::move(xs), std::move(ys), hyper);
    evaluate(propose_next(model, bounds, best), false);
  }
  finalize(result);
  return result;
}

std::string format_trace(const BOResult& result) {
  std::string out = "eval_index,x_deg,loss,is_init\n";
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    const Evaluation& e = result.history[i];
    out += std::to_string(i) + "," + text::fmt_double(e.x) + "," + text::fmt_double(e.y) + "," +
           (e.is_init ? "1" : "0") + "\n";
  }
  out += "best," + text::fmt_double(result.best_x) + "," + text::fmt_double(result.best_y) + ",\n";
  return out;
}

}  // namespace sandinv::bo
