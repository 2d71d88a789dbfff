#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sandinv/bo/gp.hpp"
#include "sandinv/common/error.hpp"

namespace sandinv::bo {

struct Bounds {
  double lo = 25.0;
  double hi = 55.0;
};

/// Minimization EI with z = (best - mu) / sigma:
/// (best - mu) Phi(z) + sigma phi(z); max(best - mu, 0) when sigma = 0.
double expected_improvement(double mu, double sigma, double best_y);

/// EI of the model at x against best_y (both in original units).
double expected_improvement(const GPModel& model, double x, double best_y);

/// Number of evenly spaced candidates (end points included) for propose_next.
inline constexpr int kProposalGrid = 2048;

/// Argmax of EI over the candidate grid; ties go to the lowest x. EI is
/// evaluated on the standardized scale, so affine rescaling of the training
/// targets does not move the proposal.
double propose_next(const GPModel& model, const Bounds& bounds, double best_y,
                    int grid_size = kProposalGrid);

struct Evaluation {
  double x = 0.0;
  double y = 0.0;
  bool is_init = false;
};

struct BOResult {
  double best_x = 0.0;
  double best_y = 0.0;
  std::vector<Evaluation> history;
  int n_evals = 0;
};

/// Thrown when the objective throws; carries the evaluations made so far.
class BoAborted : public Error {
 public:
  BoAborted(const std::string& what, BOResult partial)
      : Error("bayesian optimization aborted: " + what), partial_(std::move(partial)) {}
  const BOResult& partial() const { return partial_; }

 private:
  BOResult partial_;
};

using Objective = std::function<double(double)>;

/// n_init seeded uniform samples in bounds, then fit / propose / evaluate
/// until `budget` evaluations. NaN results are treated as +inf.
BOResult run_bo(const Objective& objective, const Bounds& bounds, int budget, int n_init,
                std::uint64_t seed, const KernelHyper& hyper = {});

/// `eval_index,x_deg,loss,is_init` rows, then `best,<x>,<loss>,`.
std::string format_trace(const BOResult& result);

}  // namespace sandinv::bo
