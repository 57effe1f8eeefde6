#pragma once

#include <cstdint>
#include <vector>

#include "mim/fields.hpp"
#include "mim/loss.hpp"
#include "mim/problem.hpp"

namespace mim {

struct OptimizerConfig {
  enum class Method { adam, sgd };
  Method method = Method::adam;
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int steps = 1000;
  bool resample = false;
  std::uint64_t seed = 0;
  int log_interval = 100;

  void validate() const;
};

struct TrainPoint {
  int step = 0;
  LossBreakdown loss;
};

struct TrainReport {
  std::vector<TrainPoint> trajectory;
  LossBreakdown initial;
  LossBreakdown final_loss;
  ErrorNorms errors;
  double relative_h1 = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  int steps_run = 0;
  bool diverged = false;
};

struct TrainResult {
  ShallowNetwork net;
  TrainReport report;
};

/// W_i = (uniform direction) * U(0,1], b_i ~ U[-1,1], a entries ~ U[-1,1] B/(m p), c = 0.
ShallowNetwork init_network(int m, int d, int out_dim, ActivationPower k, double B,
                            std::uint64_t seed);

/// ReQU for the first-order system, ReCU for the second-order one.
ActivationPower activation_for(System system);
/// Barron smoothness used for the class bound: 2n+2 (first order) or 2n+3 (second order).
double barron_order_for(System system, int n);

/// Grid used for post-training error norms; panels are dense because network
/// integrands have kinks.
PointSet error_grid(int d);

/// Projected Adam/SGD on the empirical loss. N_hat = 0 uses the default.
TrainResult train(const ProblemSpec& spec, System system, int m, int N, int N_hat,
                  const OptimizerConfig& opt, Exec exec = Exec::parallel);

}  // namespace mim
