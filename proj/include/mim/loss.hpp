#pragma once

#include <vector>

#include "mim/fields.hpp"
#include "mim/kernels.hpp"
#include "mim/problem.hpp"
#include "mim/quadrature.hpp"

namespace mim {

struct LossBreakdown {
  double interior = 0.0;
  double boundary = 0.0;
  double mean_penalty = 0.0;
  double total = 0.0;
};

/// sum_i w_i |r(x_i) - F(x_i)|^2 + lambda sum_j w_j |S u(x_j) - g(x_j)|^2
///   + mu (sum_i w_i phi_0(x_i))^2   (Neumann only)
/// where r is the system residual and F = (0, ..., 0, f). Both the quadrature
/// loss and the Monte Carlo loss are this sum with different weights.
LossBreakdown integrate_loss(const FieldBundle& bundle, const ProblemData& data,
                             const PointSet& interior, const PointSet& boundary,
                             Exec exec = Exec::parallel);

LossBreakdown expected_loss(const FieldBundle& bundle, const ProblemData& data,
                            const QuadGrid& grid, Exec exec = Exec::parallel);
LossBreakdown empirical_loss(const FieldBundle& bundle, const ProblemData& data,
                             const SampleSet& samples, Exec exec = Exec::parallel);

/// (r u, r w) + lambda (S u, S w) + mu int phi_0 int theta_0 (Neumann only).
/// Only the kind, lambda and mu of `data` are used.
double bilinear_form(const FieldBundle& u, const FieldBundle& w, const ProblemData& data,
                     const QuadGrid& grid, Exec exec = Exec::parallel);

/// Exact parameter gradient of integrate_loss for a network-backed bundle.
/// Fills `loss` with the loss at the same parameters when non-null.
std::vector<double> loss_gradient(const ShallowNetwork& net, System system,
                                  const ProblemData& data, const PointSet& interior,
                                  const PointSet& boundary, Exec exec = Exec::parallel,
                                  LossBreakdown* loss = nullptr);
std::vector<double> loss_gradient(const ShallowNetwork& net, System system,
                                  const ProblemData& data, const SampleSet& samples,
                                  Exec exec = Exec::parallel, LossBreakdown* loss = nullptr);

}  // namespace mim
