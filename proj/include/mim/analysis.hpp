#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mim/fields.hpp"
#include "mim/loss.hpp"
#include "mim/problem.hpp"
#include "mim/quadrature.hpp"

namespace mim {

/// delta_k = delta^k / (k + 1), eps_k = sqrt((k+1)^2 - 1) / (k + 1).
class PerturbationWeights {
 public:
  PerturbationWeights(double delta, int K);
  double delta() const { return delta_; }
  int max_index() const { return K_; }
  /// delta_k for 0 <= k <= K (delta_0 = 1).
  double operator()(int k) const;
  static double eps(int k);

 private:
  double delta_;
  int K_;
};

/// True when delta_k a b <= (eps_{2n} / 2)(delta_{k+1} a^2 + delta_{k-1} b^2) + tol.
bool young_holds(const PerturbationWeights& w, int n, int k, double a, double b,
                 double tol = 1e-12);
/// Failures over k = 2..2n and the (a, b) grid.
long young_check(double delta, int n, const std::vector<double>& a_grid,
                 const std::vector<double>& b_grid, double tol = 1e-12);

/// Weighted energy of a bundle with weights delta_k.
double weighted_energy(const FieldBundle& bundle, double delta, const PointSet& grid,
                       Exec exec = Exec::parallel);

struct CoercivityTrial {
  int trial = 0;
  std::uint64_t seed = 0;
  double B_value = 0.0;   // bilinear form B(u, u)
  double norm_sum = 0.0;  // sum_k |phi_k|^2_{H1} + |psi_k|^2_{H(div)} (or the second-order norms)
  double lhs = 0.0;       // B, or the sup-linear left side for Dirichlet
  double ratio = 0.0;
  double ratio_scaled = 0.0;  // same ratio for 2u
  double energy = 0.0;        // weighted energy
  double phi0_h1 = 0.0;       // |phi_0|_{H1}
};

struct CoercivityReport {
  BoundaryKind kind = BoundaryKind::dirichlet;
  System system = System::first_order;
  int n = 1;
  int d = 1;
  double delta = 0.1;
  std::vector<CoercivityTrial> trials;
  double min_ratio = 0.0;
  double median_ratio = 0.0;
  double max_ratio = 0.0;
  double max_scale_deviation = 0.0;  // max |ratio_scaled / ratio - 1|
  bool all_positive = false;
};

struct CoercivityOptions {
  int width = 16;
  double B = 1.0;
  int q = 8;
  int panels = 16;
  double lambda = 1.0;
  double mu = 1.0;
  /// Keep the random inner features but choose the outer weights (a, c) that
  /// minimize B(u,u) / norms, then rescale them into the class. Off: the outer
  /// weights stay as drawn.
  bool minimize_outer = true;
};

/// Ratios over random class-feasible network bundles. Zero bundles are redrawn.
/// Replaces the outer weights of `features` with the minimizer of
/// B(u,u) / sum of norms over span{1, sigma(W_i x + b_i)}, scaled into the
/// class. Directions where the norm Gram is below 1e-8 of its largest
/// eigenvalue are dropped. `min_ratio` receives the Rayleigh quotient.
ShallowNetwork minimize_outer_ratio(const ShallowNetwork& features, System system, int n,
                                    const ProblemData& data, const QuadGrid& grid,
                                    double* min_ratio = nullptr);

CoercivityReport coercivity_study(BoundaryKind kind, System system, int n, int d, int trials,
                                  double delta, std::uint64_t seed,
                                  const CoercivityOptions& opts = {},
                                  Exec exec = Exec::parallel);

/// Draws a random class member and writes its values at the points of X.
struct FunctionClass {
  int d = 1;
  std::function<void(std::mt19937_64&, const PointSet&, std::vector<double>&)> sample;
};

FunctionClass constant_class(double value);
/// {w.x + b : |w|_2 = 1, |b| <= 1}, sampled with w uniform on the sphere and b uniform.
FunctionClass linear_class(int d);

/// Random-candidate lower estimate of E_eps sup_f |(1/N) sum eps_i f(X_i)|,
/// averaged over `x_draws` draws of X. All 2^N sign patterns are used when
/// 2^N <= sign_draws.
double empirical_rademacher(const FunctionClass& cls, int N, int sign_draws, int candidates,
                            std::uint64_t seed, int x_draws = 1);
/// Exact sup for the linear class: (|sum eps_i X_i|_2 + |sum eps_i|) / N.
/// Uses the same X and sign vectors as empirical_rademacher for equal seeds.
double linear_class_rademacher_exact(int d, int N, int sign_draws, std::uint64_t seed,
                                     int x_draws = 1);
double linear_class_bound(int d, int N);

struct GapRow {
  int N = 0;
  double rms_gap = 0.0;
  double median_gap = 0.0;
};

struct GapStudy {
  double expected = 0.0;
  std::vector<GapRow> rows;
  double slope = 0.0;
};

/// RMS over resamples of |expected_loss - empirical_loss| for each N.
GapStudy generalization_gap_study(const FieldBundle& bundle, const ProblemData& data,
                                  const std::vector<int>& N_list, int resamples,
                                  std::uint64_t seed, const QuadGrid& grid,
                                  Exec exec = Exec::parallel);

struct DerivativeCheck {
  int k = 1;
  int d = 1;
  int p = 1;
  int m = 1;
  std::string quantity;  // "jacobian", "laplacian" or "parameters"
  int points = 0;
  double max_rel_error = 0.0;
  int failures = 0;
};

/// Central finite-difference audit of input Jacobians, Laplacians and parameter
/// gradients on random class-feasible networks at kink-avoiding points
/// (|W_i x + b_i| > 1e-3). The relative error is |analytic - fd|_inf / |fd|_inf.
std::vector<DerivativeCheck> verify_derivatives(int points, double step, double tol,
                                                std::uint64_t seed, int width = 8);

/// Least-squares slope of log y against log x. NaN with fewer than two points.
double loglog_slope(std::span<const double> x, std::span<const double> y);
double median(std::vector<double> v);
/// Independent stream seed for (seed, index, tag).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t tag);

}  // namespace mim
