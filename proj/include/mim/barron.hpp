#pragma once

#include <cstdint>
#include <vector>

#include "mim/kernels.hpp"
#include "mim/network.hpp"
#include "mim/problem.hpp"
#include "mim/quadrature.hpp"

namespace mim {

/// g(z) = gamma / (1 + pi^4 k1^4) * cos(pi (k1 z + b)) on [-1, 1].
struct CosProfile {
  double gamma = 1.0;
  int k1 = 1;
  int b_phase = 0;
  double B = 1.0;

  CosProfile() = default;
  CosProfile(double gamma, int k1, int b_phase, double B);
  double value(double z) const;
  double derivative(double z) const;
};

/// Uniform knots z_j = (j - m)/m, j = 0..2m, on [-1, 1].
struct Partition {
  int m = 2;
  explicit Partition(int m);
  double h() const { return 1.0 / m; }
  double knot(int j) const { return static_cast<double>(j - m) / m; }
};

/// Piecewise-quadratic ReQU interpolant of g with 2m+4 neurons, built from
/// second differences of g at the knots. c = g(0).
ShallowNetwork requ_interpolant(const CosProfile& g, int m);

/// Outer weights of the interpolant in neuron order (a_0 .. a_{2m+3}).
std::vector<double> requ_coefficients(const ShallowNetwork& ghat);

/// Replaces each ReQU neuron a ReQU(t) by (a / 6h)(ReCU(t + h) - ReCU(t - h)).
/// Neurons sharing a knot are merged; neurons that vanish on [-1, 1] are dropped.
ShallowNetwork recu_from_requ(const ShallowNetwork& ghat, double h);

/// |g - net|_{H1(-1,1)} for a 1-d network, with quadrature panels on the knots.
double h1_error_1d(const ShallowNetwork& net, const CosProfile& g, int m);

/// The 1-d ReCU approximant composed with z = w.x, w = k / |k|_1.
ShallowNetwork cos_mode_network(const std::vector<int>& k, double gamma, int b_phase, int m,
                                double B);

/// |u - net|_{H1} on `grid`.
double h1_error(const ShallowNetwork& net, const SpectralFunction& u, const PointSet& grid,
                Exec exec = Exec::parallel);

struct BarronApprox {
  ShallowNetwork net;
  double h1_error = 0.0;
  int distinct_modes = 0;
};

/// Draws m modes from mu(k) ~ |u_k| (1 + pi^4 |k|_1^4), builds each as a sum of
/// cos_mode_network terms and averages them. `partition` is the knot count of the
/// 1-d approximants. The error is measured on `grid` (error_grid(d) when empty).
BarronApprox approximate_barron(const SpectralFunction& u, int m, std::uint64_t seed,
                                int partition = 64, const PointSet* grid = nullptr,
                                Exec exec = Exec::parallel);

}  // namespace mim
