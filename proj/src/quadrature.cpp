#include "mim/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <gsl/gsl_integration.h>

namespace mim {

namespace {

void check_dim(int d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
}

double open_uniform(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  while (x <= 0.0) x = u(rng);
  return x;
}

}  // namespace

int face_axis(int face) { return face / 2; }
double face_sign(int face) { return face % 2 == 0 ? -1.0 : 1.0; }

double PointSet::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

BoundaryPoint boundary_point(const PointSet& set, std::size_t i) {
  if (!set.on_boundary()) throw std::invalid_argument("point set has no faces");
  BoundaryPoint bp;
  bp.face = set.faces[i];
  const auto x = set.point(i);
  bp.coords.assign(x.begin(), x.end());
  bp.normal.assign(static_cast<std::size_t>(set.d), 0.0);
  bp.normal[face_axis(bp.face)] = face_sign(bp.face);
  return bp;
}

PointSet sample_interior(int d, int N, std::uint64_t seed) {
  check_dim(d);
  if (N < 1) throw std::invalid_argument("need at least one interior sample");
  std::seed_seq seq{seed, std::uint64_t{1}};
  std::mt19937_64 rng(seq);
  PointSet set;
  set.d = d;
  set.coords.resize(static_cast<std::size_t>(N) * d);
  for (double& c : set.coords) c = open_uniform(rng);
  set.weights.assign(static_cast<std::size_t>(N), 1.0 / N);
  return set;
}

PointSet sample_boundary(int d, int N_hat, std::uint64_t seed) {
  check_dim(d);
  if (N_hat < 1) throw std::invalid_argument("need at least one boundary sample");
  std::seed_seq seq{seed, std::uint64_t{2}};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<int> pick(0, 2 * d - 1);
  PointSet set;
  set.d = d;
  set.coords.resize(static_cast<std::size_t>(N_hat) * d);
  set.faces.resize(static_cast<std::size_t>(N_hat));
  for (int i = 0; i < N_hat; ++i) {
    const int f = pick(rng);
    set.faces[i] = f;
    double* x = set.coords.data() + static_cast<std::size_t>(i) * d;
    for (int l = 0; l < d; ++l) x[l] = open_uniform(rng);
    x[face_axis(f)] = f % 2 == 0 ? 0.0 : 1.0;
  }
  set.weights.assign(static_cast<std::size_t>(N_hat), 2.0 * d / N_hat);
  return set;
}

int default_boundary_count(int d, int N) {
  check_dim(d);
  const long long dd = static_cast<long long>(d) * d;
  return static_cast<int>(std::max(1LL, (N + dd - 1) / dd));
}

SampleSet sample_set(int d, int N, int N_hat, std::uint64_t seed) {
  SampleSet s;
  s.seed = seed;
  s.interior = sample_interior(d, N, seed);
  s.boundary = sample_boundary(d, N_hat > 0 ? N_hat : default_boundary_count(d, N), seed);
  return s;
}

void gauss_legendre_01(int q, int panels, std::vector<double>& nodes,
                       std::vector<double>& weights) {
  if (q < 1 || panels < 1) throw std::invalid_argument("need q >= 1 and panels >= 1");
  gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(static_cast<size_t>(q));
  if (t == nullptr) throw std::runtime_error("Gauss-Legendre table allocation failed");
  nodes.clear();
  weights.clear();
  for (int p = 0; p < panels; ++p) {
    const double a = static_cast<double>(p) / panels;
    const double b = static_cast<double>(p + 1) / panels;
    for (int i = 0; i < q; ++i) {
      double xi = 0.0;
      double wi = 0.0;
      gsl_integration_glfixed_point(a, b, static_cast<size_t>(i), &xi, &wi, t);
      nodes.push_back(xi);
      weights.push_back(wi);
    }
  }
  gsl_integration_glfixed_table_free(t);
}

namespace {

// Tensor product of the 1-d rule over `dims` axes, written into columns `axes`
// of points in dimension d; other columns are left for the caller.
void tensor_fill(int d, const std::vector<int>& axes, const std::vector<double>& nodes,
                 const std::vector<double>& w1, std::vector<double>& coords,
                 std::vector<double>& weights, std::size_t base_count) {
  const std::size_t q = nodes.size();
  std::size_t total = 1;
  for (std::size_t a = 0; a < axes.size(); ++a) total *= q;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    double w = 1.0;
    double* x = coords.data() + (base_count + idx) * static_cast<std::size_t>(d);
    for (std::size_t a = axes.size(); a-- > 0;) {
      const std::size_t j = r % q;
      r /= q;
      x[axes[a]] = nodes[j];
      w *= w1[j];
    }
    weights[base_count + idx] = w;
  }
}

}  // namespace

PointSet tensor_grid(int d, int q, int panels) {
  check_dim(d);
  std::vector<double> nodes, w1;
  gauss_legendre_01(q, panels, nodes, w1);
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= nodes.size();
  PointSet set;
  set.d = d;
  set.coords.resize(total * d);
  set.weights.resize(total);
  std::vector<int> axes(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) axes[a] = a;
  tensor_fill(d, axes, nodes, w1, set.coords, set.weights, 0);
  return set;
}

PointSet boundary_grid(int d, int q, int panels) {
  check_dim(d);
  std::vector<double> nodes, w1;
  gauss_legendre_01(q, panels, nodes, w1);
  std::size_t per_face = 1;
  for (int a = 0; a < d - 1; ++a) per_face *= nodes.size();
  PointSet set;
  set.d = d;
  set.coords.assign(per_face * 2 * d * d, 0.0);
  set.weights.resize(per_face * 2 * d);
  set.faces.resize(per_face * 2 * d);
  for (int f = 0; f < 2 * d; ++f) {
    const int axis = face_axis(f);
    std::vector<int> axes;
    for (int a = 0; a < d; ++a) {
      if (a != axis) axes.push_back(a);
    }
    const std::size_t base = per_face * f;
    tensor_fill(d, axes, nodes, w1, set.coords, set.weights, base);
    for (std::size_t i = 0; i < per_face; ++i) {
      set.coords[(base + i) * d + axis] = f % 2 == 0 ? 0.0 : 1.0;
      set.faces[base + i] = f;
    }
  }
  return set;
}

QuadGrid quad_grid(int d, int q, int panels) {
  return {tensor_grid(d, q, panels), boundary_grid(d, q, panels)};
}

}  // namespace mim
