#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mim {

/// Point on the boundary of [0,1]^d. Face f lies on axis f/2, at 0 when
/// f is even (normal -e) and at 1 when f is odd (normal +e).
struct BoundaryPoint {
  int face = 0;
  std::vector<double> coords;
  std::vector<double> normal;
};

int face_axis(int face);
double face_sign(int face);

/// Weighted point cloud. `faces` is empty for interior sets.
struct PointSet {
  int d = 0;
  std::vector<double> coords;  // size() x d, row-major
  std::vector<double> weights;
  std::vector<int> faces;

  std::size_t size() const { return weights.size(); }
  bool on_boundary() const { return !faces.empty(); }
  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
  }
  double total_weight() const;
};

BoundaryPoint boundary_point(const PointSet& set, std::size_t i);

/// Deterministic quadrature on the interior and on the boundary.
struct QuadGrid {
  PointSet interior;
  PointSet boundary;
};

/// Monte Carlo draw. Interior weights are 1/N and boundary weights 2d/N_hat,
/// the measure prefactors of the unit cube.
struct SampleSet {
  PointSet interior;
  PointSet boundary;
  std::uint64_t seed = 0;
};

/// N points uniform in the open cube.
PointSet sample_interior(int d, int N, std::uint64_t seed);
/// N_hat points: uniform face, then uniform on the face.
PointSet sample_boundary(int d, int N_hat, std::uint64_t seed);
/// N_hat = 0 picks the default max(1, ceil(N / d^2)).
SampleSet sample_set(int d, int N, int N_hat, std::uint64_t seed);
int default_boundary_count(int d, int N);

/// Gauss-Legendre nodes and weights on [0,1], split into `panels` equal panels
/// with q nodes each.
void gauss_legendre_01(int q, int panels, std::vector<double>& nodes, std::vector<double>& weights);

PointSet tensor_grid(int d, int q, int panels = 1);
PointSet boundary_grid(int d, int q, int panels = 1);
QuadGrid quad_grid(int d, int q, int panels = 1);

/// Sum of w_i h(x_i).
template <class F>
double integrate(const PointSet& set, F&& h) {
  double s = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) s += set.weights[i] * h(set.point(i));
  return s;
}

}  // namespace mim
