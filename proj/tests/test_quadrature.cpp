#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "mim/quadrature.hpp"

using namespace mim;
using std::numbers::pi;

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double cos_product(std::span<const double> x, const std::vector<int>& k) {
  double v = 1.0;
  for (std::size_t i = 0; i < k.size(); ++i) v *= std::cos(pi * k[i] * x[i]);
  return v;
}

}  // namespace

TEST(Sampling, InteriorDeterministicAndOpen) {
  const PointSet a = sample_interior(1, 3, 17), b = sample_interior(1, 3, 17);
  EXPECT_EQ(a.coords, b.coords);
  EXPECT_NE(a.coords, sample_interior(1, 3, 18).coords);
  const PointSet big = sample_interior(3, 5000, 4);
  for (double v : big.coords) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_NEAR(big.total_weight(), 1.0, 1e-12);
}

TEST(Sampling, InteriorMean) {
  const PointSet s = sample_interior(2, 100000, 5);
  double m0 = 0, m1 = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    m0 += s.point(i)[0];
    m1 += s.point(i)[1];
  }
  EXPECT_NEAR(m0 / s.size(), 0.5, 0.01);
  EXPECT_NEAR(m1 / s.size(), 0.5, 0.01);
}

TEST(Sampling, BoundaryInOneDimension) {
  const PointSet s = sample_boundary(1, 50, 2);
  EXPECT_NEAR(s.total_weight(), 2.0, 1e-12);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const BoundaryPoint p = boundary_point(s, i);
    ASSERT_EQ(p.coords.size(), 1u);
    if (p.coords[0] == 0.0) {
      EXPECT_EQ(p.normal[0], -1.0);
    } else {
      EXPECT_EQ(p.coords[0], 1.0);
      EXPECT_EQ(p.normal[0], 1.0);
    }
  }
}

TEST(Sampling, BoundaryFaceFrequencies) {
  const PointSet s = sample_boundary(2, 100000, 8);
  std::vector<double> freq(4, 0.0);
  for (int f : s.faces) freq[f] += 1.0 / s.size();
  for (double f : freq) EXPECT_NEAR(f, 0.25, 0.01);
}

TEST(SamplingProperty, BoundaryPointsLieOnTheirFace) {
  for (int d = 1; d <= 4; ++d) {
    const PointSet s = sample_boundary(d, 2000, 30 + d);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const BoundaryPoint p = boundary_point(s, i);
      const int ax = face_axis(p.face);
      int on_face = 0;
      double len = 0.0;
      for (int l = 0; l < d; ++l) {
        if (p.coords[l] == 0.0 || p.coords[l] == 1.0) ++on_face;
        len += p.normal[l] * p.normal[l];
        if (l != ax) EXPECT_EQ(p.normal[l], 0.0);
      }
      EXPECT_EQ(on_face, 1);
      EXPECT_EQ(p.coords[ax], face_sign(p.face) > 0 ? 1.0 : 0.0);
      EXPECT_EQ(len, 1.0);
    }
  }
}

TEST(Sampling, DefaultBoundaryCount) {
  EXPECT_EQ(default_boundary_count(1, 100), 100);
  EXPECT_EQ(default_boundary_count(2, 10), 3);
  EXPECT_EQ(default_boundary_count(3, 5), 1);
  const SampleSet s = sample_set(2, 64, 0, 1);
  EXPECT_EQ(s.interior.size(), 64u);
  EXPECT_EQ(s.boundary.size(), 16u);
  EXPECT_NEAR(s.boundary.total_weight(), 4.0, 1e-12);
}

TEST(Quadrature, CosineSquared) {
  const PointSet g = tensor_grid(1, 32);
  const double v = integrate(g, [](std::span<const double> x) {
    const double c = std::cos(pi * x[0]);
    return c * c;
  });
  EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST(Quadrature, WeightSums) {
  for (int d = 1; d <= 3; ++d) {
    for (int panels : {1, 3}) {
      const QuadGrid g = quad_grid(d, 5, panels);
      EXPECT_NEAR(g.interior.total_weight(), 1.0, 1e-12);
      EXPECT_NEAR(g.boundary.total_weight(), 2.0 * d, 1e-12);
      for (double w : g.interior.weights) EXPECT_GT(w, 0.0);
      for (double w : g.boundary.weights) EXPECT_GT(w, 0.0);
    }
  }
  const PointSet b = boundary_grid(2, 4);
  EXPECT_NEAR(integrate(b, [](std::span<const double>) { return 1.0; }), 4.0, 1e-12);
}

TEST(Quadrature, GaussLegendreExactness) {
  std::vector<double> x, w;
  gauss_legendre_01(4, 2, x, w);
  ASSERT_EQ(x.size(), 8u);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 7);
  EXPECT_NEAR(s, 1.0 / 8.0, 1e-15);
}

// Orthogonality of the cosine basis: int Phi_k Phi_k' = 2^-#nz(k) delta.
TEST(QuadratureProperty, CosineOrthonormality) {
  const PointSet g = tensor_grid(2, 64);
  for (int a0 = 0; a0 <= 4; ++a0)
    for (int a1 = 0; a1 <= 4; ++a1)
      for (int b0 = 0; b0 <= 4; ++b0)
        for (int b1 = 0; b1 <= 4; ++b1) {
          const std::vector<int> ka{a0, a1}, kb{b0, b1};
          const double v = integrate(
              g, [&](std::span<const double> x) { return cos_product(x, ka) * cos_product(x, kb); });
          const double expect = ka == kb ? std::pow(0.5, (a0 != 0) + (a1 != 0)) : 0.0;
          EXPECT_NEAR(v, expect, 1e-10);
        }
}

TEST(QuadratureProperty, MonteCarloRate) {
  auto h = [](std::span<const double> x) {
    return std::exp(x[0]) * std::cos(pi * x[1]) + x[0] * x[1];
  };
  const double exact = integrate(tensor_grid(2, 64), h);
  std::vector<double> Ns, rms;
  for (int e = 6; e <= 14; ++e) {
    const int N = 1 << e;
    double s2 = 0.0;
    const int reps = 64;
    for (int r = 0; r < reps; ++r) {
      const PointSet s = sample_interior(2, N, 1000 * e + r);
      const double err = integrate(s, h) - exact;
      s2 += err * err;
    }
    Ns.push_back(N);
    rms.push_back(std::sqrt(s2 / reps));
  }
  EXPECT_NEAR(fit_slope(Ns, rms), -0.5, 0.15);
}
