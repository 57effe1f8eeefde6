#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mim/fields.hpp"
#include "mim/problem.hpp"
#include "mim/train.hpp"

using namespace mim;
using std::numbers::pi;

namespace {

// Components given pointwise: value, gradient, Laplacian of each output.
struct Component {
  std::function<double(std::span<const double>)> v;
  std::function<std::vector<double>(std::span<const double>)> g;
  std::function<double(std::span<const double>)> lap = [](std::span<const double>) { return 0.0; };
};

FieldBundle make_bundle(System sys, int n, int d, std::vector<Component> comps) {
  const int p = static_cast<int>(comps.size());
  auto src = std::make_shared<FunctionSource>(
      p, d, true, [comps, p, d](std::span<const double> x, Derivs, FieldEval& e) {
        e.y.assign(p, 0.0);
        e.jac.assign(static_cast<std::size_t>(p) * d, 0.0);
        e.lap.assign(p, 0.0);
        for (int j = 0; j < p; ++j) {
          e.y[j] = comps[j].v(x);
          const auto g = comps[j].g(x);
          for (int l = 0; l < d; ++l) e.jac[j * d + l] = g[l];
          e.lap[j] = comps[j].lap(x);
        }
      });
  return FieldBundle(sys, n, src);
}

Component constant(double c, int d) {
  return {[c](std::span<const double>) { return c; },
          [d](std::span<const double>) { return std::vector<double>(d, 0.0); }};
}

BoundaryPoint bpoint(std::vector<double> x, int face) {
  BoundaryPoint p;
  p.face = face;
  p.coords = x;
  p.normal.assign(x.size(), 0.0);
  p.normal[face_axis(face)] = face_sign(face);
  return p;
}

}  // namespace

TEST(Bundle, WidthChecked) {
  EXPECT_EQ(FieldBundle::width_for(System::first_order, 2, 3), 8);
  EXPECT_EQ(FieldBundle::width_for(System::second_order, 2, 3), 2);
  EXPECT_THROW(network_bundle(System::first_order, 1, ShallowNetwork(ActivationPower(2), 2, 2, 3)),
               DimensionMismatch);
  EXPECT_NO_THROW(network_bundle(System::second_order, 2, ShallowNetwork(ActivationPower(3), 2, 2, 3)));
}

TEST(ApplyP, ConstantBundle) {
  const FieldBundle b = make_bundle(System::first_order, 1, 2, {constant(3.0, 2), constant(0.0, 2), constant(0.0, 2)});
  const double x[] = {0.3, 0.4};
  for (double v : apply_P(b, x)) EXPECT_EQ(v, 0.0);
}

TEST(ApplyP, LinearPhiUnitPsi) {
  const FieldBundle b = make_bundle(
      System::first_order, 1, 1,
      {{[](std::span<const double> x) { return x[0]; },
        [](std::span<const double>) { return std::vector<double>{1.0}; }},
       constant(1.0, 1)});
  const double x[] = {0.7};
  const auto r = apply_P(b, x);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0], 0.0);
  EXPECT_EQ(r[1], 0.0);
}

TEST(ApplyP, BlockOrdering) {
  // n=2, d=1: (phi0, psi0, phi1, psi1) = (x^2, 3x, 5, x).
  const FieldBundle b = make_bundle(
      System::first_order, 2, 1,
      {{[](std::span<const double> x) { return x[0] * x[0]; },
        [](std::span<const double> x) { return std::vector<double>{2 * x[0]}; }},
       {[](std::span<const double> x) { return 3 * x[0]; },
        [](std::span<const double>) { return std::vector<double>{3.0}; }},
       constant(5.0, 1),
       {[](std::span<const double> x) { return x[0]; },
        [](std::span<const double>) { return std::vector<double>{1.0}; }}});
  const double x[] = {0.5};
  const auto r = apply_P(b, x);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_DOUBLE_EQ(r[0], 1.0 - 1.5);  // grad phi0 - psi0
  EXPECT_DOUBLE_EQ(r[1], 3.0 - 5.0);  // div psi0 - phi1
  EXPECT_DOUBLE_EQ(r[2], 0.0 - 0.5);  // grad phi1 - psi1
  EXPECT_DOUBLE_EQ(r[3], 1.0);        // div psi1
}

TEST(ApplyP, ExactCosineBundle) {
  ProblemSpec spec{2, 1, BoundaryKind::dirichlet, SpectralFunction(1, {{{1}, 1.0}})};
  const double x[] = {0.3};
  const auto r = apply_P(exact_bundle(spec, System::first_order), x);
  const double f = std::pow(pi, 4) * std::cos(pi * 0.3);
  for (std::size_t i = 0; i + 1 < r.size(); ++i) EXPECT_NEAR(r[i], 0.0, 1e-12);
  EXPECT_NEAR(r.back(), f, 1e-10);
}

TEST(ApplyPstar, Examples) {
  const FieldBundle affine = make_bundle(
      System::second_order, 1, 2,
      {{[](std::span<const double> x) { return 1 + 2 * x[0] - x[1]; },
        [](std::span<const double>) { return std::vector<double>{2.0, -1.0}; }}});
  const double x2[] = {0.2, 0.9};
  EXPECT_EQ(apply_Pstar(affine, x2)[0], 0.0);

  const FieldBundle cosb = make_bundle(
      System::second_order, 2, 1,
      {{[](std::span<const double> x) { return std::cos(pi * x[0]); },
        [](std::span<const double> x) { return std::vector<double>{-pi * std::sin(pi * x[0])}; },
        [](std::span<const double> x) { return -pi * pi * std::cos(pi * x[0]); }},
       {[](std::span<const double> x) { return -pi * pi * std::cos(pi * x[0]); },
        [](std::span<const double> x) { return std::vector<double>{pi * pi * pi * std::sin(pi * x[0])}; }}});
  const double x1[] = {0.37};
  EXPECT_NEAR(apply_Pstar(cosb, x1)[0], 0.0, 1e-12);

  ShallowNetwork net(ActivationPower(3), 1, 1, 1, 1.0);
  net.a(0)[0] = 1.0;
  net.W(0)[0] = 1.0;
  const double xh[] = {0.5};
  EXPECT_NEAR(apply_Pstar(network_bundle(System::second_order, 1, net), xh)[0], 3.0, 1e-15);
}

TEST(ApplyPstar, RejectsRelu) {
  ShallowNetwork net(ActivationPower(1), 1, 1, 1, 1.0);
  const double x[] = {0.5};
  EXPECT_THROW(apply_Pstar(network_bundle(System::second_order, 1, net), x), UnsupportedDerivative);
}

TEST(TraceFirst, Examples) {
  const double c = 2.5;
  const FieldBundle b = make_bundle(System::first_order, 1, 2,
                                    {constant(c, 2), constant(1.0, 2), constant(0.0, 2)});
  const BoundaryPoint p = bpoint({1.0, 0.4}, 1);
  EXPECT_EQ(trace_first(b, p, BoundaryKind::dirichlet)[0], c);
  EXPECT_EQ(trace_first(b, p, BoundaryKind::neumann)[0], 1.0);
  EXPECT_EQ(trace_first(b, p, BoundaryKind::robin)[0], c + 1.0);
}

TEST(TraceSecond, Examples) {
  const FieldBundle five = make_bundle(System::second_order, 1, 1, {constant(5.0, 1)});
  EXPECT_EQ(trace_second(five, bpoint({0.0}, 0), BoundaryKind::dirichlet)[0], 5.0);
  const FieldBundle sq = make_bundle(
      System::second_order, 1, 1,
      {{[](std::span<const double> x) { return x[0] * x[0]; },
        [](std::span<const double> x) { return std::vector<double>{2 * x[0]}; }}});
  const BoundaryPoint p = bpoint({1.0}, 1);
  EXPECT_EQ(trace_second(sq, p, BoundaryKind::neumann)[0], 2.0);
  EXPECT_EQ(trace_second(sq, p, BoundaryKind::robin)[0], 3.0);
}

TEST(FieldsProperty, RobinIsDirichletPlusNeumann) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + t % 2, d = 1 + t % 3;
    const System sys = t % 4 < 2 ? System::first_order : System::second_order;
    const int p = FieldBundle::width_for(sys, n, d);
    ShallowNetwork net = init_network(6, d, p, ActivationPower(sys == System::first_order ? 2 : 3), 1.0, rng());
    const FieldBundle b = network_bundle(sys, n, net);
    const PointSet s = sample_boundary(d, 5, rng());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const BoundaryPoint bp = boundary_point(s, i);
      auto tr = [&](BoundaryKind k) {
        return sys == System::first_order ? trace_first(b, bp, k) : trace_second(b, bp, k);
      };
      const auto D = tr(BoundaryKind::dirichlet), N = tr(BoundaryKind::neumann), R = tr(BoundaryKind::robin);
      for (int k = 0; k < n; ++k) EXPECT_EQ(R[k], D[k] + N[k]);
    }
  }
}

TEST(FieldsProperty, ExactBundlesMatchData) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> co(-1.0, 1.0), U(0.0, 1.0);
  for (int t = 0; t < 48; ++t) {
    const int n = 1 + t % 2, d = 1 + (t / 2) % 3;
    const BoundaryKind kind = static_cast<BoundaryKind>(t % 3);
    std::vector<Mode> modes{{std::vector<int>(d, 1), co(rng)}};
    std::vector<int> k2(d, 0);
    k2[0] = 2;
    modes.push_back({k2, co(rng)});
    ProblemSpec spec{n, d, kind, SpectralFunction(d, modes)};
    const SpectralFunction f = data_f(spec);
    const BoundaryData g = data_g(spec);
    std::vector<double> x(d);
    for (double& v : x) v = U(rng);
    const PointSet s = sample_boundary(d, 4, rng());
    std::vector<double> gv(n);
    for (System sys : {System::first_order, System::second_order}) {
      const FieldBundle b = exact_bundle(spec, sys);
      const auto r = sys == System::first_order ? apply_P(b, x) : apply_Pstar(b, x);
      const double fx = f.value(x);
      for (std::size_t i = 0; i + 1 < r.size(); ++i) EXPECT_NEAR(r[i], 0.0, 1e-10 * std::max(1.0, std::abs(fx)));
      EXPECT_NEAR(r.back(), fx, 1e-10 * std::max(1.0, std::abs(fx)));
      for (std::size_t i = 0; i < s.size(); ++i) {
        const BoundaryPoint bp = boundary_point(s, i);
        g(bp.coords, bp.normal, gv);
        const auto tr = sys == System::first_order ? trace_first(b, bp, kind) : trace_second(b, bp, kind);
        for (int k = 0; k < n; ++k) EXPECT_NEAR(tr[k], gv[k], 1e-10 * std::max(1.0, std::abs(gv[k])));
      }
    }
  }
}

TEST(FieldsProperty, ResidualLinearInOuterWeights) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(0.0, 1.0), co(-2.0, 2.0);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + t % 2, d = 1 + t % 2;
    const System sys = t % 4 < 2 ? System::first_order : System::second_order;
    const int p = FieldBundle::width_for(sys, n, d);
    const ActivationPower k(sys == System::first_order ? 2 : 3);
    ShallowNetwork u = init_network(5, d, p, k, 1.0, rng());
    ShallowNetwork w = u;
    for (std::size_t j = 0; j < u.b_offset(0) - d * 5; ++j) {
      u.params()[j] = co(rng);
      w.params()[j] = co(rng);
    }
    ShallowNetwork s = u;
    const double al = co(rng), be = co(rng);
    for (std::size_t j = 0; j < u.w_offset(0); ++j) s.params()[j] = al * u.params()[j] + be * w.params()[j];
    std::vector<double> x(d);
    for (double& v : x) v = U(rng);
    auto res = [&](const ShallowNetwork& net) {
      const FieldBundle b = network_bundle(sys, n, net);
      return sys == System::first_order ? apply_P(b, x) : apply_Pstar(b, x);
    };
    const auto ru = res(u), rw = res(w), rs = res(s);
    for (std::size_t i = 0; i < rs.size(); ++i) EXPECT_NEAR(rs[i], al * ru[i] + be * rw[i], 1e-12);
  }
}

TEST(ErrorNorms, ExactIsZero) {
  ProblemSpec spec{2, 2, BoundaryKind::dirichlet, SpectralFunction(2, {{{1, 2}, 0.7}})};
  const PointSet g = tensor_grid(2, 8, 2);
  for (System sys : {System::first_order, System::second_order}) {
    const ErrorNorms e = error_norms(exact_bundle(spec, sys), exact_bundle(spec, sys), g);
    EXPECT_LE(e.total(), 1e-12);
  }
}

TEST(ErrorNorms, CosineAgainstZero) {
  const FieldBundle c = make_bundle(
      System::second_order, 1, 1,
      {{[](std::span<const double> x) { return std::cos(pi * x[0]); },
        [](std::span<const double> x) { return std::vector<double>{-pi * std::sin(pi * x[0])}; },
        [](std::span<const double> x) { return -pi * pi * std::cos(pi * x[0]); }}});
  const ErrorNorms e = error_norms(c, zero_bundle(System::second_order, 1, 1), tensor_grid(1, 32));
  EXPECT_NEAR(e.h1_sq[0], 0.5 + pi * pi / 2, 1e-12);
  EXPECT_NEAR(e.h1_sq[0], 5.4348, 1e-4);
  // Second-order H(div) error of grad phi: |grad|^2 + |lap|^2.
  EXPECT_NEAR(e.hdiv_sq[0], pi * pi / 2 + std::pow(pi, 4) / 2, 1e-10);
}

TEST(ErrorNorms, ConstantVectorField) {
  const FieldBundle b = make_bundle(System::first_order, 1, 2,
                                    {constant(0.0, 2), constant(1.0, 2), constant(0.0, 2)});
  const ErrorNorms e = error_norms(b, zero_bundle(System::first_order, 1, 2), tensor_grid(2, 4));
  EXPECT_NEAR(e.hdiv_sq[0], 1.0, 1e-14);
  EXPECT_EQ(e.h1_sq[0], 0.0);
}

TEST(ErrorNorms, EmptyGridRejected) {
  PointSet empty;
  empty.d = 1;
  EXPECT_THROW(error_norms(zero_bundle(System::first_order, 1, 1), zero_bundle(System::first_order, 1, 1), empty),
               std::invalid_argument);
}
