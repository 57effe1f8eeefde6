#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "mim/loss.hpp"
#include "mim/train.hpp"

using namespace mim;
using std::numbers::pi;

namespace {

struct Config {
  System sys;
  BoundaryKind kind;
  int n, d;
};

std::vector<Config> all_configs() {
  std::vector<Config> out;
  for (System s : {System::first_order, System::second_order})
    for (BoundaryKind k : {BoundaryKind::dirichlet, BoundaryKind::neumann, BoundaryKind::robin})
      for (int n : {1, 2})
        for (int d : {1, 2}) out.push_back({s, k, n, d});
  return out;
}

ProblemSpec spec_for(const Config& c) {
  std::vector<Mode> modes{{std::vector<int>(c.d, 1), 0.8}};
  std::vector<int> k(c.d, 0);
  k[0] = 2;
  modes.push_back({k, -0.3});
  return ProblemSpec{c.n, c.d, c.kind, SpectralFunction(c.d, modes)};
}

ShallowNetwork random_net(const Config& c, int m, std::mt19937_64& rng) {
  const int p = FieldBundle::width_for(c.sys, c.n, c.d);
  ShallowNetwork net = init_network(m, c.d, p, activation_for(c.sys), 1.0, rng());
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  for (double& v : net.c()) v = sym(rng);
  for (int i = 0; i < m; ++i)
    for (double& v : net.a(i)) v = sym(rng);
  return net;
}

// No preactivation within 1e-3 of a kink, so steps below 1e-3 stay on one branch.
bool kink_free(const ShallowNetwork& net, const PointSet& pts) {
  for (std::size_t q = 0; q < pts.size(); ++q) {
    const auto x = pts.point(q);
    for (int i = 0; i < net.width(); ++i) {
      double z = net.b(i);
      for (int l = 0; l < net.input_dim(); ++l) z += net.W(i)[l] * x[l];
      if (std::abs(z) <= 1e-3) return false;
    }
  }
  return true;
}

double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0, s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a[i] - b[i]));
    s = std::max(s, std::abs(b[i]));
  }
  return d / std::max(s, 1e-8);
}

}  // namespace

TEST(ExpectedLoss, ZeroBundleUnitSource) {
  ProblemData data = zero_data(1, 1, BoundaryKind::dirichlet);
  data.f = SpectralFunction(1, {{{0}, 1.0}});
  const LossBreakdown L = expected_loss(zero_bundle(System::first_order, 1, 1), data, quad_grid(1, 8));
  EXPECT_NEAR(L.total, 1.0, 1e-14);
  EXPECT_NEAR(L.interior, 1.0, 1e-14);
  EXPECT_EQ(L.boundary, 0.0);
}

TEST(ExpectedLoss, ZeroBundleNeumannHasNoMeanPenalty) {
  ProblemSpec spec{1, 2, BoundaryKind::neumann, SpectralFunction(2, {{{1, 1}, 1.0}})};
  const LossBreakdown L =
      expected_loss(zero_bundle(System::first_order, 1, 2), problem_data(spec), quad_grid(2, 16));
  EXPECT_EQ(L.mean_penalty, 0.0);
  // |f|^2 = (2 pi^2)^2 / 4 for the single mode.
  EXPECT_NEAR(L.interior, std::pow(2 * pi * pi, 2) / 4, 1e-9);
}

TEST(ExpectedLoss, ExactBundlesVanish) {
  const QuadGrid g1 = quad_grid(1, 16, 2), g2 = quad_grid(2, 16, 2);
  for (const Config& c : all_configs()) {
    const ProblemSpec spec = spec_for(c);
    const LossBreakdown L = expected_loss(exact_bundle(spec, c.sys), problem_data(spec), c.d == 1 ? g1 : g2);
    EXPECT_LE(L.total, 1e-8);
    EXPECT_NEAR(L.total, L.interior + L.boundary + L.mean_penalty, 1e-15);
  }
}

// Residual and trace terms vanish on every draw. The Neumann mean penalty
// squares the Monte Carlo mean of phi_0, which is not zero for a finite draw.
TEST(EmpiricalLoss, ExactBundleHasZeroResidual) {
  for (const Config& c : all_configs()) {
    const ProblemSpec spec = spec_for(c);
    const SampleSet s = sample_set(c.d, 64, 0, 3);
    const FieldBundle u = exact_bundle(spec, c.sys);
    const LossBreakdown L = empirical_loss(u, problem_data(spec), s);
    EXPECT_LE(L.interior, 1e-16);
    EXPECT_LE(L.boundary, 1e-20);
    double mean = 0.0;
    for (std::size_t i = 0; i < s.interior.size(); ++i) mean += spec.u_star.value(s.interior.point(i));
    mean /= s.interior.size();
    const double expect = c.kind == BoundaryKind::neumann ? mean * mean : 0.0;
    EXPECT_NEAR(L.mean_penalty, expect, 1e-15);
  }
}

TEST(EmpiricalLoss, SinglePoint) {
  ProblemSpec spec{1, 2, BoundaryKind::dirichlet, SpectralFunction(2, {{{1, 2}, 1.0}})};
  SampleSet s = sample_set(2, 1, 1, 5);
  const LossBreakdown L = empirical_loss(zero_bundle(System::first_order, 1, 2), problem_data(spec), s);
  const double fx = data_f(spec).value(s.interior.point(0));
  EXPECT_NEAR(L.interior, fx * fx, 1e-12 * fx * fx);
}

TEST(EmpiricalLoss, MeanPenaltySquaresTheAverage) {
  // phi_0 = 1 everywhere: mu (1/N sum 1)^2 = mu.
  auto src = std::make_shared<FunctionSource>(1, 1, true, [](std::span<const double>, Derivs, FieldEval& e) {
    e.y.assign(1, 1.0);
    e.jac.assign(1, 0.0);
    e.lap.assign(1, 0.0);
  });
  ProblemData data = zero_data(1, 1, BoundaryKind::neumann, 1.0, 2.5);
  const LossBreakdown L = empirical_loss(FieldBundle(System::second_order, 1, src), data, sample_set(1, 10, 0, 2));
  EXPECT_NEAR(L.mean_penalty, 2.5, 1e-14);
}

TEST(LossProperty, PermutationInvariant) {
  std::mt19937_64 rng(21);
  for (const Config& c : all_configs()) {
    const ProblemSpec spec = spec_for(c);
    const FieldBundle u = network_bundle(c.sys, c.n, random_net(c, 6, rng));
    SampleSet s = sample_set(c.d, 50, 0, rng());
    const double before = empirical_loss(u, problem_data(spec), s, Exec::serial).total;
    std::vector<std::size_t> perm(s.interior.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    PointSet shuffled = s.interior;
    for (std::size_t i = 0; i < perm.size(); ++i)
      for (int l = 0; l < c.d; ++l) shuffled.coords[i * c.d + l] = s.interior.point(perm[i])[l];
    s.interior = shuffled;
    const double after = empirical_loss(u, problem_data(spec), s, Exec::serial).total;
    EXPECT_NEAR(after, before, 1e-12 * before);
  }
}

TEST(BilinearProperty, SymmetricAndMatchesZeroDataLoss) {
  std::mt19937_64 rng(22);
  const QuadGrid g1 = quad_grid(1, 8, 4), g2 = quad_grid(2, 8, 4);
  for (const Config& c : all_configs()) {
    const QuadGrid& g = c.d == 1 ? g1 : g2;
    const ProblemData zero = zero_data(c.n, c.d, c.kind);
    for (int t = 0; t < 3; ++t) {
      const FieldBundle u = network_bundle(c.sys, c.n, random_net(c, 5, rng));
      const FieldBundle w = network_bundle(c.sys, c.n, random_net(c, 5, rng));
      const double uw = bilinear_form(u, w, zero, g), wu = bilinear_form(w, u, zero, g);
      EXPECT_NEAR(uw, wu, 1e-12 * std::max(1.0, std::abs(uw)));
      const double uu = bilinear_form(u, u, zero, g);
      EXPECT_NEAR(uu, expected_loss(u, zero, g).total, 1e-10 * std::max(1.0, uu));
      EXPECT_GE(uu, 0.0);
    }
    const FieldBundle z = zero_bundle(c.sys, c.n, c.d);
    EXPECT_EQ(bilinear_form(z, z, zero, g), 0.0);
  }
}

// Richardson-extrapolated central differences of the empirical loss at 50
// random parameter points per configuration.
TEST(GradientProperty, MatchesFiniteDifferences) {
  std::mt19937_64 rng(23);
  const double h = 1e-4;
  for (const Config& c : all_configs()) {
    const ProblemSpec spec = spec_for(c);
    const ProblemData data = problem_data(spec);
    int bad = 0;
    for (int t = 0; t < 50; ++t) {
      ShallowNetwork net = random_net(c, 3, rng);
      SampleSet s = sample_set(c.d, 16, 0, rng());
      while (!kink_free(net, s.interior) || !kink_free(net, s.boundary)) s = sample_set(c.d, 16, 0, rng());
      const auto g = loss_gradient(net, c.sys, data, s, Exec::serial);
      auto loss_at = [&](std::size_t j, double v) {
        const double keep = net.params()[j];
        net.params()[j] = v;
        const double L = empirical_loss(network_bundle(c.sys, c.n, net), data, s, Exec::serial).total;
        net.params()[j] = keep;
        return L;
      };
      std::vector<double> fd(g.size());
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = net.params()[j];
        const double d1 = (loss_at(j, x + h) - loss_at(j, x - h)) / (2 * h);
        const double d2 = (loss_at(j, x + h / 2) - loss_at(j, x - h / 2)) / h;
        fd[j] = (4 * d2 - d1) / 3;
      }
      if (rel_err(g, fd) > 1e-5) ++bad;
    }
    EXPECT_EQ(bad, 0) << to_string(c.sys) << " " << to_string(c.kind) << " n=" << c.n << " d=" << c.d;
  }
}

TEST(Gradient, ReturnsMatchingLoss) {
  std::mt19937_64 rng(24);
  for (const Config& c : all_configs()) {
    const ProblemData data = problem_data(spec_for(c));
    const ShallowNetwork net = random_net(c, 4, rng);
    const SampleSet s = sample_set(c.d, 32, 0, 9);
    LossBreakdown L;
    loss_gradient(net, c.sys, data, s, Exec::serial, &L);
    const LossBreakdown E = empirical_loss(network_bundle(c.sys, c.n, net), data, s, Exec::serial);
    EXPECT_NEAR(L.total, E.total, 1e-12 * E.total);
    EXPECT_NEAR(L.boundary, E.boundary, 1e-12 * std::max(1.0, E.boundary));
    EXPECT_NEAR(L.mean_penalty, E.mean_penalty, 1e-12 * std::max(1.0, E.mean_penalty));
  }
}

TEST(Gradient, BoundaryTermLinearInLambda) {
  std::mt19937_64 rng(25);
  for (const Config& c : all_configs()) {
    ProblemData d1 = zero_data(c.n, c.d, c.kind, 1.0, 1.0);
    ProblemData d0 = zero_data(c.n, c.d, c.kind, 0.0, 1.0);
    ProblemData d3 = zero_data(c.n, c.d, c.kind, 3.0, 1.0);
    const ShallowNetwork net = random_net(c, 4, rng);
    const SampleSet s = sample_set(c.d, 20, 0, 4);
    const auto g0 = loss_gradient(net, c.sys, d0, s, Exec::serial);
    const auto g1 = loss_gradient(net, c.sys, d1, s, Exec::serial);
    const auto g3 = loss_gradient(net, c.sys, d3, s, Exec::serial);
    for (std::size_t j = 0; j < g0.size(); ++j) {
      const double b1 = g1[j] - g0[j], b3 = g3[j] - g0[j];
      EXPECT_NEAR(b3, 3 * b1, 1e-10 * std::max(1.0, std::abs(b3)));
    }
  }
}

TEST(Gradient, ZeroResidualNetworkHasZeroGradient) {
  // u = 0 solves the zero-data problem; so does the zero network.
  for (const Config& c : all_configs()) {
    const int p = FieldBundle::width_for(c.sys, c.n, c.d);
    ShallowNetwork net(activation_for(c.sys), c.d, p, 3, 1.0);
    for (int i = 0; i < 3; ++i) {
      net.W(i)[0] = 0.5;
      net.b(i) = 0.1 * i;
    }
    const auto g = loss_gradient(net, c.sys, zero_data(c.n, c.d, c.kind), sample_set(c.d, 16, 0, 1));
    for (double v : g) EXPECT_EQ(v, 0.0);
  }
}

TEST(Gradient, RejectsReluForSecondOrder) {
  ShallowNetwork net(ActivationPower(1), 1, 1, 2, 1.0);
  EXPECT_THROW(loss_gradient(net, System::second_order, zero_data(1, 1, BoundaryKind::dirichlet),
                             sample_set(1, 4, 0, 1)),
               UnsupportedDerivative);
}

TEST(Kernels, SerialAndParallelAgree) {
  std::mt19937_64 rng(26);
  for (const Config& c : all_configs()) {
    const ProblemData data = problem_data(spec_for(c));
    const ShallowNetwork net = random_net(c, 8, rng);
    const SampleSet s = sample_set(c.d, 3000, 0, 8);
    const auto gs = loss_gradient(net, c.sys, data, s, Exec::serial);
    const auto gp = loss_gradient(net, c.sys, data, s, Exec::parallel);
    EXPECT_LE(rel_err(gp, gs), 1e-12);
    const auto u = network_bundle(c.sys, c.n, net);
    const double ls = empirical_loss(u, data, s, Exec::serial).total;
    EXPECT_NEAR(empirical_loss(u, data, s, Exec::parallel).total, ls, 1e-12 * ls);
  }
}
