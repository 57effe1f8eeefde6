#include "mim/loss.hpp"

#include <algorithm>
#include <stdexcept>

namespace mim {

namespace {

void check_compat(const FieldBundle& b, const ProblemData& data) {
  if (b.order() != data.n || b.dim() != data.d) {
    throw DimensionMismatch("bundle order/dimension does not match the problem");
  }
  if (b.system() == System::second_order && !b.source().has_laplacian()) {
    throw UnsupportedDerivative("second-order loss needs Laplacians (ReLU^k with k >= 2)");
  }
}

void check_sets(const PointSet& interior, const PointSet& boundary, int d) {
  if (interior.size() == 0 || boundary.size() == 0) {
    throw std::invalid_argument("loss needs nonempty interior and boundary point sets");
  }
  if (interior.d != d || boundary.d != d || !boundary.on_boundary()) {
    throw DimensionMismatch("point sets do not match the problem dimension");
  }
}

struct Scratch {
  FieldEval e;
  std::vector<double> r;
  std::vector<double> g;
  std::vector<double> normal;
};

Scratch make_scratch(int rw, int n, int d) {
  Scratch s;
  s.r.resize(static_cast<std::size_t>(rw));
  s.g.resize(static_cast<std::size_t>(n));
  s.normal.resize(static_cast<std::size_t>(d));
  return s;
}

void fill_normal(const PointSet& set, std::size_t i, std::vector<double>& normal) {
  std::fill(normal.begin(), normal.end(), 0.0);
  const int f = set.faces[i];
  normal[face_axis(f)] = face_sign(f);
}

}  // namespace

LossBreakdown integrate_loss(const FieldBundle& bundle, const ProblemData& data,
                             const PointSet& interior, const PointSet& boundary, Exec exec) {
  check_compat(bundle, data);
  check_sets(interior, boundary, data.d);
  const System sys = bundle.system();
  const int n = data.n;
  const int d = data.d;
  const int rw = residual_width(sys, n, d);
  const Derivs level = residual_derivs(sys);
  const bool neumann = data.kind == BoundaryKind::neumann;

  // acc[0] = interior residual, acc[1] = weighted mean of phi_0.
  const auto in = reduce_vector(
      interior.size(), 2, exec, [&] { return make_scratch(rw, n, d); },
      [&](std::size_t i, Scratch& s, double* acc) {
        const auto x = interior.point(i);
        bundle.source().evaluate(x, level, s.e);
        residual_from_eval(sys, n, d, s.e, s.r);
        s.r[rw - 1] -= data.f.value(x);
        double r2 = 0.0;
        for (double v : s.r) r2 += v * v;
        acc[0] += interior.weights[i] * r2;
        acc[1] += interior.weights[i] * s.e.y[0];
      });

  const Derivs tlevel = trace_derivs(sys, data.kind);
  const double bd = reduce_sum(
      boundary.size(), exec, [&] { return make_scratch(n, n, d); },
      [&](std::size_t i, Scratch& s) {
        const auto x = boundary.point(i);
        fill_normal(boundary, i, s.normal);
        bundle.source().evaluate(x, tlevel, s.e);
        trace_from_eval(sys, n, d, s.e, s.normal, data.kind, s.r);
        data.g(x, s.normal, s.g);
        double t2 = 0.0;
        for (int k = 0; k < n; ++k) {
          const double e = s.r[k] - s.g[k];
          t2 += e * e;
        }
        return boundary.weights[i] * t2;
      });

  LossBreakdown L;
  L.interior = in[0];
  L.boundary = data.lambda * bd;
  L.mean_penalty = neumann ? data.mu * in[1] * in[1] : 0.0;
  L.total = L.interior + L.boundary + L.mean_penalty;
  return L;
}

LossBreakdown expected_loss(const FieldBundle& bundle, const ProblemData& data,
                            const QuadGrid& grid, Exec exec) {
  return integrate_loss(bundle, data, grid.interior, grid.boundary, exec);
}

LossBreakdown empirical_loss(const FieldBundle& bundle, const ProblemData& data,
                             const SampleSet& samples, Exec exec) {
  return integrate_loss(bundle, data, samples.interior, samples.boundary, exec);
}

double bilinear_form(const FieldBundle& u, const FieldBundle& w, const ProblemData& data,
                     const QuadGrid& grid, Exec exec) {
  if (u.system() != w.system()) throw std::invalid_argument("bundles use different systems");
  check_compat(u, data);
  check_compat(w, data);
  check_sets(grid.interior, grid.boundary, data.d);
  const System sys = u.system();
  const int n = data.n;
  const int d = data.d;
  const int rw = residual_width(sys, n, d);
  const Derivs level = residual_derivs(sys);
  // B(u, u) evaluates the source once per point.
  const bool same = &u.source() == &w.source();
  struct Pair {
    Scratch a, b;
  };
  auto make_pair = [&] { return Pair{make_scratch(rw, n, d), make_scratch(rw, n, d)}; };

  const auto in = reduce_vector(
      grid.interior.size(), 3, exec, make_pair, [&](std::size_t i, Pair& s, double* acc) {
        const auto x = grid.interior.point(i);
        u.source().evaluate(x, level, s.a.e);
        residual_from_eval(sys, n, d, s.a.e, s.a.r);
        Scratch& b = same ? s.a : s.b;
        if (!same) {
          w.source().evaluate(x, level, b.e);
          residual_from_eval(sys, n, d, b.e, b.r);
        }
        double dot = 0.0;
        for (int j = 0; j < rw; ++j) dot += s.a.r[j] * b.r[j];
        const double wt = grid.interior.weights[i];
        acc[0] += wt * dot;
        acc[1] += wt * s.a.e.y[0];
        acc[2] += wt * b.e.y[0];
      });

  const Derivs tlevel = trace_derivs(sys, data.kind);
  const double bd = reduce_sum(grid.boundary.size(), exec, make_pair, [&](std::size_t i, Pair& s) {
    const auto x = grid.boundary.point(i);
    fill_normal(grid.boundary, i, s.a.normal);
    u.source().evaluate(x, tlevel, s.a.e);
    trace_from_eval(sys, n, d, s.a.e, s.a.normal, data.kind, s.a.r);
    Scratch& b = same ? s.a : s.b;
    if (!same) {
      w.source().evaluate(x, tlevel, b.e);
      trace_from_eval(sys, n, d, b.e, s.a.normal, data.kind, b.r);
    }
    double dot = 0.0;
    for (int k = 0; k < n; ++k) dot += s.a.r[k] * b.r[k];
    return grid.boundary.weights[i] * dot;
  });

  double value = in[0] + data.lambda * bd;
  if (data.kind == BoundaryKind::neumann) value += data.mu * in[1] * in[2];
  return value;
}

std::vector<double> loss_gradient(const ShallowNetwork& net, System system,
                                  const ProblemData& data, const PointSet& interior,
                                  const PointSet& boundary, Exec exec, LossBreakdown* loss) {
  const int n = data.n;
  const int d = data.d;
  const int p = FieldBundle::width_for(system, n, d);
  if (net.input_dim() != d || net.output_dim() != p) {
    throw DimensionMismatch("network shape does not match the bundle layout");
  }
  if (system == System::second_order && net.activation().value() < 2) {
    throw UnsupportedDerivative("second-order loss needs ReLU^k with k >= 2");
  }
  check_sets(interior, boundary, d);
  const int rw = residual_width(system, n, d);
  const Derivs level = residual_derivs(system);
  const bool neumann = data.kind == BoundaryKind::neumann;
  const std::size_t P = net.param_count();

  // The mean penalty couples all interior points, so its mean comes first.
  double mean = 0.0;
  if (neumann) {
    mean = reduce_sum(
        interior.size(), exec, [] { return NetworkEval{}; },
        [&](std::size_t i, NetworkEval& e) {
          evaluate(net, interior.point(i), Derivs::value, e);
          return interior.weights[i] * e.y[0];
        });
  }

  struct GradScratch {
    Scratch s;
    std::vector<double> cy, cj, cl;
  };
  auto make = [&] {
    GradScratch g{make_scratch(rw, n, d), {}, {}, {}};
    g.cy.resize(static_cast<std::size_t>(p));
    g.cj.resize(static_cast<std::size_t>(p) * d);
    g.cl.resize(static_cast<std::size_t>(p));
    return g;
  };

  // Slots [0, P) hold the gradient, P the interior loss, P+1 the boundary sum.
  const auto gin = reduce_vector(interior.size(), P + 1, exec, make,
                                 [&](std::size_t i, GradScratch& g, double* acc) {
    const auto x = interior.point(i);
    const double w = interior.weights[i];
    evaluate(net, x, level, g.s.e);
    residual_from_eval(system, n, d, g.s.e, g.s.r);
    g.s.r[rw - 1] -= data.f.value(x);
    std::fill(g.cy.begin(), g.cy.end(), 0.0);
    double r2 = 0.0;
    for (double v : g.s.r) r2 += v * v;
    acc[P] += w * r2;
    if (system == System::first_order) {
      std::fill(g.cj.begin(), g.cj.end(), 0.0);
      const int s = d + 1;
      for (int k = 0; k < n; ++k) {
        const int phi = k * s;
        const double* r = g.s.r.data() + k * s;
        for (int l = 0; l < d; ++l) {
          const double c = 2.0 * w * r[l];
          g.cj[static_cast<std::size_t>(phi) * d + l] += c;
          g.cy[phi + 1 + l] -= c;
        }
        const double c = 2.0 * w * r[d];
        for (int l = 0; l < d; ++l) g.cj[static_cast<std::size_t>(phi + 1 + l) * d + l] += c;
        if (k + 1 < n) g.cy[phi + s] -= c;
      }
      if (neumann) g.cy[0] += 2.0 * data.mu * mean * w;
      accumulate_backprop(net, x, g.cy, g.cj, {}, std::span<double>(acc, P));
    } else {
      for (int k = 0; k < n; ++k) {
        const double c = 2.0 * w * g.s.r[k];
        g.cl[k] = c;
        if (k + 1 < n) g.cy[k + 1] -= c;
      }
      if (neumann) g.cy[0] += 2.0 * data.mu * mean * w;
      accumulate_backprop(net, x, g.cy, {}, g.cl, std::span<double>(acc, P));
    }
  });

  const Derivs tlevel = trace_derivs(system, data.kind);
  const bool dir = data.kind != BoundaryKind::neumann;
  const bool neu = data.kind != BoundaryKind::dirichlet;
  const auto gbd = reduce_vector(boundary.size(), P + 1, exec, make,
                                 [&](std::size_t i, GradScratch& g, double* acc) {
    const auto x = boundary.point(i);
    const double w = data.lambda * boundary.weights[i];
    fill_normal(boundary, i, g.s.normal);
    evaluate(net, x, tlevel, g.s.e);
    trace_from_eval(system, n, d, g.s.e, g.s.normal, data.kind, g.s.r);
    data.g(x, g.s.normal, g.s.g);
    std::fill(g.cy.begin(), g.cy.end(), 0.0);
    const bool use_jac = system == System::second_order && neu;
    if (use_jac) std::fill(g.cj.begin(), g.cj.end(), 0.0);
    double t2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double e = g.s.r[k] - g.s.g[k];
      t2 += e * e;
      const double c = 2.0 * w * e;
      const int phi = system == System::first_order ? k * (d + 1) : k;
      if (dir) g.cy[phi] += c;
      if (!neu) continue;
      for (int l = 0; l < d; ++l) {
        if (system == System::first_order) {
          g.cy[phi + 1 + l] += c * g.s.normal[l];
        } else {
          g.cj[static_cast<std::size_t>(k) * d + l] += c * g.s.normal[l];
        }
      }
    }
    acc[P] += boundary.weights[i] * t2;
    accumulate_backprop(net, x, g.cy, use_jac ? std::span<const double>(g.cj) : std::span<const double>{},
                        {}, std::span<double>(acc, P));
  });

  std::vector<double> grad(gin.begin(), gin.begin() + static_cast<std::ptrdiff_t>(P));
  for (std::size_t j = 0; j < P; ++j) grad[j] += gbd[j];
  if (loss) {
    loss->interior = gin[P];
    loss->boundary = data.lambda * gbd[P];
    loss->mean_penalty = neumann ? data.mu * mean * mean : 0.0;
    loss->total = loss->interior + loss->boundary + loss->mean_penalty;
  }
  return grad;
}

std::vector<double> loss_gradient(const ShallowNetwork& net, System system,
                                  const ProblemData& data, const SampleSet& samples, Exec exec,
                                  LossBreakdown* loss) {
  return loss_gradient(net, system, data, samples.interior, samples.boundary, exec, loss);
}

}  // namespace mim
