#include "mim/fields.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mim {

namespace {

void require_interior_derivs(const FieldBundle& b) {
  if (b.system() == System::second_order && !b.source().has_laplacian()) {
    throw UnsupportedDerivative("second-order system needs Laplacians (ReLU^k with k >= 2)");
  }
}

void check_point(const FieldBundle& b, std::span<const double> x) {
  if (static_cast<int>(x.size()) != b.dim()) throw DimensionMismatch("point has wrong dimension");
}

}  // namespace

FieldBundle::FieldBundle(System system, int n, std::shared_ptr<const FieldSource> source)
    : system_(system), n_(n), source_(std::move(source)) {
  if (!source_) throw std::invalid_argument("bundle needs a field source");
  if (n < 1) throw std::invalid_argument("bundle order n must be >= 1");
  if (source_->width() != width_for(system, n, source_->dim())) {
    throw DimensionMismatch("source width " + std::to_string(source_->width()) +
                            " does not match bundle width " +
                            std::to_string(width_for(system, n, source_->dim())));
  }
}

int FieldBundle::width_for(System system, int n, int d) {
  return system == System::first_order ? n * (d + 1) : n;
}

FieldBundle network_bundle(System system, int n, std::shared_ptr<const ShallowNetwork> net) {
  return FieldBundle(system, n, std::make_shared<NetworkSource>(std::move(net)));
}

FieldBundle network_bundle(System system, int n, ShallowNetwork net) {
  return network_bundle(system, n, std::make_shared<const ShallowNetwork>(std::move(net)));
}

FieldBundle zero_bundle(System system, int n, int d) {
  const int p = FieldBundle::width_for(system, n, d);
  auto fn = [p, d](std::span<const double>, Derivs derivs, FieldEval& e) {
    e.y.assign(static_cast<std::size_t>(p), 0.0);
    if (derivs != Derivs::value) e.jac.assign(static_cast<std::size_t>(p) * d, 0.0);
    if (derivs == Derivs::laplacian) e.lap.assign(static_cast<std::size_t>(p), 0.0);
  };
  return FieldBundle(system, n, std::make_shared<FunctionSource>(p, d, true, fn));
}

Derivs residual_derivs(System system) {
  return system == System::first_order ? Derivs::gradient : Derivs::laplacian;
}

Derivs trace_derivs(System system, BoundaryKind kind) {
  if (system == System::second_order && kind != BoundaryKind::dirichlet) return Derivs::gradient;
  return Derivs::value;
}

int residual_width(System system, int n, int d) { return FieldBundle::width_for(system, n, d); }

void residual_from_eval(System system, int n, int d, const FieldEval& e, std::span<double> out) {
  if (system == System::second_order) {
    for (int k = 0; k < n; ++k) {
      out[k] = e.lap[k] - (k + 1 < n ? e.y[k + 1] : 0.0);
    }
    return;
  }
  const int s = d + 1;
  for (int k = 0; k < n; ++k) {
    const int phi = k * s;
    double* r = out.data() + k * s;
    for (int l = 0; l < d; ++l) {
      r[l] = e.jac[static_cast<std::size_t>(phi) * d + l] - e.y[phi + 1 + l];
    }
    double div = 0.0;
    for (int l = 0; l < d; ++l) div += e.jac[static_cast<std::size_t>(phi + 1 + l) * d + l];
    r[d] = div - (k + 1 < n ? e.y[phi + s] : 0.0);
  }
}

void trace_from_eval(System system, int n, int d, const FieldEval& e,
                     std::span<const double> normal, BoundaryKind kind, std::span<double> out) {
  const bool dir = kind != BoundaryKind::neumann;
  const bool neu = kind != BoundaryKind::dirichlet;
  for (int k = 0; k < n; ++k) {
    double t = 0.0;
    if (system == System::first_order) {
      const int phi = k * (d + 1);
      if (dir) t += e.y[phi];
      if (neu) {
        for (int l = 0; l < d; ++l) t += normal[l] * e.y[phi + 1 + l];
      }
    } else {
      if (dir) t += e.y[k];
      if (neu) {
        for (int l = 0; l < d; ++l) t += normal[l] * e.jac[static_cast<std::size_t>(k) * d + l];
      }
    }
    out[k] = t;
  }
}

std::vector<double> apply_P(const FieldBundle& bundle, std::span<const double> x) {
  if (bundle.system() != System::first_order) {
    throw std::invalid_argument("apply_P needs a first-order bundle");
  }
  check_point(bundle, x);
  FieldEval e;
  bundle.source().evaluate(x, Derivs::gradient, e);
  std::vector<double> r(static_cast<std::size_t>(bundle.width()));
  residual_from_eval(System::first_order, bundle.order(), bundle.dim(), e, r);
  return r;
}

std::vector<double> apply_Pstar(const FieldBundle& bundle, std::span<const double> x) {
  if (bundle.system() != System::second_order) {
    throw std::invalid_argument("apply_Pstar needs a second-order bundle");
  }
  require_interior_derivs(bundle);
  check_point(bundle, x);
  FieldEval e;
  bundle.source().evaluate(x, Derivs::laplacian, e);
  std::vector<double> r(static_cast<std::size_t>(bundle.order()));
  residual_from_eval(System::second_order, bundle.order(), bundle.dim(), e, r);
  return r;
}

namespace {

std::vector<double> trace_impl(System system, const FieldBundle& bundle, const BoundaryPoint& xb,
                               BoundaryKind kind) {
  if (bundle.system() != system) throw std::invalid_argument("trace does not match bundle system");
  check_point(bundle, xb.coords);
  if (static_cast<int>(xb.normal.size()) != bundle.dim()) {
    throw DimensionMismatch("normal has wrong dimension");
  }
  FieldEval e;
  bundle.source().evaluate(xb.coords, trace_derivs(system, kind), e);
  std::vector<double> t(static_cast<std::size_t>(bundle.order()));
  trace_from_eval(system, bundle.order(), bundle.dim(), e, xb.normal, kind, t);
  return t;
}

}  // namespace

std::vector<double> trace_first(const FieldBundle& bundle, const BoundaryPoint& xb,
                                BoundaryKind kind) {
  return trace_impl(System::first_order, bundle, xb, kind);
}

std::vector<double> trace_second(const FieldBundle& bundle, const BoundaryPoint& xb,
                                 BoundaryKind kind) {
  return trace_impl(System::second_order, bundle, xb, kind);
}

double ErrorNorms::total() const {
  double s = 0.0;
  for (double v : h1_sq) s += v;
  for (double v : hdiv_sq) s += v;
  return s;
}

double ErrorNorms::relative_h1() const {
  if (h1_sq.empty()) return 0.0;
  return std::sqrt(h1_sq[0] / ref_h1_sq[0]);
}

ErrorNorms error_norms(const FieldBundle& approx, const FieldBundle& exact, const PointSet& grid,
                       Exec exec) {
  if (approx.system() != exact.system() || approx.order() != exact.order() ||
      approx.dim() != exact.dim()) {
    throw DimensionMismatch("bundles differ in system, order or dimension");
  }
  if (grid.size() == 0) throw std::invalid_argument("error_norms needs a nonempty grid");
  if (grid.d != approx.dim()) throw DimensionMismatch("grid dimension does not match bundle");
  require_interior_derivs(approx);
  require_interior_derivs(exact);

  const System sys = approx.system();
  const int n = approx.order();
  const int d = approx.dim();
  const Derivs level = residual_derivs(sys);
  struct Scratch {
    FieldEval a, e;
  };
  const auto acc = reduce_vector(
      grid.size(), static_cast<std::size_t>(3 * n), exec, [] { return Scratch{}; },
      [&](std::size_t i, Scratch& s, double* out) {
        const auto x = grid.point(i);
        const double w = grid.weights[i];
        approx.source().evaluate(x, level, s.a);
        exact.source().evaluate(x, level, s.e);
        const auto& A = s.a;
        const auto& E = s.e;
        for (int k = 0; k < n; ++k) {
          const int phi = sys == System::first_order ? k * (d + 1) : k;
          const double ev = A.y[phi] - E.y[phi];
          double g2 = 0.0;
          double rg2 = 0.0;
          for (int l = 0; l < d; ++l) {
            const std::size_t idx = static_cast<std::size_t>(phi) * d + l;
            const double dg = A.jac[idx] - E.jac[idx];
            g2 += dg * dg;
            rg2 += E.jac[idx] * E.jac[idx];
          }
          double hd = 0.0;
          if (sys == System::first_order) {
            double div = 0.0;
            for (int l = 0; l < d; ++l) {
              const int c = phi + 1 + l;
              const double dv = A.y[c] - E.y[c];
              hd += dv * dv;
              const std::size_t idx = static_cast<std::size_t>(c) * d + l;
              div += A.jac[idx] - E.jac[idx];
            }
            hd += div * div;
          } else {
            const double dl = A.lap[k] - E.lap[k];
            hd = g2 + dl * dl;
          }
          out[k] += w * (ev * ev + g2);
          out[n + k] += w * hd;
          out[2 * n + k] += w * (E.y[phi] * E.y[phi] + rg2);
        }
      });
  ErrorNorms r;
  r.h1_sq.assign(acc.begin(), acc.begin() + n);
  r.hdiv_sq.assign(acc.begin() + n, acc.begin() + 2 * n);
  r.ref_h1_sq.assign(acc.begin() + 2 * n, acc.end());
  return r;
}

ErrorNorms bundle_norms(const FieldBundle& bundle, const PointSet& grid, Exec exec) {
  return error_norms(bundle, zero_bundle(bundle.system(), bundle.order(), bundle.dim()), grid,
                     exec);
}

std::vector<double> boundary_flux_norms(const FieldBundle& bundle, const PointSet& boundary,
                                        Exec exec) {
  const System sys = bundle.system();
  const int n = bundle.order();
  const int d = bundle.dim();
  const Derivs level = sys == System::first_order ? Derivs::value : Derivs::gradient;
  auto acc = reduce_vector(
      boundary.size(), static_cast<std::size_t>(n), exec, [] { return FieldEval{}; },
      [&](std::size_t i, FieldEval& e, double* out) {
        bundle.source().evaluate(boundary.point(i), level, e);
        for (int k = 0; k < n; ++k) {
          double s = 0.0;
          for (int l = 0; l < d; ++l) {
            const double v = sys == System::first_order
                                 ? e.y[k * (d + 1) + 1 + l]
                                 : e.jac[static_cast<std::size_t>(k) * d + l];
            s += v * v;
          }
          out[k] += boundary.weights[i] * s;
        }
      });
  for (double& v : acc) v = std::sqrt(v);
  return acc;
}

}  // namespace mim
