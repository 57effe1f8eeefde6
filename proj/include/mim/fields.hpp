#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mim/kernels.hpp"
#include "mim/network.hpp"
#include "mim/quadrature.hpp"

namespace mim {

enum class BoundaryKind { dirichlet, neumann, robin };
enum class System { first_order, second_order };

/// Values, p x d Jacobian and per-component Laplacians at one point.
using FieldEval = NetworkEval;

/// Anything that can be evaluated pointwise with input derivatives.
class FieldSource {
 public:
  virtual ~FieldSource() = default;
  virtual int width() const = 0;
  virtual int dim() const = 0;
  virtual bool has_laplacian() const = 0;
  virtual void evaluate(std::span<const double> x, Derivs derivs, FieldEval& out) const = 0;
};

class NetworkSource final : public FieldSource {
 public:
  explicit NetworkSource(std::shared_ptr<const ShallowNetwork> net) : net_(std::move(net)) {}
  int width() const override { return net_->output_dim(); }
  int dim() const override { return net_->input_dim(); }
  bool has_laplacian() const override { return net_->activation().value() >= 2; }
  void evaluate(std::span<const double> x, Derivs derivs, FieldEval& out) const override {
    mim::evaluate(*net_, x, derivs, out);
  }
  const ShallowNetwork& network() const { return *net_; }

 private:
  std::shared_ptr<const ShallowNetwork> net_;
};

/// Source backed by a callable; used for hand-built fields.
class FunctionSource final : public FieldSource {
 public:
  using Fn = std::function<void(std::span<const double>, Derivs, FieldEval&)>;
  FunctionSource(int width, int dim, bool has_laplacian, Fn fn)
      : width_(width), dim_(dim), lap_(has_laplacian), fn_(std::move(fn)) {}
  int width() const override { return width_; }
  int dim() const override { return dim_; }
  bool has_laplacian() const override { return lap_; }
  void evaluate(std::span<const double> x, Derivs derivs, FieldEval& out) const override {
    fn_(x, derivs, out);
  }

 private:
  int width_;
  int dim_;
  bool lap_;
  Fn fn_;
};

/// Field bank for either system.
///
/// first_order: components (phi_0, psi_0[0..d), phi_1, psi_1, ...), width n(d+1).
/// second_order: components (phi_0, ..., phi_{n-1}), width n; Laplacians required.
class FieldBundle {
 public:
  FieldBundle(System system, int n, std::shared_ptr<const FieldSource> source);

  System system() const { return system_; }
  int order() const { return n_; }
  int dim() const { return source_->dim(); }
  int width() const { return source_->width(); }
  const FieldSource& source() const { return *source_; }
  std::shared_ptr<const FieldSource> source_ptr() const { return source_; }

  static int width_for(System system, int n, int d);

 private:
  System system_;
  int n_;
  std::shared_ptr<const FieldSource> source_;
};

FieldBundle network_bundle(System system, int n, ShallowNetwork net);
FieldBundle network_bundle(System system, int n, std::shared_ptr<const ShallowNetwork> net);
/// Identically zero bundle.
FieldBundle zero_bundle(System system, int n, int d);

/// Derivative level the residual of `system` needs.
Derivs residual_derivs(System system);
/// Derivative level the boundary trace needs.
Derivs trace_derivs(System system, BoundaryKind kind);
int residual_width(System system, int n, int d);

/// Residual from a precomputed evaluation; `out` has residual_width entries.
///   first_order:  (grad phi_0 - psi_0, div psi_0 - phi_1, ..., grad phi_{n-1} - psi_{n-1}, div psi_{n-1})
///   second_order: (lap phi_0 - phi_1, ..., lap phi_{n-1})
void residual_from_eval(System system, int n, int d, const FieldEval& e, std::span<double> out);
/// Dirichlet: values. Neumann: normal fluxes. Robin: their sum. `out` has n entries.
void trace_from_eval(System system, int n, int d, const FieldEval& e,
                     std::span<const double> normal, BoundaryKind kind, std::span<double> out);

std::vector<double> apply_P(const FieldBundle& bundle, std::span<const double> x);
std::vector<double> apply_Pstar(const FieldBundle& bundle, std::span<const double> x);
std::vector<double> trace_first(const FieldBundle& bundle, const BoundaryPoint& xb,
                                BoundaryKind kind);
std::vector<double> trace_second(const FieldBundle& bundle, const BoundaryPoint& xb,
                                 BoundaryKind kind);

/// Per-component squared error norms of a bundle against a reference.
///
/// h1_sq[k]   = |phi_k - phi*_k|^2_{H1}
/// hdiv_sq[k] = |psi_k - psi*_k|^2_{H(div)} (first order), or
///              |grad(phi_k - phi*_k)|^2 + |lap(phi_k - phi*_k)|^2 (second order)
/// ref_h1_sq[k] is |phi*_k|^2_{H1}, for relative errors.
struct ErrorNorms {
  std::vector<double> h1_sq;
  std::vector<double> hdiv_sq;
  std::vector<double> ref_h1_sq;

  double total() const;
  /// |phi_0 - phi*_0|_{H1} / |phi*_0|_{H1}
  double relative_h1() const;
};

ErrorNorms error_norms(const FieldBundle& approx, const FieldBundle& exact, const PointSet& grid,
                       Exec exec = Exec::parallel);
/// Same norms of the bundle itself.
ErrorNorms bundle_norms(const FieldBundle& bundle, const PointSet& grid, Exec exec = Exec::parallel);

/// Per-k boundary L2 norms of psi_k (first order) or grad phi_k (second order).
std::vector<double> boundary_flux_norms(const FieldBundle& bundle, const PointSet& boundary,
                                        Exec exec = Exec::parallel);

}  // namespace mim
