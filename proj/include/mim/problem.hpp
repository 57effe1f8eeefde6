#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mim/fields.hpp"

namespace mim {

/// One cosine mode coeff * prod_i cos(pi k_i x_i).
struct Mode {
  std::vector<int> k;
  double coeff = 0.0;
};

/// Finite cosine expansion on [0,1]^d.
class SpectralFunction {
 public:
  SpectralFunction() = default;
  /// Throws on repeated or negative multi-indices or a length mismatch.
  SpectralFunction(int d, std::vector<Mode> modes);

  int dim() const { return d_; }
  const std::vector<Mode>& modes() const { return modes_; }

  double value(std::span<const double> x) const;
  /// Any of grad (d), hess (d x d) may be null.
  double eval(std::span<const double> x, double* grad, double* hess) const;
  double laplacian(std::span<const double> x) const;

  bool has_constant_mode() const;

 private:
  int d_ = 0;
  std::vector<Mode> modes_;
};

double mode_l1(const Mode& m);
double mode_l2_sq(const Mode& m);

/// Coefficients times (-pi^2 |k|_2^2)^j.
SpectralFunction laplacian_power(const SpectralFunction& u, int j);
SpectralFunction scale(const SpectralFunction& u, double c);

/// sum_k (1 + pi^s |k|_1^s) |u_k|.
double barron_norm(const SpectralFunction& u, double s);

struct ProblemSpec {
  int n = 1;
  int d = 1;
  BoundaryKind kind = BoundaryKind::dirichlet;
  SpectralFunction u_star;
  double lambda = 1.0;
  double mu = 1.0;

  /// Throws std::invalid_argument when the problem is inconsistent.
  void validate() const;
};

/// g(x, normal) -> n traces.
using BoundaryData =
    std::function<void(std::span<const double> x, std::span<const double> normal, std::span<double> out)>;

/// Everything a loss needs: the form parameters plus f and g.
struct ProblemData {
  int n = 1;
  int d = 1;
  BoundaryKind kind = BoundaryKind::dirichlet;
  double lambda = 1.0;
  double mu = 1.0;
  SpectralFunction f;
  BoundaryData g;
};

/// Closed-form fields of u*: phi_k = lap^k u*, psi_k = grad lap^k u*.
FieldBundle exact_bundle(const ProblemSpec& spec, System system);
SpectralFunction data_f(const ProblemSpec& spec);
/// Dirichlet: lap^k u*. Neumann: d/dn lap^k u*. Robin: the sum.
BoundaryData data_g(const ProblemSpec& spec);
ProblemData problem_data(const ProblemSpec& spec);
/// f = 0, g = 0 with the same form parameters.
ProblemData zero_data(int n, int d, BoundaryKind kind, double lambda = 1.0, double mu = 1.0);

const char* to_string(BoundaryKind kind);
BoundaryKind boundary_kind_from_string(const std::string& s);
const char* to_string(System system);
System system_from_string(const std::string& s);

}  // namespace mim
