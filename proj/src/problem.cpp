#include "mim/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace mim {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

SpectralFunction::SpectralFunction(int d, std::vector<Mode> modes) : d_(d), modes_(std::move(modes)) {
  if (d < 1) throw std::invalid_argument("spectral function needs d >= 1");
  std::set<std::vector<int>> seen;
  for (const auto& m : modes_) {
    if (static_cast<int>(m.k.size()) != d) throw DimensionMismatch("mode index has wrong length");
    for (int ki : m.k) {
      if (ki < 0) throw std::invalid_argument("mode indices must be nonnegative");
    }
    if (!seen.insert(m.k).second) throw std::invalid_argument("repeated mode index");
  }
}

double SpectralFunction::eval(std::span<const double> x, double* grad, double* hess) const {
  if (static_cast<int>(x.size()) != d_) throw DimensionMismatch("point has wrong dimension");
  const int d = d_;
  if (grad) std::fill(grad, grad + d, 0.0);
  if (hess) std::fill(hess, hess + static_cast<std::size_t>(d) * d, 0.0);
  double v = 0.0;
  double cs[16], sn[16], fk[16];
  std::vector<double> heap;
  double* c = cs;
  double* s = sn;
  double* w = fk;
  if (d > 16) {
    heap.resize(3 * static_cast<std::size_t>(d));
    c = heap.data();
    s = c + d;
    w = s + d;
  }
  for (const auto& m : modes_) {
    double prod = m.coeff;
    for (int i = 0; i < d; ++i) {
      w[i] = kPi * m.k[i];
      c[i] = std::cos(w[i] * x[i]);
      s[i] = std::sin(w[i] * x[i]);
      prod *= c[i];
    }
    v += prod;
    if (!grad && !hess) continue;
    // Products with one or two factors swapped; avoids dividing by a zero cosine.
    for (int l = 0; l < d; ++l) {
      double gl = m.coeff * (-w[l] * s[l]);
      for (int i = 0; i < d; ++i) {
        if (i != l) gl *= c[i];
      }
      if (grad) grad[l] += gl;
      if (!hess) continue;
      for (int r = 0; r < d; ++r) {
        double h = m.coeff;
        if (r == l) {
          h *= -w[l] * w[l];
          for (int i = 0; i < d; ++i) {
            if (i != l) h *= c[i];
          }
          h *= c[l];
        } else {
          h *= w[l] * s[l] * w[r] * s[r];
          for (int i = 0; i < d; ++i) {
            if (i != l && i != r) h *= c[i];
          }
        }
        hess[static_cast<std::size_t>(l) * d + r] += h;
      }
    }
  }
  return v;
}

double SpectralFunction::value(std::span<const double> x) const { return eval(x, nullptr, nullptr); }

double SpectralFunction::laplacian(std::span<const double> x) const {
  return laplacian_power(*this, 1).value(x);
}

bool SpectralFunction::has_constant_mode() const {
  for (const auto& m : modes_) {
    if (mode_l1(m) == 0.0 && m.coeff != 0.0) return true;
  }
  return false;
}

double mode_l1(const Mode& m) {
  double s = 0.0;
  for (int ki : m.k) s += ki;
  return s;
}

double mode_l2_sq(const Mode& m) {
  double s = 0.0;
  for (int ki : m.k) s += static_cast<double>(ki) * ki;
  return s;
}

SpectralFunction laplacian_power(const SpectralFunction& u, int j) {
  if (j < 0) throw std::invalid_argument("laplacian power must be >= 0");
  std::vector<Mode> modes = u.modes();
  for (auto& m : modes) {
    const double factor = -kPi * kPi * mode_l2_sq(m);
    for (int t = 0; t < j; ++t) m.coeff *= factor;
  }
  return SpectralFunction(u.dim(), std::move(modes));
}

SpectralFunction scale(const SpectralFunction& u, double c) {
  std::vector<Mode> modes = u.modes();
  for (auto& m : modes) m.coeff *= c;
  return SpectralFunction(u.dim(), std::move(modes));
}

double barron_norm(const SpectralFunction& u, double s) {
  if (s < 0.0) throw std::invalid_argument("Barron smoothness s must be >= 0");
  double total = 0.0;
  for (const auto& m : u.modes()) {
    const double k1 = mode_l1(m);
    const double weight = k1 == 0.0 ? 1.0 : 1.0 + std::pow(kPi, s) * std::pow(k1, s);
    total += weight * std::abs(m.coeff);
  }
  return total;
}

void ProblemSpec::validate() const {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (u_star.dim() != d) throw std::invalid_argument("u_star dimension does not match d");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (kind == BoundaryKind::neumann && u_star.has_constant_mode()) {
    throw std::invalid_argument("Neumann problems need a zero-mean u_star (no constant mode)");
  }
}

namespace {

class ExactSource final : public FieldSource {
 public:
  ExactSource(System system, const ProblemSpec& spec) : system_(system), n_(spec.n), d_(spec.d) {
    for (int k = 0; k <= spec.n; ++k) powers_.push_back(laplacian_power(spec.u_star, k));
  }
  int width() const override { return FieldBundle::width_for(system_, n_, d_); }
  int dim() const override { return d_; }
  bool has_laplacian() const override { return true; }

  void evaluate(std::span<const double> x, Derivs derivs, FieldEval& out) const override {
    const int d = d_;
    const int p = width();
    const bool jac = derivs != Derivs::value;
    const bool lap = derivs == Derivs::laplacian;
    out.y.assign(static_cast<std::size_t>(p), 0.0);
    if (jac) out.jac.assign(static_cast<std::size_t>(p) * d, 0.0);
    if (lap) out.lap.assign(static_cast<std::size_t>(p), 0.0);
    std::vector<double> g(static_cast<std::size_t>(d)), h(static_cast<std::size_t>(d) * d);
    std::vector<double> g1(static_cast<std::size_t>(d));
    for (int k = 0; k < n_; ++k) {
      if (system_ == System::second_order) {
        out.y[k] = powers_[k].eval(x, g.data(), nullptr);
        if (jac) std::copy(g.begin(), g.end(), out.jac.begin() + static_cast<std::ptrdiff_t>(k) * d);
        if (lap) out.lap[k] = powers_[k + 1].value(x);
        continue;
      }
      const int phi = k * (d + 1);
      out.y[phi] = powers_[k].eval(x, g.data(), jac ? h.data() : nullptr);
      for (int l = 0; l < d; ++l) out.y[phi + 1 + l] = g[l];
      if (jac) {
        for (int l = 0; l < d; ++l) out.jac[static_cast<std::size_t>(phi) * d + l] = g[l];
        for (int l = 0; l < d; ++l) {
          for (int r = 0; r < d; ++r) {
            out.jac[static_cast<std::size_t>(phi + 1 + l) * d + r] = h[static_cast<std::size_t>(l) * d + r];
          }
        }
      }
      if (lap) {
        out.lap[phi] = powers_[k + 1].eval(x, g1.data(), nullptr);
        for (int l = 0; l < d; ++l) out.lap[phi + 1 + l] = g1[l];
      }
    }
  }

 private:
  System system_;
  int n_;
  int d_;
  std::vector<SpectralFunction> powers_;
};

}  // namespace

FieldBundle exact_bundle(const ProblemSpec& spec, System system) {
  spec.validate();
  return FieldBundle(system, spec.n, std::make_shared<ExactSource>(system, spec));
}

SpectralFunction data_f(const ProblemSpec& spec) { return laplacian_power(spec.u_star, spec.n); }

BoundaryData data_g(const ProblemSpec& spec) {
  std::vector<SpectralFunction> powers;
  for (int k = 0; k < spec.n; ++k) powers.push_back(laplacian_power(spec.u_star, k));
  const BoundaryKind kind = spec.kind;
  const int d = spec.d;
  return [powers = std::move(powers), kind, d](std::span<const double> x,
                                               std::span<const double> normal,
                                               std::span<double> out) {
    std::vector<double> g(static_cast<std::size_t>(d));
    for (std::size_t k = 0; k < powers.size(); ++k) {
      const double v = powers[k].eval(x, g.data(), nullptr);
      double t = 0.0;
      if (kind != BoundaryKind::neumann) t += v;
      if (kind != BoundaryKind::dirichlet) {
        for (int l = 0; l < d; ++l) t += normal[l] * g[l];
      }
      out[k] = t;
    }
  };
}

ProblemData problem_data(const ProblemSpec& spec) {
  spec.validate();
  ProblemData data;
  data.n = spec.n;
  data.d = spec.d;
  data.kind = spec.kind;
  data.lambda = spec.lambda;
  data.mu = spec.mu;
  data.f = data_f(spec);
  data.g = data_g(spec);
  return data;
}

ProblemData zero_data(int n, int d, BoundaryKind kind, double lambda, double mu) {
  ProblemData data;
  data.n = n;
  data.d = d;
  data.kind = kind;
  data.lambda = lambda;
  data.mu = mu;
  data.f = SpectralFunction(d, {});
  data.g = [n](std::span<const double>, std::span<const double>, std::span<double> out) {
    for (int k = 0; k < n; ++k) out[k] = 0.0;
  };
  return data;
}

const char* to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::dirichlet: return "dirichlet";
    case BoundaryKind::neumann: return "neumann";
    case BoundaryKind::robin: return "robin";
  }
  return "?";
}

BoundaryKind boundary_kind_from_string(const std::string& s) {
  if (s == "dirichlet" || s == "D") return BoundaryKind::dirichlet;
  if (s == "neumann" || s == "N") return BoundaryKind::neumann;
  if (s == "robin" || s == "R") return BoundaryKind::robin;
  throw std::invalid_argument("unknown boundary kind: " + s);
}

const char* to_string(System system) {
  return system == System::first_order ? "first" : "second";
}

System system_from_string(const std::string& s) {
  if (s == "first" || s == "first_order") return System::first_order;
  if (s == "second" || s == "second_order") return System::second_order;
  throw std::invalid_argument("unknown system: " + s);
}

}  // namespace mim
