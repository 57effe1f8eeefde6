#include "mim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "mim/loss.hpp"
#include "mim/train.hpp"

namespace mim {

PerturbationWeights::PerturbationWeights(double delta, int K) : delta_(delta), K_(K) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (K < 0) throw std::invalid_argument("max index must be >= 0");
}

double PerturbationWeights::operator()(int k) const {
  if (k < 0 || k > K_) throw std::out_of_range("perturbation weight index out of range");
  return std::pow(delta_, k) / (k + 1);
}

double PerturbationWeights::eps(int k) {
  const double k1 = k + 1.0;
  return std::sqrt(k1 * k1 - 1.0) / k1;
}

bool young_holds(const PerturbationWeights& w, int n, int k, double a, double b, double tol) {
  const double lhs = w(k) * a * b;
  const double rhs = 0.5 * PerturbationWeights::eps(2 * n) * (w(k + 1) * a * a + w(k - 1) * b * b);
  return lhs <= rhs + tol;
}

long young_check(double delta, int n, const std::vector<double>& a_grid,
                 const std::vector<double>& b_grid, double tol) {
  if (n < 1) throw std::invalid_argument("young_check needs n >= 1");
  const PerturbationWeights w(delta, 2 * n + 1);
  long fails = 0;
  for (int k = 2; k <= 2 * n; ++k) {
    for (double a : a_grid) {
      for (double b : b_grid) {
        if (!young_holds(w, n, k, a, b, tol)) ++fails;
      }
    }
  }
  return fails;
}

double weighted_energy(const FieldBundle& bundle, double delta, const PointSet& grid, Exec exec) {
  const int n = bundle.order();
  const int d = bundle.dim();
  const System sys = bundle.system();
  const PerturbationWeights w(delta, 2 * n + 1);
  if (sys == System::second_order && !bundle.source().has_laplacian()) {
    throw UnsupportedDerivative("second-order energy needs Laplacians");
  }
  const Derivs level = residual_derivs(sys);
  return reduce_sum(grid.size(), exec, [] { return FieldEval{}; },
                    [&](std::size_t i, FieldEval& e) {
    bundle.source().evaluate(grid.point(i), level, e);
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      if (sys == System::first_order) {
        const int phi = k * (d + 1);
        double div = 0.0, g2 = 0.0, p2 = 0.0;
        for (int l = 0; l < d; ++l) {
          const double gl = e.jac[static_cast<std::size_t>(phi) * d + l];
          g2 += gl * gl;
          p2 += e.y[phi + 1 + l] * e.y[phi + 1 + l];
          div += e.jac[static_cast<std::size_t>(phi + 1 + l) * d + l];
        }
        const int j = 2 * (n - k);
        s += w(j - 1) * div * div + w(j) * g2 + w(j) * p2;
        if (k >= 1) s += w(j + 1) * e.y[phi] * e.y[phi];
      } else {
        if (k >= 1) s += w(n - k + 1) * e.y[k] * e.y[k];
        s += w(n - k) * e.lap[k] * e.lap[k];
      }
    }
    return grid.weights[i] * s;
  });
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t tag) {
  std::seed_seq seq{seed, index, tag};
  std::mt19937_64 rng(seq);
  return rng();
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("slope fit needs equal-length inputs");
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

namespace {

// A FieldEval flattened as (y[p], jac[p x d], lap[p]). Each slot belongs to
// one output j and one feature type t: 0 value, 1..d gradient, d+1 Laplacian.
FieldEval unflatten(const std::vector<double>& v, int p, int d) {
  FieldEval e;
  e.y.assign(v.begin(), v.begin() + p);
  e.jac.assign(v.begin() + p, v.begin() + p + p * d);
  e.lap.assign(v.begin() + p + p * d, v.end());
  return e;
}

std::pair<int, int> slot_owner(int s, int p, int d) {
  if (s < p) return {s, 0};
  if (s < p + p * d) return {(s - p) / d, 1 + (s - p) % d};
  return {s - p - p * d, d + 1};
}

// C^T C for a linear map e -> C e, probed on unit vectors.
template <class Map>
Eigen::MatrixXd slot_gram(int p, int d, int rows, Map map) {
  const int size = p * (d + 2);
  Eigen::MatrixXd C(rows, size);
  std::vector<double> v(static_cast<std::size_t>(size), 0.0), out(static_cast<std::size_t>(rows));
  for (int c = 0; c < size; ++c) {
    v[c] = 1.0;
    map(unflatten(v, p, d), std::span<double>(out));
    for (int r = 0; r < rows; ++r) C(r, c) = out[r];
    v[c] = 0.0;
  }
  return C.transpose() * C;
}

// Square roots of the norm integrand: per k, phi and grad phi, then the
// H(div) parts (psi and div psi, or grad phi and lap phi).
void norm_components(System sys, int n, int d, const FieldEval& e, std::span<double> out) {
  double* o = out.data();
  for (int k = 0; k < n; ++k) {
    const int phi = sys == System::first_order ? k * (d + 1) : k;
    *o++ = e.y[phi];
    for (int l = 0; l < d; ++l) *o++ = e.jac[static_cast<std::size_t>(phi) * d + l];
    if (sys == System::first_order) {
      double div = 0.0;
      for (int l = 0; l < d; ++l) {
        *o++ = e.y[phi + 1 + l];
        div += e.jac[static_cast<std::size_t>(phi + 1 + l) * d + l];
      }
      *o++ = div;
    } else {
      for (int l = 0; l < d; ++l) *o++ = e.jac[static_cast<std::size_t>(phi) * d + l];
      *o++ = e.lap[k];
    }
  }
}

// Feature table over a point set: column t*(m+1)+i holds type t of feature i,
// feature 0 being the constant.
Eigen::MatrixXd feature_table(const ShallowNetwork& net, const PointSet& pts,
                              const std::vector<std::size_t>& rows) {
  const int m = net.width();
  const int d = net.input_dim();
  const int k = net.activation().value();
  const int F = m + 1;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), (d + 2) * F);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto x = pts.point(rows[r]);
    const double w = std::sqrt(pts.weights[rows[r]]);
    T(r, 0) = w;
    for (int i = 0; i < m; ++i) {
      const auto W = net.W(i);
      double z = net.b(i);
      double w2 = 0.0;
      for (int l = 0; l < d; ++l) {
        z += W[l] * x[l];
        w2 += W[l] * W[l];
      }
      const auto s = activation_derivatives(k, z);
      T(r, 1 + i) = w * s[0];
      for (int l = 0; l < d; ++l) T(r, (1 + l) * F + 1 + i) = w * s[1] * W[l];
      T(r, (d + 1) * F + 1 + i) = w * s[2] * w2;
    }
  }
  return T;
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& T) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(T.cols(), T.cols());
  H.selfadjointView<Eigen::Lower>().rankUpdate(T.transpose());
  return H.selfadjointView<Eigen::Lower>();
}

// Adds sum_{s,s'} Q(s,s') H(type s, type s') into the (output s, output s') block.
void add_form(Eigen::MatrixXd& A, const Eigen::MatrixXd& Q, const Eigen::MatrixXd& H, int p, int d,
              int F, double scale) {
  for (int a = 0; a < Q.rows(); ++a) {
    for (int b = 0; b < Q.cols(); ++b) {
      if (Q(a, b) == 0.0) continue;
      const auto [ja, ta] = slot_owner(a, p, d);
      const auto [jb, tb] = slot_owner(b, p, d);
      A.block(ja * F, jb * F, F, F) += scale * Q(a, b) * H.block(ta * F, tb * F, F, F);
    }
  }
}

}  // namespace

ShallowNetwork minimize_outer_ratio(const ShallowNetwork& features, System system, int n,
                                    const ProblemData& data, const QuadGrid& grid,
                                    double* min_ratio) {
  const int d = features.input_dim();
  const int p = features.output_dim();
  const int m = features.width();
  const int F = m + 1;
  if (p != FieldBundle::width_for(system, n, d) || data.n != n || data.d != d) {
    throw DimensionMismatch("features do not match the system");
  }

  std::vector<std::size_t> all(grid.interior.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Eigen::MatrixXd T = feature_table(features, grid.interior, all);
  const Eigen::MatrixXd H = gram(T);

  const int rw = residual_width(system, n, d);
  const Eigen::MatrixXd Qr = slot_gram(p, d, rw, [&](const FieldEval& e, std::span<double> out) {
    residual_from_eval(system, n, d, e, out);
  });
  const Eigen::MatrixXd Qn =
      slot_gram(p, d, n * (2 + 2 * d), [&](const FieldEval& e, std::span<double> out) {
        norm_components(system, n, d, e, out);
      });

  const int P = p * F;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(P, P);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(P, P);
  add_form(A, Qr, H, p, d, F, 1.0);
  add_form(M, Qn, H, p, d, F, 1.0);

  for (int face = 0; face < 2 * d; ++face) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < grid.boundary.size(); ++i) {
      if (grid.boundary.faces[i] == face) rows.push_back(i);
    }
    if (rows.empty()) continue;
    std::vector<double> normal(static_cast<std::size_t>(d), 0.0);
    normal[face_axis(face)] = face_sign(face);
    const Eigen::MatrixXd Tb = feature_table(features, grid.boundary, rows);
    const Eigen::MatrixXd Hb = gram(Tb);
    const Eigen::MatrixXd Qt = slot_gram(p, d, n, [&](const FieldEval& e, std::span<double> out) {
      trace_from_eval(system, n, d, e, normal, data.kind, out);
    });
    add_form(A, Qt, Hb, p, d, F, data.lambda);
  }

  if (data.kind == BoundaryKind::neumann) {
    // mu (int phi_0)^2; phi_0 is output 0 in both layouts.
    Eigen::VectorXd s = Eigen::VectorXd::Zero(P);
    for (std::size_t i = 0; i < grid.interior.size(); ++i) {
      s.head(F) += std::sqrt(grid.interior.weights[i]) * T.row(static_cast<Eigen::Index>(i)).head(F).transpose();
    }
    A += data.mu * s * s.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> me(M);
  const Eigen::VectorXd& ev = me.eigenvalues();
  const double cut = 1e-8 * ev.maxCoeff();
  int keep = 0;
  for (int i = 0; i < P; ++i) keep += ev(i) > cut;
  Eigen::MatrixXd Z(P, keep);
  for (int i = 0, c = 0; i < P; ++i) {
    if (ev(i) > cut) Z.col(c++) = me.eigenvectors().col(i) / std::sqrt(ev(i));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ae(Z.transpose() * A * Z);
  const Eigen::VectorXd theta = Z * ae.eigenvectors().col(0);
  if (min_ratio) *min_ratio = ae.eigenvalues()(0);

  ShallowNetwork net = features;
  double l1 = 0.0;
  double cmax = 0.0;
  for (int j = 0; j < p; ++j) {
    cmax = std::max(cmax, std::abs(theta(j * F)));
    for (int i = 0; i < m; ++i) l1 += std::abs(theta(j * F + 1 + i));
  }
  const double B = net.barron_bound();
  double scale = std::numeric_limits<double>::infinity();
  if (l1 > 0.0) scale = std::min(scale, 4.0 * B / l1);
  if (cmax > 0.0) scale = std::min(scale, 2.0 * B / cmax);
  for (int j = 0; j < p; ++j) {
    net.c()[j] = scale * theta(j * F);
    for (int i = 0; i < m; ++i) net.a(i)[j] = scale * theta(j * F + 1 + i);
  }
  return net;
}

CoercivityReport coercivity_study(BoundaryKind kind, System system, int n, int d, int trials,
                                  double delta, std::uint64_t seed,
                                  const CoercivityOptions& opts, Exec exec) {
  if (trials < 1) throw std::invalid_argument("coercivity study needs trials >= 1");
  CoercivityReport rep;
  rep.kind = kind;
  rep.system = system;
  rep.n = n;
  rep.d = d;
  rep.delta = delta;
  const QuadGrid grid = quad_grid(d, opts.q, opts.panels);
  const ProblemData data = zero_data(n, d, kind, opts.lambda, opts.mu);
  const int p = FieldBundle::width_for(system, n, d);
  const bool dirichlet = kind == BoundaryKind::dirichlet;

  auto lhs_of = [&](const FieldBundle& u, double Bv) {
    if (!dirichlet) return Bv;
    double flux = 0.0;
    for (double v : boundary_flux_norms(u, grid.boundary, exec)) flux += v;
    const double r = std::sqrt(std::max(Bv, 0.0));
    return (r + flux) * r;
  };

  std::uint64_t attempt = 0;
  for (int t = 0; t < trials; ++t) {
    CoercivityTrial tr;
    tr.trial = t;
    for (;;) {
      tr.seed = derive_seed(seed, attempt++, 5);
      ShallowNetwork net = init_network(opts.width, d, p, activation_for(system), opts.B, tr.seed);
      if (opts.minimize_outer) net = minimize_outer_ratio(net, system, n, data, grid);
      const FieldBundle u = network_bundle(system, n, net);
      const ErrorNorms norms = bundle_norms(u, grid.interior, exec);
      tr.norm_sum = norms.total();
      if (!(tr.norm_sum > 0.0)) continue;
      tr.phi0_h1 = std::sqrt(norms.h1_sq[0]);
      tr.B_value = bilinear_form(u, u, data, grid, exec);
      tr.lhs = lhs_of(u, tr.B_value);
      tr.ratio = tr.lhs / tr.norm_sum;
      tr.energy = weighted_energy(u, delta, grid.interior, exec);

      for (double& v : net.c()) v *= 2.0;
      for (int i = 0; i < net.width(); ++i) {
        for (double& v : net.a(i)) v *= 2.0;
      }
      const FieldBundle u2 = network_bundle(system, n, std::move(net));
      const double B2 = bilinear_form(u2, u2, data, grid, exec);
      tr.ratio_scaled = lhs_of(u2, B2) / bundle_norms(u2, grid.interior, exec).total();
      break;
    }
    rep.trials.push_back(tr);
  }

  std::vector<double> ratios;
  rep.all_positive = true;
  for (const auto& tr : rep.trials) {
    ratios.push_back(tr.ratio);
    if (!(tr.ratio > 0.0)) rep.all_positive = false;
    rep.max_scale_deviation =
        std::max(rep.max_scale_deviation, std::abs(tr.ratio_scaled / tr.ratio - 1.0));
  }
  rep.min_ratio = *std::min_element(ratios.begin(), ratios.end());
  rep.max_ratio = *std::max_element(ratios.begin(), ratios.end());
  rep.median_ratio = median(ratios);
  return rep;
}

FunctionClass constant_class(double value) {
  FunctionClass c;
  c.d = 1;
  c.sample = [value](std::mt19937_64&, const PointSet& X, std::vector<double>& out) {
    out.assign(X.size(), value);
  };
  return c;
}

FunctionClass linear_class(int d) {
  FunctionClass c;
  c.d = d;
  c.sample = [d](std::mt19937_64& rng, const PointSet& X, std::vector<double>& out) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    std::vector<double> w(static_cast<std::size_t>(d));
    double norm = 0.0;
    while (norm < 1e-12) {
      norm = 0.0;
      for (double& v : w) {
        v = gauss(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
    }
    for (double& v : w) v /= norm;
    const double b = sym(rng);
    out.resize(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
      const auto x = X.point(i);
      double s = b;
      for (int l = 0; l < d; ++l) s += w[l] * x[l];
      out[i] = s;
    }
  };
  return c;
}

namespace {

// Calls fn(signs) for every sign vector used by the estimator and returns the
// number of vectors.
template <class Fn>
long for_each_sign_vector(int N, int sign_draws, std::mt19937_64& rng, Fn fn) {
  std::vector<double> eps(static_cast<std::size_t>(N));
  if (N < 31 && (1L << N) <= sign_draws) {
    const long total = 1L << N;
    for (long mask = 0; mask < total; ++mask) {
      for (int i = 0; i < N; ++i) eps[i] = (mask >> i) & 1 ? -1.0 : 1.0;
      fn(eps);
    }
    return total;
  }
  std::bernoulli_distribution coin(0.5);
  for (int s = 0; s < sign_draws; ++s) {
    for (double& e : eps) e = coin(rng) ? 1.0 : -1.0;
    fn(eps);
  }
  return sign_draws;
}

}  // namespace

double empirical_rademacher(const FunctionClass& cls, int N, int sign_draws, int candidates,
                            std::uint64_t seed, int x_draws) {
  if (N < 1 || sign_draws < 1 || candidates < 1 || x_draws < 1) {
    throw std::invalid_argument("Rademacher estimate needs N, sign_draws, candidates, x_draws >= 1");
  }
  double total = 0.0;
  for (int r = 0; r < x_draws; ++r) {
    const PointSet X = sample_interior(cls.d, N, derive_seed(seed, r, 6));
    std::seed_seq cseq{seed, static_cast<std::uint64_t>(r), std::uint64_t{7}};
    std::mt19937_64 crng(cseq);
    std::vector<std::vector<double>> F(static_cast<std::size_t>(candidates));
    for (auto& f : F) cls.sample(crng, X, f);
    std::seed_seq seq{seed, static_cast<std::uint64_t>(r), std::uint64_t{8}};
    std::mt19937_64 rng(seq);
    double acc = 0.0;
    const long count = for_each_sign_vector(N, sign_draws, rng, [&](const std::vector<double>& eps) {
      double best = 0.0;
      for (const auto& f : F) {
        double s = 0.0;
        for (int i = 0; i < N; ++i) s += eps[i] * f[i];
        best = std::max(best, std::abs(s) / N);
      }
      acc += best;
    });
    total += acc / count;
  }
  return total / x_draws;
}

double linear_class_rademacher_exact(int d, int N, int sign_draws, std::uint64_t seed,
                                     int x_draws) {
  if (d < 1 || N < 1 || sign_draws < 1 || x_draws < 1) {
    throw std::invalid_argument("invalid Rademacher arguments");
  }
  double total = 0.0;
  for (int r = 0; r < x_draws; ++r) {
    const PointSet X = sample_interior(d, N, derive_seed(seed, r, 6));
    std::seed_seq seq{seed, static_cast<std::uint64_t>(r), std::uint64_t{8}};
    std::mt19937_64 rng(seq);
    std::vector<double> S(static_cast<std::size_t>(d));
    double acc = 0.0;
    const long count = for_each_sign_vector(N, sign_draws, rng, [&](const std::vector<double>& eps) {
      std::fill(S.begin(), S.end(), 0.0);
      double s = 0.0;
      for (int i = 0; i < N; ++i) {
        const auto x = X.point(i);
        for (int l = 0; l < d; ++l) S[l] += eps[i] * x[l];
        s += eps[i];
      }
      double n2 = 0.0;
      for (double v : S) n2 += v * v;
      acc += (std::sqrt(n2) + std::abs(s)) / N;
    });
    total += acc / count;
  }
  return total / x_draws;
}

double linear_class_bound(int d, int N) {
  return (std::sqrt(2.0 * d * std::log(static_cast<double>(d))) + 1.0) / std::sqrt(static_cast<double>(N));
}

GapStudy generalization_gap_study(const FieldBundle& bundle, const ProblemData& data,
                                  const std::vector<int>& N_list, int resamples,
                                  std::uint64_t seed, const QuadGrid& grid, Exec exec) {
  if (resamples < 1) throw std::invalid_argument("gap study needs resamples >= 1");
  GapStudy study;
  study.expected = expected_loss(bundle, data, grid, exec).total;
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < N_list.size(); ++j) {
    const int N = N_list[j];
    std::vector<double> gaps;
    double sq = 0.0;
    for (int r = 0; r < resamples; ++r) {
      const SampleSet s = sample_set(data.d, N, 0, derive_seed(seed, j * 100003ULL + r, 9));
      const double gap = std::abs(study.expected - empirical_loss(bundle, data, s, exec).total);
      gaps.push_back(gap);
      sq += gap * gap;
    }
    GapRow row{N, std::sqrt(sq / resamples), median(gaps)};
    study.rows.push_back(row);
    xs.push_back(N);
    ys.push_back(row.rms_gap);
  }
  bool positive = true;
  for (double v : ys) positive = positive && v > 0.0;
  study.slope = positive ? loglog_slope(xs, ys) : std::numeric_limits<double>::quiet_NaN();
  return study;
}

}  // namespace mim

namespace mim {

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double rel_error(const std::vector<double>& a, const std::vector<double>& fd) {
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - fd[i]));
  const double scale = max_abs(fd);
  return scale > 0.0 ? diff / scale : diff;
}

bool kink_free(const ShallowNetwork& net, std::span<const double> x, double margin) {
  for (int i = 0; i < net.width(); ++i) {
    double z = net.b(i);
    const auto w = net.W(i);
    for (int l = 0; l < net.input_dim(); ++l) z += w[l] * x[l];
    if (std::abs(z) <= margin) return false;
  }
  return true;
}

// Laplacian by central differences of the analytic Jacobian.
std::vector<double> fd_laplacian(const ShallowNetwork& net, std::vector<double> x, double h) {
  const int d = net.input_dim();
  const int p = net.output_dim();
  std::vector<double> lap(static_cast<std::size_t>(p), 0.0);
  for (int l = 0; l < d; ++l) {
    const double x0 = x[l];
    x[l] = x0 + h;
    const Matrix jp = input_jacobian(net, x);
    x[l] = x0 - h;
    const Matrix jm = input_jacobian(net, x);
    x[l] = x0;
    for (int j = 0; j < p; ++j) lap[j] += (jp(j, l) - jm(j, l)) / (2.0 * h);
  }
  return lap;
}

double functional(const ShallowNetwork& net, std::span<const double> x,
                  const std::vector<double>& cy, const std::vector<double>& cj,
                  const std::vector<double>& cl) {
  NetworkEval e;
  const bool lap = !cl.empty();
  evaluate(net, x, lap ? Derivs::laplacian : Derivs::gradient, e);
  double s = 0.0;
  for (std::size_t j = 0; j < cy.size(); ++j) s += cy[j] * e.y[j];
  for (std::size_t j = 0; j < cj.size(); ++j) s += cj[j] * e.jac[j];
  for (std::size_t j = 0; j < cl.size(); ++j) s += cl[j] * e.lap[j];
  return s;
}

}  // namespace

std::vector<DerivativeCheck> verify_derivatives(int points, double step, double tol,
                                                std::uint64_t seed, int width) {
  std::vector<DerivativeCheck> out;
  std::uint64_t config = 0;
  for (int k = 1; k <= 3; ++k) {
    for (int d = 1; d <= 3; ++d) {
      for (int p : {1, 3}) {
        DerivativeCheck jac{k, d, p, width, "jacobian", 0, 0.0, 0};
        DerivativeCheck lap{k, d, p, width, "laplacian", 0, 0.0, 0};
        DerivativeCheck par{k, d, p, width, "parameters", 0, 0.0, 0};
        std::seed_seq seq{seed, config++, std::uint64_t{10}};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_real_distribution<double> sym(-1.0, 1.0);
        for (int t = 0; t < points; ++t) {
          ShallowNetwork net = init_network(width, d, p, ActivationPower(k), 1.0, rng());
          for (double& c : net.c()) c = sym(rng);
          std::vector<double> x(static_cast<std::size_t>(d));
          do {
            for (double& v : x) v = unit(rng);
          } while (!kink_free(net, x, 1e-3));

          const Matrix J = input_jacobian(net, x);
          std::vector<double> Jfd(J.data.size());
          for (int l = 0; l < d; ++l) {
            const double x0 = x[l];
            x[l] = x0 + step;
            const auto yp = forward(net, x);
            x[l] = x0 - step;
            const auto ym = forward(net, x);
            x[l] = x0;
            for (int j = 0; j < p; ++j) Jfd[static_cast<std::size_t>(j) * d + l] = (yp[j] - ym[j]) / (2.0 * step);
          }
          const double ej = rel_error(J.data, Jfd);
          jac.max_rel_error = std::max(jac.max_rel_error, ej);
          jac.failures += ej > tol;
          ++jac.points;

          if (k >= 2) {
            const double el = rel_error(input_laplacian(net, x), fd_laplacian(net, x, step));
            lap.max_rel_error = std::max(lap.max_rel_error, el);
            lap.failures += el > tol;
            ++lap.points;
          }

          std::vector<double> cy(static_cast<std::size_t>(p)), cj(static_cast<std::size_t>(p) * d), cl;
          for (double& v : cy) v = sym(rng);
          for (double& v : cj) v = sym(rng);
          if (k >= 2) {
            cl.resize(static_cast<std::size_t>(p));
            for (double& v : cl) v = sym(rng);
          }
          std::vector<double> g(net.param_count(), 0.0);
          accumulate_backprop(net, x, cy, cj, cl, g);
          std::vector<double> gfd(g.size());
          auto theta = net.params();
          for (std::size_t j = 0; j < g.size(); ++j) {
            const double t0 = theta[j];
            theta[j] = t0 + step;
            const double fp = functional(net, x, cy, cj, cl);
            theta[j] = t0 - step;
            const double fm = functional(net, x, cy, cj, cl);
            theta[j] = t0;
            gfd[j] = (fp - fm) / (2.0 * step);
          }
          const double ep = rel_error(g, gfd);
          par.max_rel_error = std::max(par.max_rel_error, ep);
          par.failures += ep > tol;
          ++par.points;
        }
        out.push_back(jac);
        if (k >= 2) out.push_back(lap);
        out.push_back(par);
      }
    }
  }
  return out;
}

}  // namespace mim
