#include "mim/barron.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#include "mim/train.hpp"

namespace mim {

namespace {

constexpr double kPi = std::numbers::pi;

double profile_scale(const CosProfile& g) {
  const double k = g.k1;
  return g.gamma / (1.0 + kPi * kPi * kPi * kPi * k * k * k * k);
}

}  // namespace

CosProfile::CosProfile(double gamma_, int k1_, int b_phase_, double B_)
    : gamma(gamma_), k1(k1_), b_phase(b_phase_), B(B_) {
  if (k1 < 1) throw std::invalid_argument("profile frequency |k|_1 must be >= 1");
  if (b_phase != 0 && b_phase != 1) throw std::invalid_argument("profile phase must be 0 or 1");
  if (std::abs(gamma) > B * (1.0 + 1e-12)) throw std::invalid_argument("profile needs |gamma| <= B");
}

double CosProfile::value(double z) const {
  return profile_scale(*this) * std::cos(kPi * (k1 * z + b_phase));
}

double CosProfile::derivative(double z) const {
  return -profile_scale(*this) * kPi * k1 * std::sin(kPi * (k1 * z + b_phase));
}

Partition::Partition(int m_) : m(m_) {
  if (m < 2) throw std::invalid_argument("partition needs m >= 2");
}

ShallowNetwork requ_interpolant(const CosProfile& g, int m) {
  const Partition part(m);
  const double h = part.h();
  std::vector<double> G(2 * static_cast<std::size_t>(m) + 1);
  for (int j = 0; j <= 2 * m; ++j) G[j] = g.value(part.knot(j));

  // Slopes next to 0 and second differences elsewhere, indexed 1..2m.
  std::vector<double> at(2 * static_cast<std::size_t>(m) + 1, 0.0);
  for (int i = 1; i <= 2 * m; ++i) {
    if (i == m + 1) {
      at[i] = (G[m + 1] - G[m]) / h;
    } else if (i == m) {
      at[i] = (G[m - 1] - G[m]) / h;
    } else if (i > m + 1) {
      at[i] = (G[i] - 2.0 * G[i - 1] + G[i - 2]) / h;
    } else {
      at[i] = (G[i - 1] - 2.0 * G[i] + G[i + 1]) / h;
    }
  }

  ShallowNetwork net(ActivationPower(2), 1, 1, 2 * m + 4, g.B);
  net.c()[0] = g.value(0.0);
  const double inv = 1.0 / (4.0 * h);
  for (int i = 0; i <= 2 * m + 3; ++i) {
    double a = 0.0;
    if (i <= 1) {
      a = at[i + 1] * inv;
    } else if (i <= m - 1) {
      a = (at[i + 1] - at[i - 1]) * inv;
    } else if (i <= m + 1) {
      a = -at[i - 1] * inv;
    } else if (i <= m + 3) {
      a = at[i - 1] * inv;
    } else if (i <= 2 * m + 1) {
      a = (at[i - 1] - at[i - 3]) * inv;
    } else {
      a = -at[i - 3] * inv;
    }
    if (i <= m + 1) {
      // Left branch: mirror image of the right branch.
      net.a(i)[0] = -a;
      net.W(i)[0] = -1.0;
      net.b(i) = part.knot(i);
    } else {
      net.a(i)[0] = a;
      net.W(i)[0] = 1.0;
      net.b(i) = -part.knot(i - 3);
    }
  }
  return net;
}

std::vector<double> requ_coefficients(const ShallowNetwork& ghat) {
  std::vector<double> a;
  for (int i = 0; i < ghat.width(); ++i) a.push_back(ghat.a(i)[0]);
  return a;
}

ShallowNetwork recu_from_requ(const ShallowNetwork& ghat, double h) {
  if (ghat.activation().value() != 2 || ghat.input_dim() != 1 || ghat.output_dim() != 1) {
    throw std::invalid_argument("recu_from_requ needs a 1-d scalar ReQU network");
  }
  const int m = (ghat.width() - 4) / 2;
  if (m < 2 || ghat.width() != 2 * m + 4 || std::abs(h * m - 1.0) > 1e-12) {
    throw std::invalid_argument("h does not match the interpolant's partition");
  }
  // Key: (sign, bias numerator over m). Insertion order is kept for determinism.
  std::map<std::pair<int, long>, std::size_t> index;
  std::vector<std::pair<int, long>> keys;
  std::vector<double> coeff;
  auto add = [&](int eps, long num, double a) {
    if (num < -m) return;  // eps z + num/m < 0 on all of [-1, 1]
    const auto key = std::make_pair(eps, num);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, keys.size());
      keys.push_back(key);
      coeff.push_back(a);
    } else {
      coeff[it->second] += a;
    }
  };
  for (int i = 0; i < ghat.width(); ++i) {
    const int eps = ghat.W(i)[0] > 0.0 ? 1 : -1;
    const long num = std::lround(ghat.b(i) * m);
    const double a = ghat.a(i)[0] / (6.0 * h);
    add(eps, num + 1, a);
    add(eps, num - 1, -a);
  }
  ShallowNetwork net(ActivationPower(3), 1, 1, static_cast<int>(keys.size()), ghat.barron_bound());
  net.c()[0] = ghat.c()[0];
  for (std::size_t j = 0; j < keys.size(); ++j) {
    const int jj = static_cast<int>(j);
    net.a(jj)[0] = coeff[j];
    net.W(jj)[0] = keys[j].first;
    net.b(jj) = static_cast<double>(keys[j].second) / m;
  }
  return net;
}

double h1_error_1d(const ShallowNetwork& net, const CosProfile& g, int m) {
  if (net.input_dim() != 1 || net.output_dim() != 1) {
    throw std::invalid_argument("h1_error_1d needs a 1-d scalar network");
  }
  std::vector<double> t, w;
  gauss_legendre_01(8, 2 * m, t, w);
  NetworkEval e;
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double z = 2.0 * t[i] - 1.0;
    evaluate(net, std::span<const double>(&z, 1), Derivs::gradient, e);
    const double dv = e.y[0] - g.value(z);
    const double dd = e.jac[0] - g.derivative(z);
    s += 2.0 * w[i] * (dv * dv + dd * dd);
  }
  return std::sqrt(s);
}

ShallowNetwork cos_mode_network(const std::vector<int>& k, double gamma, int b_phase, int m,
                                double B) {
  int k1 = 0;
  for (int ki : k) k1 += std::abs(ki);
  if (k.empty() || k1 == 0) throw std::invalid_argument("cos_mode_network needs a nonzero mode");
  const int d = static_cast<int>(k.size());
  const CosProfile g(gamma, k1, b_phase, B);
  const ShallowNetwork one = recu_from_requ(requ_interpolant(g, m), 1.0 / m);
  ShallowNetwork net(ActivationPower(3), d, 1, one.width(), B);
  net.c()[0] = one.c()[0];
  for (int i = 0; i < one.width(); ++i) {
    net.a(i)[0] = one.a(i)[0];
    net.b(i) = one.b(i);
    auto w = net.W(i);
    for (int l = 0; l < d; ++l) w[l] = one.W(i)[0] * k[l] / static_cast<double>(k1);
  }
  return net;
}

double h1_error(const ShallowNetwork& net, const SpectralFunction& u, const PointSet& grid,
                Exec exec) {
  const int d = u.dim();
  if (net.input_dim() != d || net.output_dim() != 1 || grid.d != d) {
    throw DimensionMismatch("h1_error needs a scalar network on the grid's dimension");
  }
  struct Scratch {
    NetworkEval e;
    std::vector<double> g;
  };
  const double s = reduce_sum(
      grid.size(), exec, [d] { return Scratch{{}, std::vector<double>(static_cast<std::size_t>(d))}; },
      [&](std::size_t i, Scratch& sc) {
        const auto x = grid.point(i);
        evaluate(net, x, Derivs::gradient, sc.e);
        const double dv = sc.e.y[0] - u.eval(x, sc.g.data(), nullptr);
        double t = dv * dv;
        for (int l = 0; l < d; ++l) {
          const double dg = sc.e.jac[l] - sc.g[l];
          t += dg * dg;
        }
        return grid.weights[i] * t;
      });
  return std::sqrt(s);
}

BarronApprox approximate_barron(const SpectralFunction& u, int m, std::uint64_t seed,
                                int partition, const PointSet* grid, Exec exec) {
  if (m < 1) throw std::invalid_argument("approximate_barron needs m >= 1");
  const int d = u.dim();
  const double B = barron_norm(u, 4.0);

  double constant = 0.0;
  std::vector<const Mode*> modes;
  std::vector<double> mass;
  for (const auto& md : u.modes()) {
    const double k1 = mode_l1(md);
    if (k1 == 0.0) {
      constant += md.coeff;
    } else if (md.coeff != 0.0) {
      modes.push_back(&md);
      mass.push_back(std::abs(md.coeff) * (1.0 + std::pow(kPi * k1, 4)));
    }
  }
  double Z = 0.0;
  for (double v : mass) Z += v;

  std::vector<int> counts(modes.size(), 0);
  if (!modes.empty()) {
    std::seed_seq seq{seed, std::uint64_t{4}};
    std::mt19937_64 rng(seq);
    std::discrete_distribution<std::size_t> pick(mass.begin(), mass.end());
    for (int s = 0; s < m; ++s) ++counts[pick(rng)];
  }

  // Neurons keyed by (signed integer direction, bias numerator) so that
  // coinciding neurons from different terms merge exactly.
  std::map<std::pair<std::vector<int>, long>, std::size_t> index;
  std::vector<std::pair<std::vector<int>, long>> keys;
  std::vector<int> key_k1;
  std::vector<double> coeff;
  double c = constant;
  int distinct = 0;
  for (std::size_t t = 0; t < modes.size(); ++t) {
    if (counts[t] == 0) continue;
    ++distinct;
    const Mode& md = *modes[t];
    const int k1 = static_cast<int>(mode_l1(md));
    std::vector<int> nz;
    for (int l = 0; l < d; ++l) {
      if (md.k[l] != 0) nz.push_back(l);
    }
    const double weight = static_cast<double>(counts[t]) / m / static_cast<double>(1u << nz.size());
    const CosProfile g(Z, k1, md.coeff < 0.0 ? 1 : 0, Z);
    const ShallowNetwork one = recu_from_requ(requ_interpolant(g, partition), 1.0 / partition);
    for (unsigned mask = 0; mask < (1u << nz.size()); ++mask) {
      std::vector<int> dir(md.k);
      for (std::size_t q = 0; q < nz.size(); ++q) {
        if (mask & (1u << q)) dir[nz[q]] = -dir[nz[q]];
      }
      c += weight * one.c()[0];
      for (int i = 0; i < one.width(); ++i) {
        std::vector<int> kdir(dir);
        if (one.W(i)[0] < 0.0) {
          for (int& v : kdir) v = -v;
        }
        const auto key = std::make_pair(std::move(kdir), std::lround(one.b(i) * partition));
        auto it = index.find(key);
        const double a = weight * one.a(i)[0];
        if (it == index.end()) {
          index.emplace(key, keys.size());
          keys.push_back(key);
          key_k1.push_back(k1);
          coeff.push_back(a);
        } else {
          coeff[it->second] += a;
        }
      }
    }
  }

  ShallowNetwork net(ActivationPower(3), d, 1, static_cast<int>(keys.size()), B);
  net.c()[0] = c;
  for (std::size_t j = 0; j < keys.size(); ++j) {
    const int jj = static_cast<int>(j);
    net.a(jj)[0] = coeff[j];
    net.b(jj) = static_cast<double>(keys[j].second) / partition;
    auto w = net.W(jj);
    for (int l = 0; l < d; ++l) w[l] = keys[j].first[l] / static_cast<double>(key_k1[j]);
  }

  BarronApprox out{std::move(net), 0.0, distinct};
  if (grid != nullptr) {
    out.h1_error = h1_error(out.net, u, *grid, exec);
  } else {
    out.h1_error = h1_error(out.net, u, error_grid(d), exec);
  }
  return out;
}

}  // namespace mim
