#include "mim/network.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace mim {

namespace {

void check_input(const ShallowNetwork& net, std::span<const double> x) {
  if (static_cast<int>(x.size()) != net.input_dim()) {
    throw DimensionMismatch("network expects input of dimension " +
                            std::to_string(net.input_dim()) + ", got " +
                            std::to_string(x.size()));
  }
}

}  // namespace

ShallowNetwork::ShallowNetwork(ActivationPower k, int d, int p, int m, double barron_bound)
    : k_(k), d_(d), p_(p), m_(m), bound_(barron_bound) {
  if (d < 1 || p < 1 || m < 0) {
    throw DimensionMismatch("network needs d >= 1, p >= 1, m >= 0");
  }
  if (!(barron_bound >= 0.0)) throw std::invalid_argument("barron bound must be nonnegative");
  theta_.assign(static_cast<std::size_t>(p) * (1 + m) + static_cast<std::size_t>(d) * m + m, 0.0);
}

void ShallowNetwork::set_barron_bound(double B) {
  if (!(B >= 0.0)) throw std::invalid_argument("barron bound must be nonnegative");
  bound_ = B;
}

bool ShallowNetwork::is_class_feasible(double tol) const {
  for (int i = 0; i < m_; ++i) {
    double w2 = 0.0;
    for (double w : W(i)) w2 += w * w;
    if (std::sqrt(w2) > 1.0 + tol) return false;
    if (std::abs(b(i)) > 1.0 + tol) return false;
  }
  if (outer_l1(*this) > 4.0 * bound_ * (1.0 + tol) + tol) return false;
  for (double cj : c()) {
    if (std::abs(cj) > 2.0 * bound_ + tol) return false;
  }
  return true;
}

void evaluate(const ShallowNetwork& net, std::span<const double> x, Derivs derivs,
              NetworkEval& out) {
  check_input(net, x);
  const int k = net.activation().value();
  const int d = net.input_dim();
  const int p = net.output_dim();
  const int m = net.width();
  if (derivs == Derivs::laplacian && k < 2) {
    throw UnsupportedDerivative("input Laplacian needs ReLU^k with k >= 2");
  }
  const bool want_jac = derivs != Derivs::value;
  const bool want_lap = derivs == Derivs::laplacian;

  out.y.assign(net.c().begin(), net.c().end());
  if (want_jac) out.jac.assign(static_cast<std::size_t>(p) * d, 0.0);
  if (want_lap) out.lap.assign(static_cast<std::size_t>(p), 0.0);

  for (int i = 0; i < m; ++i) {
    const auto w = net.W(i);
    double z = net.b(i);
    double w2 = 0.0;
    for (int l = 0; l < d; ++l) {
      z += w[l] * x[l];
      w2 += w[l] * w[l];
    }
    if (z <= 0.0) continue;
    const auto s = activation_derivatives(k, z);
    const auto ai = net.a(i);
    for (int j = 0; j < p; ++j) {
      const double aij = ai[j];
      out.y[j] += aij * s[0];
      if (want_jac) {
        const double g = aij * s[1];
        double* row = out.jac.data() + static_cast<std::size_t>(j) * d;
        for (int l = 0; l < d; ++l) row[l] += g * w[l];
      }
      if (want_lap) out.lap[j] += aij * s[2] * w2;
    }
  }
}

std::vector<double> forward(const ShallowNetwork& net, std::span<const double> x) {
  NetworkEval e;
  evaluate(net, x, Derivs::value, e);
  return e.y;
}

Matrix input_jacobian(const ShallowNetwork& net, std::span<const double> x) {
  NetworkEval e;
  evaluate(net, x, Derivs::gradient, e);
  Matrix J(net.output_dim(), net.input_dim());
  J.data = std::move(e.jac);
  return J;
}

std::vector<double> input_laplacian(const ShallowNetwork& net, std::span<const double> x) {
  NetworkEval e;
  evaluate(net, x, Derivs::laplacian, e);
  return e.lap;
}

void accumulate_backprop(const ShallowNetwork& net, std::span<const double> x,
                         std::span<const double> cot_y, std::span<const double> cot_jac,
                         std::span<const double> cot_lap, std::span<double> grad) {
  check_input(net, x);
  const int k = net.activation().value();
  const int d = net.input_dim();
  const int p = net.output_dim();
  const int m = net.width();
  const bool has_y = !cot_y.empty();
  const bool has_jac = !cot_jac.empty();
  const bool has_lap = !cot_lap.empty();
  if ((has_y && static_cast<int>(cot_y.size()) != p) ||
      (has_jac && static_cast<int>(cot_jac.size()) != p * d) ||
      (has_lap && static_cast<int>(cot_lap.size()) != p) || grad.size() != net.param_count()) {
    throw DimensionMismatch("cotangent or gradient shape does not match the network");
  }
  if (has_lap && k < 2) {
    throw UnsupportedDerivative("Laplacian cotangents need ReLU^k with k >= 2");
  }

  if (has_y) {
    for (int j = 0; j < p; ++j) grad[j] += cot_y[j];
  }

  // Per-neuron contractions of the cotangents with the outer weights.
  double v[16];
  std::vector<double> v_heap;
  double* vl = v;
  if (d > 16) {
    v_heap.resize(static_cast<std::size_t>(d));
    vl = v_heap.data();
  }

  for (int i = 0; i < m; ++i) {
    const auto w = net.W(i);
    double z = net.b(i);
    double w2 = 0.0;
    for (int l = 0; l < d; ++l) {
      z += w[l] * x[l];
      w2 += w[l] * w[l];
    }
    if (z <= 0.0) continue;
    const auto s = activation_derivatives(k, z);
    const auto ai = net.a(i);

    double sum_y = 0.0;
    double sum_c = 0.0;
    double sum_l = 0.0;
    if (has_jac) std::fill(vl, vl + d, 0.0);

    double* ga = grad.data() + net.a_offset(i);
    for (int j = 0; j < p; ++j) {
      double gaj = 0.0;
      if (has_y) {
        gaj += cot_y[j] * s[0];
        sum_y += cot_y[j] * ai[j];
      }
      if (has_jac) {
        const double* crow = cot_jac.data() + static_cast<std::size_t>(j) * d;
        double cw = 0.0;
        for (int l = 0; l < d; ++l) {
          cw += crow[l] * w[l];
          vl[l] += ai[j] * crow[l];
        }
        gaj += s[1] * cw;
        sum_c += ai[j] * cw;
      }
      if (has_lap) {
        gaj += cot_lap[j] * s[2] * w2;
        sum_l += cot_lap[j] * ai[j];
      }
      ga[j] += gaj;
    }

    const double dz = sum_y * s[1] + sum_c * s[2] + sum_l * s[3] * w2;
    grad[net.b_offset(i)] += dz;
    double* gw = grad.data() + net.w_offset(i);
    for (int l = 0; l < d; ++l) {
      double g = dz * x[l];
      if (has_jac) g += s[1] * vl[l];
      if (has_lap) g += 2.0 * sum_l * s[2] * w[l];
      gw[l] += g;
    }
  }
}

std::vector<double> parameter_backprop(const ShallowNetwork& net, std::span<const double> x,
                                       std::span<const double> cot_y, const Matrix& cot_jac,
                                       std::span<const double> cot_lap) {
  if (!cot_jac.data.empty() &&
      (cot_jac.rows != net.output_dim() || cot_jac.cols != net.input_dim())) {
    throw DimensionMismatch("Jacobian cotangent must be p x d");
  }
  std::vector<double> grad(net.param_count(), 0.0);
  accumulate_backprop(net, x, cot_y, cot_jac.data, cot_lap, grad);
  return grad;
}

double outer_l1(const ShallowNetwork& net) {
  double s = 0.0;
  for (int i = 0; i < net.width(); ++i) {
    for (double aij : net.a(i)) s += std::abs(aij);
  }
  return s;
}

void project_in_place(ShallowNetwork& net) {
  const double B = net.barron_bound();
  for (int i = 0; i < net.width(); ++i) {
    auto w = net.W(i);
    double w2 = 0.0;
    for (double wl : w) w2 += wl * wl;
    const double norm = std::sqrt(w2);
    // Slack of a few ulps keeps a second projection an exact no-op.
    if (norm > 1.0 + 1e-13) {
      for (double& wl : w) wl /= norm;
    }
    net.b(i) = std::clamp(net.b(i), -1.0, 1.0);
  }
  const double l1 = outer_l1(net);
  if (l1 > 4.0 * B * (1.0 + 1e-13)) {
    const double scale = 4.0 * B / l1;
    for (int i = 0; i < net.width(); ++i) {
      for (double& aij : net.a(i)) aij *= scale;
    }
  }
  for (double& cj : net.c()) cj = std::clamp(cj, -2.0 * B, 2.0 * B);
}

ShallowNetwork project_to_class(ShallowNetwork net) {
  project_in_place(net);
  return net;
}

std::string to_json(const ShallowNetwork& net) {
  nlohmann::ordered_json j;
  j["k"] = net.activation().value();
  j["d"] = net.input_dim();
  j["p"] = net.output_dim();
  j["m"] = net.width();
  j["B"] = net.barron_bound();
  j["c"] = std::vector<double>(net.c().begin(), net.c().end());
  auto a = nlohmann::ordered_json::array();
  auto W = nlohmann::ordered_json::array();
  auto b = nlohmann::ordered_json::array();
  for (int i = 0; i < net.width(); ++i) {
    a.push_back(std::vector<double>(net.a(i).begin(), net.a(i).end()));
    W.push_back(std::vector<double>(net.W(i).begin(), net.W(i).end()));
    b.push_back(net.b(i));
  }
  j["a"] = std::move(a);
  j["W"] = std::move(W);
  j["b"] = std::move(b);
  return j.dump(2);
}

ShallowNetwork network_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ShallowNetwork net(ActivationPower(j.at("k").get<int>()), j.at("d").get<int>(),
                     j.at("p").get<int>(), j.at("m").get<int>(), j.at("B").get<double>());
  const auto c = j.at("c").get<std::vector<double>>();
  const auto a = j.at("a").get<std::vector<std::vector<double>>>();
  const auto W = j.at("W").get<std::vector<std::vector<double>>>();
  const auto b = j.at("b").get<std::vector<double>>();
  const auto m = static_cast<std::size_t>(net.width());
  if (c.size() != static_cast<std::size_t>(net.output_dim()) || a.size() != m || W.size() != m ||
      b.size() != m) {
    throw DimensionMismatch("network JSON arrays do not match k/d/p/m");
  }
  std::copy(c.begin(), c.end(), net.c().begin());
  for (std::size_t i = 0; i < m; ++i) {
    const int ii = static_cast<int>(i);
    if (a[i].size() != net.a(ii).size() || W[i].size() != net.W(ii).size()) {
      throw DimensionMismatch("network JSON row has the wrong length");
    }
    std::copy(a[i].begin(), a[i].end(), net.a(ii).begin());
    std::copy(W[i].begin(), W[i].end(), net.W(ii).begin());
    net.b(ii) = b[i];
  }
  return net;
}

}  // namespace mim
