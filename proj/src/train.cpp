#include "mim/train.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

namespace mim {

void OptimizerConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("step_size must be positive");
  if (steps < 0) throw std::invalid_argument("steps must be nonnegative");
  if (log_interval < 1) throw std::invalid_argument("log_interval must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("Adam epsilon must be positive");
}

ShallowNetwork init_network(int m, int d, int out_dim, ActivationPower k, double B,
                            std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("network width must be >= 1");
  ShallowNetwork net(k, d, out_dim, m, B);
  std::seed_seq seq{seed, std::uint64_t{3}};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  const double a_scale = B / (static_cast<double>(m) * out_dim);
  for (int i = 0; i < m; ++i) {
    auto w = net.W(i);
    double norm = 0.0;
    while (norm < 1e-12) {
      norm = 0.0;
      for (double& wl : w) {
        wl = gauss(rng);
        norm += wl * wl;
      }
      norm = std::sqrt(norm);
    }
    const double radius = 1.0 - unit(rng);  // (0, 1]
    for (double& wl : w) wl *= radius / norm;
    net.b(i) = sym(rng);
    for (double& aij : net.a(i)) aij = sym(rng) * a_scale;
  }
  return net;
}

ActivationPower activation_for(System system) {
  return ActivationPower(system == System::first_order ? 2 : 3);
}

double barron_order_for(System system, int n) {
  return system == System::first_order ? 2.0 * n + 2.0 : 2.0 * n + 3.0;
}

PointSet error_grid(int d) {
  if (d == 1) return tensor_grid(1, 8, 128);
  if (d == 2) return tensor_grid(2, 6, 24);
  return tensor_grid(d, 4, 6);
}

TrainResult train(const ProblemSpec& spec, System system, int m, int N, int N_hat,
                  const OptimizerConfig& opt, Exec exec) {
  spec.validate();
  opt.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const ProblemData data = problem_data(spec);
  const int p = FieldBundle::width_for(system, spec.n, spec.d);
  const double B = barron_norm(spec.u_star, barron_order_for(system, spec.n));
  ShallowNetwork net = init_network(m, spec.d, p, activation_for(system), B, opt.seed);
  SampleSet samples = sample_set(spec.d, N, N_hat, opt.seed);

  TrainReport rep;
  rep.seed = opt.seed;
  const std::size_t P = net.param_count();
  std::vector<double> m1(P, 0.0), m2(P, 0.0);
  double b1t = 1.0, b2t = 1.0;

  int step = 0;
  LossBreakdown L;
  for (; step < opt.steps; ++step) {
    if (opt.resample && step > 0) {
      samples = sample_set(spec.d, N, N_hat, opt.seed + 0x9E3779B97F4A7C15ULL * step);
    }
    const auto g = loss_gradient(net, system, data, samples, exec, &L);
    if (step == 0) rep.initial = L;
    if (step % opt.log_interval == 0) rep.trajectory.push_back({step, L});
    if (!std::isfinite(L.total) || L.total > 1e6 * rep.initial.total) {
      rep.diverged = true;
      break;
    }
    auto theta = net.params();
    if (opt.method == OptimizerConfig::Method::sgd) {
      for (std::size_t j = 0; j < P; ++j) theta[j] -= opt.step_size * g[j];
    } else {
      b1t *= opt.beta1;
      b2t *= opt.beta2;
      for (std::size_t j = 0; j < P; ++j) {
        m1[j] = opt.beta1 * m1[j] + (1.0 - opt.beta1) * g[j];
        m2[j] = opt.beta2 * m2[j] + (1.0 - opt.beta2) * g[j] * g[j];
        const double mh = m1[j] / (1.0 - b1t);
        const double vh = m2[j] / (1.0 - b2t);
        theta[j] -= opt.step_size * mh / (std::sqrt(vh) + opt.epsilon);
      }
    }
    project_in_place(net);
  }
  rep.steps_run = step;

  const FieldBundle bundle = network_bundle(system, spec.n, net);
  rep.final_loss = empirical_loss(bundle, data, samples, exec);
  if (opt.steps == 0) rep.initial = rep.final_loss;
  if (rep.trajectory.empty() || rep.trajectory.back().step != step) {
    rep.trajectory.push_back({step, rep.final_loss});
  }
  rep.errors = error_norms(bundle, exact_bundle(spec, system), error_grid(spec.d), exec);
  rep.relative_h1 = rep.errors.relative_h1();
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(net), std::move(rep)};
}

}  // namespace mim
