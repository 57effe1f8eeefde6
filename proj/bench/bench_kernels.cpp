#include <benchmark/benchmark.h>

#include "mim/loss.hpp"
#include "mim/train.hpp"

namespace {

struct Setup {
  mim::ProblemSpec spec;
  mim::ProblemData data;
  mim::ShallowNetwork net;
  mim::SampleSet samples;

  explicit Setup(int N)
      : spec(make_spec()),
        data(mim::problem_data(spec)),
        net(mim::init_network(64, 2, 3, mim::ActivationPower(2), 10.0, 1)),
        samples(mim::sample_set(2, N, 0, 2)) {}

  static mim::ProblemSpec make_spec() {
    mim::ProblemSpec s;
    s.n = 1;
    s.d = 2;
    s.u_star = mim::SpectralFunction(2, {mim::Mode{{1, 1}, 1.0}});
    return s;
  }
};

void BM_LossGradient(benchmark::State& state, mim::Exec exec) {
  Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto g = mim::loss_gradient(s.net, mim::System::first_order, s.data, s.samples, exec);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EmpiricalLoss(benchmark::State& state, mim::Exec exec) {
  Setup s(static_cast<int>(state.range(0)));
  const auto bundle = mim::network_bundle(mim::System::first_order, 1, s.net);
  for (auto _ : state) {
    auto L = mim::empirical_loss(bundle, s.data, s.samples, exec);
    benchmark::DoNotOptimize(L.total);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(BM_LossGradient, serial, mim::Exec::serial)->Arg(1024)->Arg(8192);
BENCHMARK_CAPTURE(BM_LossGradient, parallel, mim::Exec::parallel)->Arg(1024)->Arg(8192);
BENCHMARK_CAPTURE(BM_EmpiricalLoss, serial, mim::Exec::serial)->Arg(1024)->Arg(8192);
BENCHMARK_CAPTURE(BM_EmpiricalLoss, parallel, mim::Exec::parallel)->Arg(1024)->Arg(8192);

BENCHMARK_MAIN();
