#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "hnn/data.hpp"
#include "hnn/gyro.hpp"
#include "hnn/optim.hpp"
#include "hnn/train.hpp"

using namespace hnn;

namespace {

Vec ball_point(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> r(0.0, 0.95);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = g(rng);
  return v.normalized() * r(rng);
}

// One full-batch epoch (gradient + Riemannian Adam step) on the tree dataset.
void BM_Epoch(benchmark::State& state) {
  const auto flavor = static_cast<Model>(state.range(0));
  const Dataset ds = gen_tree_dataset(6, 16, 0.1, 42);
  TrainConfig cfg;
  cfg.flavor = flavor;
  HnnModel model = initial_model(ds, cfg);
  GradState gs = init_grad_state(model);
  for (auto _ : state) {
    const Gradients g = gradients(model, ds.features, ds.labels, ds.splits.train);
    model = riemannian_adam_step(gs, model, g);
    benchmark::DoNotOptimize(model.bias.data());
  }
  state.SetLabel(std::string(to_string(flavor)));
}
BENCHMARK(BM_Epoch)->Arg(static_cast<int>(Model::Klein))->Arg(static_cast<int>(Model::Poincare))
    ->Arg(static_cast<int>(Model::Lorentz))->Unit(benchmark::kMicrosecond);

void BM_Forward(benchmark::State& state) {
  const auto flavor = static_cast<Model>(state.range(0));
  const Dataset ds = gen_tree_dataset(6, 16, 0.1, 42);
  TrainConfig cfg;
  cfg.flavor = flavor;
  const HnnModel model = initial_model(ds, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, ds.features).data());
  state.SetLabel(std::string(to_string(flavor)));
}
BENCHMARK(BM_Forward)->Arg(static_cast<int>(Model::Klein))->Arg(static_cast<int>(Model::Poincare))
    ->Arg(static_cast<int>(Model::Lorentz))->Unit(benchmark::kMicrosecond);

template <class P, class Op>
void translate(benchmark::State& state, Op op) {
  std::mt19937_64 rng(1);
  const int dim = static_cast<int>(state.range(0));
  std::vector<P> xs, ys;
  for (int i = 0; i < 256; ++i) {
    xs.push_back(P{ball_point(dim, rng)});
    ys.push_back(P{ball_point(dim, rng)});
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(op(xs[i & 255], ys[i & 255]).coords.data());
    ++i;
  }
}

void BM_EinsteinAdd(benchmark::State& state) {
  translate<KleinPoint>(state, [](const KleinPoint& x, const KleinPoint& y) { return einstein_add(x, y); });
}
BENCHMARK(BM_EinsteinAdd)->Arg(2)->Arg(16)->Arg(128);

void BM_MobiusAdd(benchmark::State& state) {
  translate<PoincarePoint>(state,
                           [](const PoincarePoint& x, const PoincarePoint& y) { return mobius_add(x, y); });
}
BENCHMARK(BM_MobiusAdd)->Arg(2)->Arg(16)->Arg(128);

void BM_EinsteinMatvec(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const int dim = static_cast<int>(state.range(0));
  const Mat m = Mat::Random(dim, dim);
  const KleinPoint x{ball_point(dim, rng)};
  for (auto _ : state) benchmark::DoNotOptimize(einstein_matvec(m, x).coords.data());
}
BENCHMARK(BM_EinsteinMatvec)->Arg(16)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
