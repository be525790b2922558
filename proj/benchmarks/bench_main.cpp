#include <benchmark/benchmark.h>

#include "wclab/gaussian.hpp"
#include "wclab/stats.hpp"
#include "wclab/tiling.hpp"

namespace {

using namespace wclab;

void BM_PhiloxBlock(benchmark::State& state) {
  std::uint64_t ctr = 0;
  for (auto _ : state) {
    auto out = philox4x32({static_cast<std::uint32_t>(ctr), 0, 0, 0}, {1, 2});
    benchmark::DoNotOptimize(out);
    ++ctr;
  }
}
BENCHMARK(BM_PhiloxBlock);

void BM_BernoulliWindow(benchmark::State& state) {
  auto z2 = std::make_shared<Group>(2);
  ActionPtr a = bernoulli_shift(z2, Alphabet::coin());
  const Observable phi = Observable::coordinate(Site::of_elem(z2->identity()), 2);
  const Window f = box_window(*z2, 1);
  std::uint64_t sample = 0;
  for (auto _ : state) {
    Point p(a, 7, sample++);
    std::int64_t acc = 0;
    for (const auto& g : f) acc += phi(p, g);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_BernoulliWindow);

void BM_CoinducedCellRead(benchmark::State& state) {
  auto z2 = std::make_shared<Group>(2);
  auto h = std::make_shared<Subgroup>(z2, std::vector<std::vector<std::int64_t>>{{1, 0}});
  ActionPtr a = coinduce(restrict_action(bernoulli_shift(z2, Alphabet::coin()), h), h);
  const CosetId c0 = h->coset_of(z2->identity());
  const Observable phi = Observable::inner_coordinate(
      Site::of_coset(c0), Site::of_elem(z2->identity()), 2);
  GroupElement g = z2->identity();
  g.lattice[1] = 1;
  std::uint64_t sample = 0;
  for (auto _ : state) {
    Point p(a, 9, sample++);
    benchmark::DoNotOptimize(phi(p, g));
  }
}
BENCHMARK(BM_CoinducedCellRead);

void BM_GaussianJointSample(benchmark::State& state) {
  auto z1 = std::make_shared<Group>(1);
  KernelPtr k = exp_decay_kernel(z1, 0.5);
  std::vector<Site> coords;
  for (const auto& g : z1->box(static_cast<int>(state.range(0))))
    coords.push_back(Site::of_elem(g));
  GaussianSampler sampler(k, coords);
  std::uint64_t stream = 0;
  for (auto _ : state) {
    auto v = sampler.sample(11, stream++);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_GaussianJointSample)->Arg(4)->Arg(16);

void BM_MarkerScan(benchmark::State& state) {
  auto z1 = std::make_shared<Group>(1);
  ActionPtr b = bernoulli_shift(z1, Alphabet::coin());
  MarkerRule rule;
  rule.pattern.assign(8, 1);
  rule.radius = MarkerRule::radius_for(1.0 / 256, 8, 1, 0.005);
  std::uint64_t sample = 0;
  for (auto _ : state) {
    Point y(b, 13, sample++);
    benchmark::DoNotOptimize(marker_labeling(y, z1->identity(), rule));
  }
}
BENCHMARK(BM_MarkerScan);

void BM_HnfCosetReduce(benchmark::State& state) {
  auto z2 = std::make_shared<Group>(2);
  Subgroup h(z2, {{3, 1}, {0, 4}});
  GroupElement g = z2->identity();
  std::int64_t i = 0;
  for (auto _ : state) {
    g.lattice[0] = 1000 - (i % 2000);
    g.lattice[1] = (i * 7) % 997;
    benchmark::DoNotOptimize(h.coset_of(g));
    ++i;
  }
}
BENCHMARK(BM_HnfCosetReduce);

}  // namespace

BENCHMARK_MAIN();
