#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "emopanel/attribution.hpp"
#include "emopanel/bigru.hpp"
#include "emopanel/econ.hpp"

using namespace emopanel;

namespace {

text::TokenSequence sequence(std::size_t n, std::size_t T, std::size_t vocab) {
  Rng rng(1);
  text::TokenSequence s;
  for (std::size_t i = 0; i < n; ++i) s.ids.push_back(static_cast<text::TokenId>(rng.uniform_int(1, static_cast<std::int64_t>(vocab) - 1)));
  s.true_length = n;
  s.ids.resize(T, text::kPad);
  return s;
}

void BM_Forward(benchmark::State& state) {
  auto hp = bigru::Hyperparams::desk_scale();
  hp.T = static_cast<std::size_t>(state.range(0));
  auto p = bigru::ModelParams::init(2000, hp, 1);
  auto s = sequence(hp.T, hp.T, 2000);
  for (auto _ : state) benchmark::DoNotOptimize(bigru::forward(s, p));
}
BENCHMARK(BM_Forward)->Arg(12)->Arg(40);

void BM_ForwardBackward(benchmark::State& state) {
  auto hp = bigru::Hyperparams::desk_scale();
  hp.T = static_cast<std::size_t>(state.range(0));
  auto p = bigru::ModelParams::init(2000, hp, 1);
  auto s = sequence(hp.T, hp.T, 2000);
  for (auto _ : state) {
    bigru::ForwardCache c;
    bigru::forward(s, p, &c);
    benchmark::DoNotOptimize(bigru::backward(c, p, 3));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(12)->Arg(40);

void BM_ShapleyExact(benchmark::State& state) {
  auto hp = bigru::Hyperparams::desk_scale();
  hp.T = 12;
  auto p = bigru::ModelParams::init(500, hp, 2);
  auto s = sequence(static_cast<std::size_t>(state.range(0)), 12, 500);
  auto f = attribution::model_value(p, 1);
  for (auto _ : state) benchmark::DoNotOptimize(attribution::shapley_exact(f, s, 1));
}
BENCHMARK(BM_ShapleyExact)->Arg(6)->Arg(10);

void BM_ShapleySampled(benchmark::State& state) {
  auto hp = bigru::Hyperparams::desk_scale();
  hp.T = 40;
  auto p = bigru::ModelParams::init(500, hp, 2);
  auto s = sequence(30, 40, 500);
  auto f = attribution::model_value(p, 1);
  for (auto _ : state) benchmark::DoNotOptimize(attribution::shapley_sampled(f, s, static_cast<std::size_t>(state.range(0)), 3, 1));
}
BENCHMARK(BM_ShapleySampled)->Arg(50)->Arg(200);

void BM_FixedEffects(benchmark::State& state) {
  const auto firms = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  econ::Frame frame;
  std::vector<double> x1, x2, y;
  std::vector<std::string> firm, year;
  for (std::size_t f = 0; f < firms; ++f)
    for (int q = 0; q < 12; ++q) {
      double a = rng.normal(), b = rng.normal();
      x1.push_back(a);
      x2.push_back(b);
      y.push_back(static_cast<double>(f % 7) + a - b + rng.normal());
      firm.push_back(std::to_string(f));
      year.push_back(std::to_string(2015 + q / 4));
    }
  frame.n = y.size();
  frame.num = {{"x1", x1}, {"x2", x2}, {"y", y}};
  frame.keys = {{"firm", firm}, {"year", year}};
  econ::RegressionSpec spec;
  spec.name = "bench";
  spec.dependent = "y";
  spec.regressors = {"x1", "x2"};
  spec.fixed_effects = {"firm", "year"};
  for (auto _ : state) benchmark::DoNotOptimize(econ::fe_regress(frame, spec));
}
BENCHMARK(BM_FixedEffects)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
