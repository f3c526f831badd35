#include <benchmark/benchmark.h>

#include <random>

#include "ls/embed/charseq.hpp"
#include "ls/embed/embedding.hpp"
#include "ls/metrics/edit_distance.hpp"
#include "ls/metrics/geometry.hpp"
#include "ls/surrogate/box_pool.hpp"
#include "ls/surrogate/loss.hpp"
#include "ls/surrogate/string_gen.hpp"

namespace {

using namespace ls;

void BM_EditDistance(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> letter('a', 'z');
  std::string a(static_cast<std::size_t>(state.range(0)), 'a'), b = a;
  for (char& c : a) c = static_cast<char>(letter(rng));
  for (char& c : b) c = static_cast<char>(letter(rng));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::edit_distance(a, b));
}
BENCHMARK(BM_EditDistance)->Arg(8)->Arg(32)->Arg(128);

void BM_RotatedIou(benchmark::State& state) {
  const auto a = metrics::RotatedBox::from_angle(0.5, 0.5, 0.3, 0.1, 0.4);
  const auto b = metrics::RotatedBox::from_angle(0.52, 0.48, 0.25, 0.12, 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::rotated_iou(a, b));
}
BENCHMARK(BM_RotatedIou);

void BM_MonteCarloIou(benchmark::State& state) {
  const auto a = metrics::RotatedBox::from_angle(0.5, 0.5, 0.3, 0.1, 0.4);
  const auto b = metrics::RotatedBox::from_angle(0.52, 0.48, 0.25, 0.12, 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::mc_iou(a, b, 100'000, 7));
}
BENCHMARK(BM_MonteCarloIou)->Unit(benchmark::kMillisecond);

// One forward + double-backward + parameter-gradient pass of the surrogate loss.
void BM_CharCnnLossStep(benchmark::State& state) {
  embed::CharCnnEmbedding net(embed::CharCnnConfig::toy(), 1);
  surrogate::StringPairGenerator gen(surrogate::StringGenConfig{});
  const auto batch = gen.next(static_cast<std::size_t>(state.range(0)));
  surrogate::SurrogateLossConfig config;
  for (auto _ : state) {
    const auto terms = surrogate::surrogate_loss(net, batch, config);
    net.params().zero_grad();
    net.params().backward(terms.loss);
  }
}
BENCHMARK(BM_CharCnnLossStep)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_BoxMlpLossStep(benchmark::State& state) {
  embed::BoxMlpEmbedding net(embed::BoxMlpConfig{}, 1);
  surrogate::BoxGenConfig pool_config;
  pool_config.labels = surrogate::random_label_boxes({});
  pool_config.pool_size = 2000;
  auto pool = std::make_shared<surrogate::BoxPool>(surrogate::build_box_pool(pool_config));
  surrogate::BoxPoolSampler sampler(pool, 3);
  const auto batch = sampler.next(static_cast<std::size_t>(state.range(0)));
  surrogate::SurrogateLossConfig config;
  for (auto _ : state) {
    const auto terms = surrogate::surrogate_loss(net, batch, config);
    net.params().zero_grad();
    net.params().backward(terms.loss);
  }
}
BENCHMARK(BM_BoxMlpLossStep)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_BuildBoxPool(benchmark::State& state) {
  surrogate::BoxGenConfig config;
  config.labels = surrogate::random_label_boxes({});
  config.pool_size = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(surrogate::build_box_pool(config));
}
BENCHMARK(BM_BuildBoxPool)->Arg(10'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
