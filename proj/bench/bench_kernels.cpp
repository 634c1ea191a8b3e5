// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

#include "semilabel/cotrain.hpp"
#include "semilabel/eval.hpp"
#include "semilabel/lexicon.hpp"
#include "semilabel/linear.hpp"
#include "semilabel/model_io.hpp"
#include "semilabel/pmi.hpp"
#include "semilabel/scorer.hpp"
#include "synthetic.hpp"

using namespace semilabel;

namespace {

struct Setup {
  std::vector<ModelFile> files;
  std::vector<Instance> corpus;

  Setup() {
    auto train = synthetic::planted(3000, 1, "t").docs;
    for (Level level : {Level::A, Level::B, Level::C}) {
      auto data = synthetic::at_level(train, level);
      PmiConfig pc;
      pc.min_count = 2;
      files.push_back({"pmi", ModelKind::Discrete, PmiModel::train(data, level, pc)});
      files.push_back({"linear", ModelKind::Continuous, LinearSubwordModel::train(data, level, LinearConfig::defaults_for(level))});
    }
    files.push_back({"lexicon", ModelKind::Discrete, LexiconModel()});
    for (auto& d : synthetic::planted(20000, 2, "x").docs) corpus.push_back(std::move(d.instance));
  }

  Ensemble ensemble() const {
    auto pmi = std::make_unique<NativeScorer>("pmi", ModelKind::Discrete);
    auto lin = std::make_unique<NativeScorer>("linear", ModelKind::Continuous);
    auto lex = std::make_unique<NativeScorer>("lexicon", ModelKind::Discrete);
    for (const auto& f : files) (f.name == "pmi" ? *pmi : f.name == "linear" ? *lin : *lex).add(f);
    Ensemble e;
    e.add(std::move(pmi));
    e.add(std::move(lin));
    e.add(std::move(lex));
    return e;
  }
};

const Setup& setup() {
  static const Setup s;
  return s;
}

std::vector<double> scores(std::size_t n) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(0.5, 0.3);
  std::vector<double> xs(n);
  for (auto& x : xs) x = d(rng);
  return xs;
}

void BM_CascadeSerial(benchmark::State& state) {
  auto e = setup().ensemble();
  for (auto _ : state) benchmark::DoNotOptimize(run_cascade_serial(e, setup().corpus));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(setup().corpus.size()));
}

void BM_CascadeParallel(benchmark::State& state) {
  auto e = setup().ensemble();
  CascadeOptions opt;
  opt.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_cascade(e, setup().corpus, opt));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(setup().corpus.size()));
}

void BM_HistogramSerial(benchmark::State& state) {
  auto xs = scores(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(score_histogram_serial(xs, 50, 0.0, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_HistogramParallel(benchmark::State& state) {
  auto xs = scores(static_cast<std::size_t>(state.range(0)));
  int threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(score_histogram(xs, 50, 0.0, 1.0, threads));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_CascadeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CascadeParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HistogramSerial)->Arg(1 << 20)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_HistogramParallel)->Args({1 << 20, 1})->Args({1 << 20, 4})->Args({1 << 20, 8})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
