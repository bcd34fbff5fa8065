// Serial reference vs OpenMP kernels: AD gradient sweeps and the verifier.

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "delayoc/corpus.hpp"
#include "delayoc/sufficiency.hpp"
#include "delayoc/transcribe.hpp"

using namespace delayoc;

namespace {

struct Gollmann {
  CorpusEntry entry = gollmann();
  std::shared_ptr<const CompiledProblem> problem = std::make_shared<const CompiledProblem>(entry.problem);
  DelayLattice lattice = build_lattice(entry.problem);
};

void gradient(benchmark::State& state, bool parallel) {
  Gollmann g;
  const Transcription tr(g.problem, g.lattice, TranscribeConfig{state.range(0)});
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  std::vector<double> z(tr.size());
  for (auto& v : z) v = U(rng);
  for (auto _ : state) benchmark::DoNotOptimize(tr.gradient(z, parallel));
  state.counters["coords"] = static_cast<double>(tr.size());
}

void verify(benchmark::State& state, bool parallel) {
  Gollmann g;
  const BoundCandidate cand(g.problem, g.lattice, *g.entry.candidate);
  auto opts = g.entry.verify;
  opts.hj_density = opts.max_density = static_cast<int>(state.range(0));
  opts.parallel = parallel;
  for (auto _ : state) benchmark::DoNotOptimize(verify_all(cand, opts));
}

}  // namespace

BENCHMARK_CAPTURE(gradient, serial, false)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(gradient, openmp, true)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(verify, serial, false)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(verify, openmp, true)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
