#include <benchmark/benchmark.h>

#include "mmalign/eval.h"
#include "mmalign/loss.h"
#include "mmalign/ops.h"
#include "mmalign/optim.h"
#include "mmalign/random.h"
#include "mmalign/synthetic.h"
#include "mmalign/trainer.h"

namespace mmalign {
namespace {

void BM_MatMul(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  Tape tape;
  Var a = tape.Constant(rng.NormalTensor({n, n}, 1.0));
  Var b = tape.Constant(rng.NormalTensor({n, n}, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(ops::MatMul(a, b).value().data().data());
  state.SetItemsProcessed(state.iterations() * 2 * int64_t{n} * n * n);
}
BENCHMARK(BM_MatMul)->Arg(64)->Arg(128)->Arg(256);

// One forward/backward/update step over every seed pair of an N-entity pair.
void BM_TrainStep(benchmark::State& state) {
  GeneratorConfig g;
  g.entities = static_cast<int>(state.range(0));
  const SyntheticPair sp = GenerateSyntheticPair(g, 1);
  ModelConfig cfg;
  const PreparedData data = PrepareData(sp.data, cfg, {}, 2);
  const AlignmentSplit split = SplitAlignments(sp.data.alignments, 0.3, 3);
  ParameterStore params = InitParameters(cfg, data.inputs.num_entities(), 4);
  AdamW opt;
  Batch batch;
  for (const auto& [i, j] : split.train) batch.emplace_back(i, data.inputs.num_kg1 + j);
  for (auto _ : state) {
    Tape tape;
    const BoundParameters bound(tape, params);
    const ModelOutput out = Forward(cfg, bound, tape, data.inputs);
    const LossBreakdown loss = TotalLoss(out, batch, LossConfig{});
    const Gradients grads = tape.Backward(loss.total);
    std::map<std::string, Tensor> by_name;
    for (const auto& [name, var] : bound.vars()) by_name[name] = grads[var];
    opt.Step(params, by_name, 1e-3);
  }
}
BENCHMARK(BM_TrainStep)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Rank(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(5);
  const Tensor src = rng.NormalTensor({n, 64}, 1.0), tgt = rng.NormalTensor({n, 64}, 1.0);
  std::vector<EntityPair> test;
  for (int i = 0; i < n; ++i) test.emplace_back(i, (i * 7 + 3) % n);
  for (auto _ : state) benchmark::DoNotOptimize(RankAlignments(src, tgt, test).ranks.data());
}
BENCHMARK(BM_Rank)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace mmalign

BENCHMARK_MAIN();
