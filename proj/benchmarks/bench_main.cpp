#include <benchmark/benchmark.h>

#include "lagcn/edge_classifier.hpp"
#include "lagcn/graph.hpp"
#include "lagcn/propagation.hpp"
#include "lagcn/refinement.hpp"

namespace {

using namespace lagcn;

Dataset make(std::size_t n) {
    SynthParams p;
    p.num_nodes = n;
    p.num_classes = 4;
    p.feature_dim = 32;
    p.avg_degree = 8;
    p.seed = 1;
    return synth(p);
}

void BM_Propagate(benchmark::State& state) {
    const Dataset d = make(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(propagate(d.graph, d.table.features, {2}));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.graph.num_edges()));
}
BENCHMARK(BM_Propagate)->Arg(1000)->Arg(10000);

void BM_ScoreEdges(benchmark::State& state) {
    const Dataset d = make(static_cast<std::size_t>(state.range(0)));
    TrainConfig tc;
    const EdgeClassifier c = EdgeClassifier::initialize(d.table.features.cols(), tc);
    const ClassifierScorer scorer(c, d.table.features);
    for (auto _ : state) {
        double sum = 0.0;
        for (NodeId u = 0; u < d.graph.num_nodes(); ++u)
            for (NodeId v : d.graph.neighbors(u)) sum += scorer.score(u, v);
        benchmark::DoNotOptimize(sum);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.graph.num_edges()));
}
BENCHMARK(BM_ScoreEdges)->Arg(1000)->Arg(10000);

void BM_Refine(benchmark::State& state) {
    const Dataset d = make(static_cast<std::size_t>(state.range(0)));
    const OracleScorer scorer(d.table, OracleClassifier{0.9, 0.2, 0.8, 3});
    RefinementConfig cfg;
    cfg.n_max = 10;
    for (auto _ : state) benchmark::DoNotOptimize(refine(d.graph, &d.table, scorer, cfg, nullptr));
}
BENCHMARK(BM_Refine)->Arg(1000)->Arg(10000);

} // namespace

BENCHMARK_MAIN();
