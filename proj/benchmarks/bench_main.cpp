#include <benchmark/benchmark.h>

#include "dpd/candidates.hpp"
#include "dpd/classifier.hpp"
#include "dpd/evolution.hpp"
#include "dpd/repository.hpp"
#include "support.hpp"

using namespace dpd;

namespace {

const std::vector<std::string> kRoles{"adapter", "adaptee", "target"};

Grammar grammar_for(const Dataset& d) {
    GrammarConfig gc{kRoles, all_ops(), d.observed_ranges()};
    return Grammar(gc);
}

void BM_RuleStats(benchmark::State& state) {
    Rng rng(1);
    auto g = std::make_shared<const CodeFactsGraph>(testing::random_graph(rng, 30));
    Dataset d = testing::random_dataset(rng, kRoles, static_cast<std::size_t>(state.range(0)), g);
    Grammar gr = grammar_for(d);
    std::vector<Rule> rules;
    for (int i = 0; i < 64; ++i) rules.push_back(to_rule(random_rule_tree(gr, 25, rng), gr));
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(d.stats(rules[i++ % rules.size()]));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RuleStats)->Arg(100)->Arg(1000);

void BM_DatasetBuild(benchmark::State& state) {
    Rng rng(2);
    auto g = std::make_shared<const CodeFactsGraph>(testing::random_graph(rng, 30));
    Dataset d = testing::random_dataset(rng, kRoles, static_cast<std::size_t>(state.range(0)), g);
    for (auto _ : state) {
        Dataset copy(kRoles, d.samples());
        benchmark::DoNotOptimize(copy.size());
    }
}
BENCHMARK(BM_DatasetBuild)->Arg(100);

void BM_AdapterCandidates(benchmark::State& state) {
    Rng rng(3);
    CodeFactsGraph g = testing::random_graph(rng, static_cast<std::size_t>(state.range(0)));
    RoleTemplate t = load_template(testing::template_path("Adapter"));
    for (auto _ : state) benchmark::DoNotOptimize(generate_candidates(g, t).size());
}
BENCHMARK(BM_AdapterCandidates)->Arg(20)->Arg(60);

void BM_Evolution(benchmark::State& state) {
    Rng rng(4);
    auto g = std::make_shared<const CodeFactsGraph>(testing::random_graph(rng, 30));
    Dataset d = testing::random_dataset(rng, kRoles, 100, g);
    Grammar gr = grammar_for(d);
    EvolutionConfig cfg;
    cfg.maxGen = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_g3p4dpd(cfg, gr, d).archive.size());
}
BENCHMARK(BM_Evolution)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Classify(benchmark::State& state) {
    LabeledRepository repo = testing::singleton_corpus(30, 60, 1);
    TrainConfig c;
    c.evolution.maxGen = 30;
    DetectionModel m = train(repo, c).model;
    Dataset d = repo.dataset();
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(classify(m, d, i++ % d.size()).label);
}
BENCHMARK(BM_Classify);

} // namespace

BENCHMARK_MAIN();
