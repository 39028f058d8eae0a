#include <benchmark/benchmark.h>

#include "itc/analysis.hpp"
#include "itc/answer.hpp"
#include "itc/pareto.hpp"
#include "itc/strategies.hpp"

#include <random>

namespace {

std::vector<std::optional<itc::NormalizedAnswer>> random_votes(std::size_t n) {
    static const char* pool[] = {"42", "\\frac{1}{2}", "0.5", "7", "x+1", "1+x"};
    std::mt19937_64 rng(1);
    std::vector<std::optional<itc::NormalizedAnswer>> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (rng() % 10 == 0) {
            out.emplace_back();
        } else {
            out.push_back(itc::normalize_math(pool[rng() % std::size(pool)]));
        }
    }
    return out;
}

void BM_MajorityVote(benchmark::State& state) {
    auto answers = random_votes(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(itc::majority_vote(answers));
}
BENCHMARK(BM_MajorityVote)->Arg(8)->Arg(64);

void BM_ParetoFront(benchmark::State& state) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> compute(0, 10000), accuracy(0, 1);
    std::vector<itc::ParetoPoint> points;
    for (int i = 0; i < state.range(0); ++i)
        points.push_back({"p" + std::to_string(i), compute(rng), accuracy(rng), 1});
    for (auto _ : state) benchmark::DoNotOptimize(itc::pareto_front(points));
}
BENCHMARK(BM_ParetoFront)->Arg(1000);

void BM_CountMarkers(benchmark::State& state) {
    std::string text;
    for (int i = 0; i < 200; ++i) text += "Wait, maybe the answer is 12. Let me check the sum again, perhaps. ";
    auto lexicon = itc::MarkerLexicon::standard();
    for (auto _ : state) benchmark::DoNotOptimize(itc::count_markers(text, lexicon));
}
BENCHMARK(BM_CountMarkers);

} // namespace

BENCHMARK_MAIN();
