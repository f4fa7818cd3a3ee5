#include <finsent/corpus.hpp>
#include <finsent/prompting.hpp>
#include <finsent/regression.hpp>
#include <finsent/scoring.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace finsent;

namespace {

void BM_DetectTickers(benchmark::State& state) {
    const TickerLexicon lexicon{"GME", "AMC", "SPY", "AAPL", "TSLA"};
    const std::string text =
        "Bought more $gme calls today, AMC looking weak but SPY puts printed. "
        "Not touching TSLA until earnings. GME🚀🚀 diamond hands, A.M.C. is not a ticker.";
    for (auto _ : state) benchmark::DoNotOptimize(detect_tickers(text, lexicon));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_DetectTickers);

void BM_CsbsDay(benchmark::State& state) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<DatedPrediction> preds;
    for (std::int64_t i = 0; i < state.range(0); ++i) {
        const auto p = ProbTriple::normalized(u(rng), u(rng), u(rng));
        preds.push_back({Instant{std::chrono::seconds{static_cast<long long>(rng() % 86400)}},
                         Prediction{"d" + std::to_string(i), p.argmax(), p, std::nullopt}});
    }
    for (auto _ : state) benchmark::DoNotOptimize(csbs_day(preds, "GME", Date{}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CsbsDay)->Arg(100)->Arg(10000);

void BM_FitLinear(benchmark::State& state) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    const auto rows = state.range(0);
    Eigen::MatrixXd x(rows, 6);
    Eigen::VectorXd y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < 6; ++c) x(r, c) = n(rng) * (c + 1);
        y(r) = x.row(r).sum() + n(rng);
    }
    for (auto _ : state) benchmark::DoNotOptimize(fit_linear(x, y, 0.1));
}
BENCHMARK(BM_FitLinear)->Arg(500)->Arg(50000);

void BM_RenderAiapPrompt(benchmark::State& state) {
    const auto spec = InstructionSpec::bundled_default();
    const std::string text = "Financial terms were not disclosed.";
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_aiap_prompt(text, IdentifierTerm::news, spec, Components::dge()));
    }
}
BENCHMARK(BM_RenderAiapPrompt);

}  // namespace
BENCHMARK_MAIN();
