// Copyright 2026 The errscale Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "errscale/error_model.hpp"
#include "errscale/inference.hpp"
#include "errscale/rng.hpp"
#include "errscale/tasks.hpp"

using namespace errscale;

namespace {

std::vector<AccuracyPoint> synthetic_points(std::uint64_t seed) {
    const ErrorModelParams truth{2.7e-4, 4.2, 1.0};
    Rng rng(seed);
    std::vector<AccuracyPoint> pts;
    for (std::int64_t c : {8, 16, 32, 64, 128, 256, 512}) {
        pts.push_back(AccuracyPoint::from_counts(c, 200, rng.binomial(200, accuracy(truth, static_cast<double>(c)))));
    }
    return pts;
}

}  // namespace

static void BM_Accuracy(benchmark::State& state) {
    const ErrorModelParams params{1e-3, static_cast<double>(state.range(0)), 1.0};
    double c = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(accuracy(params, c));
        c = c < 1000 ? c * 1.01 : 1;
    }
}
BENCHMARK(BM_Accuracy)->Arg(1)->Arg(4)->Arg(64)->Arg(4096);

static void BM_MonteCarloAccuracy(benchmark::State& state) {
    MonteCarloConfig cfg = MonteCarloConfig::from_params({0.1, 4, 1.0}, state.range(0), 1);
    for (auto _ : state) benchmark::DoNotOptimize(mc_accuracy(cfg, 3.0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarloAccuracy)->Arg(1 << 16)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

static void BM_CredibleHalfwidth(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    std::int64_t r = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(credible_halfwidth(r, n));
        r = (r + 7) % (n + 1);
    }
}
BENCHMARK(BM_CredibleHalfwidth)->Arg(200)->Arg(10'000);

static void BM_FitFixedAlpha(benchmark::State& state) {
    const auto pts = synthetic_points(3);
    FitOptions opts;
    opts.bootstrap_replicates = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fit(pts, AlphaMode::fixed(1.0), opts));
}
BENCHMARK(BM_FitFixedAlpha)->Arg(0)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_FitFreeAlpha(benchmark::State& state) {
    const auto pts = synthetic_points(3);
    FitOptions opts;
    opts.bootstrap_replicates = 0;
    for (auto _ : state) benchmark::DoNotOptimize(fit(pts, AlphaMode::free(), opts));
}
BENCHMARK(BM_FitFreeAlpha)->Unit(benchmark::kMillisecond);

static void BM_GenerateAndPrompt(benchmark::State& state) {
    const auto kind = kAllTaskKinds[static_cast<std::size_t>(state.range(0))];
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const auto inst = generate(kind, 16, ++seed);
        benchmark::DoNotOptimize(render_prompt(inst));
    }
    state.SetLabel(std::string(task_name(kind)));
}
BENCHMARK(BM_GenerateAndPrompt)->DenseRange(0, static_cast<int>(kAllTaskKinds.size()) - 1);

static void BM_ParseAndGrade(benchmark::State& state) {
    const auto kind = kAllTaskKinds[static_cast<std::size_t>(state.range(0))];
    const auto inst = generate(kind, 16, 42);
    const auto response = format_response(inst);
    for (auto _ : state) benchmark::DoNotOptimize(grade(inst, parse(kind, response)));
    state.SetLabel(std::string(task_name(kind)));
}
BENCHMARK(BM_ParseAndGrade)->DenseRange(0, static_cast<int>(kAllTaskKinds.size()) - 1);

static void BM_Binomial(benchmark::State& state) {
    Rng rng(8);
    const std::int64_t n = state.range(0);
    for (auto _ : state) benchmark::DoNotOptimize(rng.binomial(n, 0.37));
}
BENCHMARK(BM_Binomial)->Arg(200)->Arg(100'000)->Arg(1'000'000'000);
BENCHMARK_MAIN();
