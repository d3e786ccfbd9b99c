#include <benchmark/benchmark.h>

#include "mmturn/core/rng.hpp"
#include "mmturn/data/samples.hpp"
#include "mmturn/data/synthetic.hpp"
#include "mmturn/eval.hpp"
#include "mmturn/fusion.hpp"
#include "mmturn/kernels.hpp"
#include "mmturn/model.hpp"

using namespace mmturn;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (auto& x : m.span()) x = rng.uniform(-1, 1);
    return m;
}

Vector random_vector(std::size_t n, Rng& rng) {
    Vector v(n);
    for (auto& x : v) x = rng.uniform(-1, 1);
    return v;
}

// range(0): rank, range(1): fused width = feature width
void rank_project(benchmark::State& state, kernels::Exec exec) {
    Rng rng(1);
    const auto rank = static_cast<std::size_t>(state.range(0));
    const auto width = static_cast<std::size_t>(state.range(1));
    const Matrix stacked = random_matrix(rank * width, width, rng);
    const Vector z = random_vector(width, rng);
    Vector out(rank * width);
    for (auto _ : state) {
        kernels::rank_project(exec, stacked, z.span(), out.span());
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stacked.size()));
}

void rank_project_backward(benchmark::State& state, kernels::Exec exec) {
    Rng rng(2);
    const auto rank = static_cast<std::size_t>(state.range(0));
    const auto width = static_cast<std::size_t>(state.range(1));
    const Matrix stacked = random_matrix(rank * width, width, rng);
    const Vector z = random_vector(width, rng);
    const Vector g = random_vector(rank * width, rng);
    Matrix grad(rank * width, width);
    Vector grad_z(width);
    for (auto _ : state) {
        kernels::rank_project_backward(exec, stacked, z.span(), g.span(), grad, grad_z.span());
        benchmark::DoNotOptimize(grad.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(stacked.size()));
}

void fuse_full(benchmark::State& state, kernels::Exec exec) {
    Rng rng(3);
    FusionConfig cfg;
    cfg.rank = static_cast<std::size_t>(state.range(0));
    cfg.fused_width = static_cast<std::size_t>(state.range(1));
    cfg.feature_widths = {cfg.fused_width, cfg.fused_width, cfg.fused_width};
    const FusionParams p = FusionParams::init(cfg, rng);
    FeatureSet z;
    for (auto& f : z) f = random_vector(cfg.fused_width, rng);
    for (auto _ : state) benchmark::DoNotOptimize(fuse(z, ModalityMask::full(), p, exec));
}

void evaluate_tri(benchmark::State& state, kernels::Exec exec) {
    data::SyntheticConfig cfg;
    cfg.num_words = 500;
    cfg.seed = 4;
    const auto manifest = data::gen_synthetic(cfg).manifest;
    const auto vocab = data::Vocabulary::from_manifest(manifest);
    const auto samples =
        data::build_samples(manifest, vocab, data::SampleOptions{cfg.video_frames, cfg.audio_hop});
    ModelConfig mc;
    mc.audio_hop = cfg.audio_hop;
    const auto bundle = ModelBundle::init(mc, vocab, 5);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(bundle, samples, ModalityMask::full(), exec));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples.size()));
}

}  // namespace

BENCHMARK_CAPTURE(rank_project, serial, kernels::Exec::Serial)->Args({16, 64})->Args({16, 256});
BENCHMARK_CAPTURE(rank_project, omp, kernels::Exec::Parallel)->Args({16, 64})->Args({16, 256});
BENCHMARK_CAPTURE(rank_project_backward, serial, kernels::Exec::Serial)->Args({16, 64})->Args({16, 256});
BENCHMARK_CAPTURE(rank_project_backward, omp, kernels::Exec::Parallel)->Args({16, 64})->Args({16, 256});
BENCHMARK_CAPTURE(fuse_full, serial, kernels::Exec::Serial)->Args({16, 256});
BENCHMARK_CAPTURE(fuse_full, omp, kernels::Exec::Parallel)->Args({16, 256});
BENCHMARK_CAPTURE(evaluate_tri, serial, kernels::Exec::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(evaluate_tri, omp, kernels::Exec::Parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
