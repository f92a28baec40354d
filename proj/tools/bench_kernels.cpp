// Timing comparison between the serial reference kernels and the OpenMP
// versions, plus an end-to-end round throughput check at two thread counts.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "copfl/config.hpp"
#include "copfl/kernels.hpp"
#include "copfl/mamo.hpp"
#include "copfl/model.hpp"
#include "copfl/rng.hpp"
#include "copfl/runner.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Fn>
double time_loop(int repeats, Fn&& fn) {
    const auto start = Clock::now();
    for (int i = 0; i < repeats; ++i) fn();
    return seconds_since(start) / repeats;
}

void bench_vector_kernels() {
    constexpr std::size_t n = 1 << 22;
    std::vector<double> a(n), b(n), out(n);
    std::vector<std::uint8_t> mask(n);
    copfl::rng::Stream stream(42);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = stream.next_unit();
        b[i] = stream.next_unit();
        mask[i] = static_cast<std::uint8_t>(stream.next_u64() & 1);
    }

    volatile double sink = 0.0;
    const int repeats = 20;

    const double dot_serial = time_loop(repeats, [&] {
        sink = copfl::kernels::serial::dot(a.data(), b.data(), n);
    });
    const double dot_parallel = time_loop(repeats, [&] {
        sink = copfl::kernels::dot(a.data(), b.data(), n);
    });
    const double mask_serial = time_loop(repeats, [&] {
        copfl::kernels::serial::apply_mask(out.data(), a.data(), mask.data(), n);
    });
    const double mask_parallel = time_loop(repeats, [&] {
        copfl::kernels::apply_mask(out.data(), a.data(), mask.data(), n);
    });

    std::printf("%-22s %12s %12s %9s\n", "kernel (n=2^22)", "serial s", "openmp s", "speedup");
    std::printf("%-22s %12.6f %12.6f %8.2fx\n", "dot", dot_serial, dot_parallel,
                dot_serial / dot_parallel);
    std::printf("%-22s %12.6f %12.6f %8.2fx\n", "apply_mask", mask_serial, mask_parallel,
                mask_serial / mask_parallel);
    (void)sink;
}

void bench_round(int threads) {
#ifdef _OPENMP
    omp_set_num_threads(threads);
#endif
    copfl::ExperimentConfig config;
    config.algorithm = copfl::AlgorithmKind::co_pfl;
    config.seed = 7;
    config.rounds = 20;
    const auto start = Clock::now();
    const copfl::ExperimentResult result = copfl::run_experiment(config);
    const double total = seconds_since(start);
    std::printf("co_pfl 20 rounds, %d thread(s): %.3f s (final acc %.4f)\n", threads, total,
                result.records.back().mean_acc);
}

}  // namespace

int main() {
    bench_vector_kernels();
#ifdef _OPENMP
    const int max_threads = omp_get_max_threads();
#else
    const int max_threads = 1;
#endif
    bench_round(1);
    if (max_threads > 1) bench_round(max_threads);
    return 0;
}
