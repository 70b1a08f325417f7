// Compares the OpenMP kernels against their serial reference on a fixed
// workload: batch gradient accumulation and rollout evaluation.

#include <chrono>
#include <cstdio>
#include <memory>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "viexec/evaluation.hpp"
#include "viexec/training.hpp"

using namespace viexec;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace

int main(int argc, char** argv) {
    int repeats = 3;
    if (argc > 1) repeats = std::stoi(argv[1]);

    const std::uint64_t seed = 20240817;
    GenSpec spec;  // ER 20/5, the training distribution
    const auto dataset = make_dataset(spec, 64, 10, seed, "bench-mdp");

    MpnnConfig config;
    Rng rng(derive_seed(seed, "bench-init", 0));
    MpnnParams params = MpnnParams::init(config, rng);

    const int threads = max_threads();
    std::printf("threads available: %d, repeats: %d\n\n", threads, repeats);
    std::printf("%-24s %12s %12s %9s\n", "kernel", "serial_ms", "parallel_ms", "speedup");

    {
        double serial = 0.0, parallel = 0.0;
        for (int r = 0; r < repeats; ++r) {
            auto t0 = std::chrono::steady_clock::now();
            batch_gradients(params, dataset, 0, static_cast<int>(dataset.size()), 1);
            serial += seconds_since(t0);
            params.zero_grads();
            t0 = std::chrono::steady_clock::now();
            batch_gradients(params, dataset, 0, static_cast<int>(dataset.size()), threads);
            parallel += seconds_since(t0);
            params.zero_grads();
        }
        std::printf("%-24s %12.2f %12.2f %8.2fx\n", "batch_gradients(64)", 1e3 * serial / repeats,
                    1e3 * parallel / repeats, serial / parallel);
    }

    {
        const auto suite = std::vector<SuiteEntry>{{spec, 48}};
        auto make_step = [&params] {
            auto stepper = std::make_shared<ExecutorStepper>(params);
            return StepFn(
                [stepper](const Mdp& mdp, const ValueFunction& v) { return stepper->step(mdp, v); });
        };
        EvalOptions options;
        options.max_steps = 60;
        double serial = 0.0, parallel = 0.0;
        for (int r = 0; r < repeats; ++r) {
            options.workers = 1;
            auto t0 = std::chrono::steady_clock::now();
            evaluate_suite(make_step, "bench", suite, seed, options);
            serial += seconds_since(t0);
            options.workers = threads;
            t0 = std::chrono::steady_clock::now();
            evaluate_suite(make_step, "bench", suite, seed, options);
            parallel += seconds_since(t0);
        }
        std::printf("%-24s %12.2f %12.2f %8.2fx\n", "rollout_suite(48)", 1e3 * serial / repeats,
                    1e3 * parallel / repeats, serial / parallel);
    }
    return 0;
}
