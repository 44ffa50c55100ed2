// Benchmark comparing the OpenMP kernels against the serial reference
// implementations. Also cross-checks both paths agree while timing.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gcm/carafe.hpp"
#include "gcm/ops.hpp"
#include "gcm/reference.hpp"
#include "gcm/rng.hpp"
#include "gcm/ssm.hpp"

using namespace gcm;

namespace {

double time_ms(const std::function<Tensor()>& fn, int reps, Tensor& last) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        last = fn();
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (ms < best) best = ms;
    }
    return best;
}

void report(const char* name, const std::string& size, double serial_ms, double parallel_ms,
            double dev) {
    std::printf("%-16s %-18s %10.3f %10.3f %8.2fx   %.3e\n", name, size.c_str(), serial_ms,
                parallel_ms, serial_ms / parallel_ms, dev);
}

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
    return t;
}

} // namespace

int main(int argc, char** argv) {
    int reps = 5;
    if (argc > 1) reps = std::atoi(argv[1]);

#ifdef _OPENMP
    std::printf("# OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("# OpenMP disabled (serial build)\n");
#endif
    std::printf("%-16s %-18s %10s %10s %9s   %s\n", "kernel", "problem", "serial ms",
                "parallel", "speedup", "max |diff|");

    Rng rng(7);

    {
        const Tensor x = random_tensor({16, 64, 64}, rng);
        ConvWeights w = make_conv_weights(16, 16, 3, 1, 1, 1, rng);
        Tensor a, b;
        const double ts = time_ms([&] { return ref::conv2d(x, w); }, reps, a);
        const double tp = time_ms([&] { return conv2d(x, w); }, reps, b);
        report("conv2d", "16x64x64 k3", ts, tp, max_abs_diff(a, b));
    }
    {
        const Tensor x = random_tensor({16, 32, 32}, rng);
        CarafeConfig cfg; // k_up 5, k_encoder 3, scale 2
        CarafeWeights w = make_carafe_weights(16, cfg, rng);
        Tensor a, b;
        const double ts = time_ms([&] { return ref::carafe_forward(x, w, cfg); }, reps, a);
        const double tp = time_ms([&] { return carafe_forward(x, w, cfg); }, reps, b);
        report("carafe_forward", "16x32x32 r2 k5", ts, tp, max_abs_diff(a, b));
    }
    {
        const Tensor x = random_tensor({8, 32, 32}, rng);
        std::array<DiscreteSsm, 4> dirs = {
            zoh_discretize(make_random_ssm(4, rng)), zoh_discretize(make_random_ssm(4, rng)),
            zoh_discretize(make_random_ssm(4, rng)), zoh_discretize(make_random_ssm(4, rng))};
        Tensor a, b;
        const double ts = time_ms([&] { return ref::ss2d_scan(x, dirs); }, reps, a);
        const double tp = time_ms([&] { return ss2d_scan(x, dirs); }, reps, b);
        report("ss2d_scan", "8x32x32 n4", ts, tp, max_abs_diff(a, b));
    }
    return 0;
}
