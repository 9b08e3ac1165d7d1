// Serial reference vs OpenMP timings for the two quadratic loops.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>

#include "geoflock/kernels.hpp"
#include "geoflock/parallel.hpp"

using namespace geoflock;

namespace {

template <class F>
double best_of(int reps, F &&f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

double max_diff(const std::vector<double> &a, const std::vector<double> &b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

} // namespace

int main(int argc, char **argv) {
    const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
    par::configure_threads();
    const int reps = quick ? 2 : 5;
    std::printf("threads %d\n", par::worker_count());

    const ManifoldSpace circle = ManifoldSpace::circle();
    const KernelSpec mid = KernelSpec::midpoint(circle);
    for (int M : quick ? std::vector<int>{128, 256} : std::vector<int>{256, 512, 1024}) {
        std::vector<double> rho(M);
        for (int k = 0; k < M; ++k) rho[k] = (1.0 + 0.25 * std::cos(2.0 * std::numbers::pi * k / M)) / (2.0 * std::numbers::pi);
        const DepositionTable table = grid_pushforward(mid, M);
        std::vector<double> a, b;
        const double ts = best_of(reps, [&] { a = par::gain_scatter_serial(table, rho); });
        const double tp = best_of(reps, [&] { b = par::gain_gather_omp(rho); });
        std::printf("gain    M=%-5d serial %9.3f ms  omp %9.3f ms  speedup %5.2f  maxdiff %.2e\n", M, ts * 1e3, tp * 1e3,
                    ts / tp, max_diff(a, b));
    }

    const ManifoldSpace s2 = ManifoldSpace::sphere(2);
    Rng rng = make_stream(1, 0);
    for (int N : quick ? std::vector<int>{500, 1000} : std::vector<int>{1000, 2000, 4000}) {
        std::vector<Point> pts;
        for (int k = 0; k < N; ++k) pts.push_back(sample_uniform(s2, rng));
        const std::vector<double> w(N, 1.0 / N);
        std::vector<double> a, b;
        const double ts = best_of(reps, [&] { a = par::pairwise_row_sums_serial(s2, pts, w); });
        const double tp = best_of(reps, [&] { b = par::pairwise_row_sums_omp(s2, pts, w); });
        std::printf("rowsums N=%-5d serial %9.3f ms  omp %9.3f ms  speedup %5.2f  maxdiff %.2e\n", N, ts * 1e3, tp * 1e3,
                    ts / tp, max_diff(a, b));
    }
    return 0;
}
