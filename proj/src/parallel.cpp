#include "geoflock/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <numbers>
#include <string>

#include "geoflock/errors.hpp"

namespace geoflock::par {

int worker_count() {
    if (const char *env = std::getenv("GEOFLOCK_THREADS")) {
        char *end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
    }
    return omp_get_max_threads();
}

void configure_threads() { omp_set_num_threads(worker_count()); }

std::vector<double> gain_scatter_serial(const DepositionTable &table, const std::vector<double> &rho) {
    const int M = table.M;
    if (static_cast<int>(rho.size()) != M) throw UsageError("density size does not match deposition table");
    const double dtheta = 2.0 * std::numbers::pi / M;
    std::vector<double> gain(M, 0.0);
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            const double mass = rho[i] * rho[j];
            if (mass == 0.0) continue;
            const int row = i * M + j;
            for (int e = table.row_ptr[row]; e < table.row_ptr[row + 1]; ++e)
                gain[table.node[e]] += mass * table.fraction[e];
        }
    }
    for (double &g : gain) g *= dtheta;
    return gain;
}

std::vector<double> gain_gather_omp(const std::vector<double> &rho) {
    const int M = static_cast<int>(rho.size());
    if (M < 4 || M % 2 != 0) throw UsageError("grid size must be even and >= 4");
    const double dtheta = 2.0 * std::numbers::pi / M;
    const int half = M / 2;
    auto wrap = [M](int x) { return x < 0 ? x + M : (x >= M ? x - M : x); }; // x in (-M, 2M)
    std::vector<double> gain(M, 0.0);

    // Pair (i, i + d) has its midpoint at half-index 2i + d', d' the signed short offset.
    // The antipodal offset M/2 carries two midpoints, d' = +M/2 and -M/2, each with weight 1/2.
#pragma omp parallel for schedule(static)
    for (int k = 0; k < M; ++k) {
        double sum = 0.0;
        for (int d = 0; d < M; ++d) {
            const int nd = d == half ? 2 : 1;
            for (int s = 0; s < nd; ++s) {
                const int dp = d < half ? d : (d > half ? d - M : (s == 0 ? half : -half));
                const double w = nd == 2 ? 0.5 : 1.0;
                if (dp % 2 == 0) {
                    const int i = wrap(k - dp / 2);
                    sum += w * rho[i] * rho[wrap(i + d)];
                } else {
                    const int i_lo = wrap((2 * k - 1 - dp) / 2);
                    const int i_hi = wrap((2 * k + 1 - dp) / 2);
                    sum += 0.5 * w * (rho[i_lo] * rho[wrap(i_lo + d)] + rho[i_hi] * rho[wrap(i_hi + d)]);
                }
            }
        }
        gain[k] = dtheta * sum;
    }
    return gain;
}

std::vector<double> pairwise_row_sums_serial(const ManifoldSpace &space, const std::vector<Point> &pts,
                                             const std::vector<double> &w) {
    const std::size_t n = pts.size();
    std::vector<double> rows(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = distance(space, pts[i], pts[j]);
            s += w[j] * d * d;
        }
        rows[i] = s;
    }
    return rows;
}

std::vector<double> pairwise_row_sums_omp(const ManifoldSpace &space, const std::vector<Point> &pts,
                                          const std::vector<double> &w) {
    const long n = static_cast<long>(pts.size());
    std::vector<double> rows(n, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < n; ++i) {
        double s = 0.0;
        for (long j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = distance(space, pts[i], pts[j]);
            s += w[j] * d * d;
        }
        rows[i] = s;
    }
    return rows;
}

} // namespace geoflock::par
