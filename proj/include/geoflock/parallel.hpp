#pragma once

#include <vector>

#include "geoflock/geometry.hpp"

namespace geoflock {

/// Where the midpoint mass of every grid pair (i, j) lands. Row i*M + j of the
/// CSR arrays lists (node, fraction) entries.
struct DepositionTable {
    int M = 0;
    std::vector<int> row_ptr;
    std::vector<int> node;
    std::vector<double> fraction;
};

namespace par {

/// Worker count: GEOFLOCK_THREADS if set and positive, else the OpenMP default.
int worker_count();
/// Apply worker_count() to the OpenMP runtime.
void configure_threads();

/// Gain term G_k = dtheta * sum_ij rho_i rho_j f_ij(k) by scattering through the table.
std::vector<double> gain_scatter_serial(const DepositionTable &table, const std::vector<double> &rho);
/// Same quantity gathered per target node from half-index offset arithmetic;
/// OpenMP over nodes, fixed summation order per node.
std::vector<double> gain_gather_omp(const std::vector<double> &rho);

/// row_i = sum_j w_j d(x_i, x_j)^2.
std::vector<double> pairwise_row_sums_serial(const ManifoldSpace &space, const std::vector<Point> &pts,
                                             const std::vector<double> &w);
std::vector<double> pairwise_row_sums_omp(const ManifoldSpace &space, const std::vector<Point> &pts,
                                          const std::vector<double> &w);

} // namespace par
} // namespace geoflock
