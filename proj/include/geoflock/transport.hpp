#pragma once

#include <Eigen/Dense>

#include <vector>

namespace geoflock {

struct Flow {
    int source;
    int target;
    double mass;
};

struct TransportSolution {
    std::vector<Flow> flows;
    double cost = 0.0;
    int pivots = 0;
};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method with
/// potentials, O(n^3)). Returns the column assigned to every row.
std::vector<int> solve_assignment(const Eigen::MatrixXd &cost);

/// Exact transportation problem: min <C, X> s.t. X 1 = supply, X^T 1 = demand, X >= 0.
/// Northwest-corner start, u-v pricing, Dantzig entering rule falling back to
/// Bland's rule after a run of degenerate pivots. Supply and demand must have
/// (nearly) equal totals.
TransportSolution solve_transportation(const Eigen::VectorXd &supply, const Eigen::VectorXd &demand,
                                       const Eigen::MatrixXd &cost);

} // namespace geoflock
