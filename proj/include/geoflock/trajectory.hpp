#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geoflock/geometry.hpp"

namespace geoflock {

/// Diagnostics sampled at fixed times. `moments` holds the embedded first
/// moment on circles and spheres, the center of mass on flat spaces and the
/// ambient weighted sum on the hyperboloid.
struct TrajectoryRecord {
    std::string space_spec;
    std::string kernel_spec;
    std::uint64_t seed = 0;
    int replica = 0;

    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> w2_best;
    std::vector<Point> centers;
    std::vector<Vec> moments;
    std::vector<char> center_converged;

    /// Particle positions per record time (particle runs with snapshots on).
    std::vector<std::vector<Point>> particles;
    /// Density values per record time (grid runs).
    std::vector<std::vector<double>> densities;

    std::size_t size() const { return times.size(); }
};

} // namespace geoflock
