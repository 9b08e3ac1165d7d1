#pragma once

#include <cstdint>
#include <vector>

#include "geoflock/kernels.hpp"
#include "geoflock/measures.hpp"
#include "geoflock/trajectory.hpp"

namespace geoflock {

enum class UpdateMode { Single, Pair };

/// Initial data. Particle runs sample from it; grid runs project it on the nodes.
struct InitSpec {
    enum class Kind {
        Point,      ///< every particle at `center`
        Atoms,      ///< `atoms` with `weights` (particles split by largest remainder; grid: linear split)
        UniformBox, ///< flat spaces: uniform in [lo, hi]^n
        Cap,        ///< uniform in the geodesic ball of `radius` around `center`
        Uniform,    ///< compact spaces: Riemannian-uniform; grid: constant density
        Geodesic,   ///< uniform on the geodesic segment of half-length `radius` through `center` along e_1
        Bump,       ///< grid: 1 + amplitude * cos(theta - pi)
        BumpSquared ///< grid: (1 + cos(theta - pi))^2
    };
    Kind kind = Kind::Uniform;
    Point center;
    double radius = 0.0;
    double lo = 0.0, hi = 1.0;
    double amplitude = 0.25;
    std::vector<Point> atoms;
    std::vector<double> weights;
};

struct SimConfig {
    ManifoldSpace space = ManifoldSpace::circle();
    KernelSpec kernel;
    std::size_t n_particles = 100;
    int grid_size = 256;
    double t_end = 1.0;
    double record_interval = 0.1;
    double dt = 0.01;
    std::uint64_t seed = 0;
    int replicas = 1;
    UpdateMode mode = UpdateMode::Single;
    InitSpec init;
    bool keep_snapshots = false;
    /// Energy, best center and moment at every record time.
    bool diagnostics = true;
};

std::vector<Point> initial_particles(const SimConfig &cfg, Rng &rng);

/// Record times 0, dt_rec, 2 dt_rec, ... <= t_end (t_end itself included when it is a multiple).
std::vector<double> record_times(double t_end, double interval);

/// Gillespie run of one replica, stream make_stream(seed, replica).
TrajectoryRecord simulate_replica(const SimConfig &cfg, int replica);
/// All replicas, in parallel over replicas.
std::vector<TrajectoryRecord> simulate_particles(const SimConfig &cfg);

/// Fills energy / w2_best / center / moment of record slot from a measure.
void record_diagnostics(TrajectoryRecord &rec, const DiscreteMeasure &rho);

struct GridDensity {
    int M = 0;
    std::vector<double> values;
    double time = 0.0;

    double dtheta() const;
    double mass() const;
};

GridDensity initial_grid(const InitSpec &init, int M);
DiscreteMeasure grid_measure(const GridDensity &g);

struct GridRun {
    TrajectoryRecord record;
    GridDensity final_state;
    std::vector<double> theta1; ///< argument of the embedded first moment per record
    double max_mass_drift = 0.0; ///< largest mass change over a single step
};

/// RK4 on d rho/dt = G[rho] - rho. `serial_reference` scatters through the
/// deposition table instead of the OpenMP gather.
GridRun run_circle_grid(const SimConfig &cfg, bool serial_reference = false);
GridRun run_circle_grid(const SimConfig &cfg, GridDensity init, bool serial_reference = false);

enum class Confinement { Confined, Escaped, NotApplicable };

/// Uses the particle snapshots or grid densities of a circle trajectory.
Confinement semicircle_confinement_check(const TrajectoryRecord &rec);

} // namespace geoflock
