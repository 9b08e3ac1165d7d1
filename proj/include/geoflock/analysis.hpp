#pragma once

#include <cstddef>
#include <vector>

#include "geoflock/dynamics.hpp"
#include "geoflock/kernels.hpp"
#include "geoflock/measures.hpp"

namespace geoflock {

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double t_min = 0.0, t_max = 0.0;
    double residual_rms = 0.0;
    double r2 = 1.0;
    std::size_t n_points = 0;
};

/// Least squares of log(v) against t over t in [t_min, t_max].
RateFit fit_decay_rate(const std::vector<double> &t, const std::vector<double> &v, double t_min, double t_max);
/// Default window: second half of the time range, final 5% excluded.
RateFit fit_decay_rate(const std::vector<double> &t, const std::vector<double> &v);
/// Keeps only the points before the first value below `floor`.
std::pair<std::vector<double>, std::vector<double>> truncate_at_floor(const std::vector<double> &t,
                                                                      const std::vector<double> &v, double floor);

struct DiracLimitReport {
    Point x_inf;
    std::vector<double> times;
    std::vector<double> dist_to_limit;
    /// sup_{t >= s} d(xbar(t), xbar(s)) for each recorded s
    std::vector<double> cauchy_sup;
    double C = 0.0;
    double E0 = 0.0;
    std::size_t violations = 0;
    bool rate_ok = true;
};

/// Checks d(xbar(t), x_inf)^2 <= C E0 e^{-t/2} for t >= t_min, C fitted at t_min,
/// with relative tolerance `tol`.
DiracLimitReport track_dirac_limit(const ManifoldSpace &space, const TrajectoryRecord &rec, double t_min = 0.0,
                                   double tol = 0.1);

struct ContractionStep {
    double t = 0.0;
    double energy = 0.0;
    double half_dE = 0.0; ///< central-difference estimate of dE/dt / 2
    double bound = 0.0;   ///< -E/4 + C0 E^{4/3}
    double margin = 0.0;  ///< half_dE - bound
    double c0_needed = 0.0;
    bool ok = true;
    bool flagged = false; ///< fails even with the large probe constant
};

struct EnergyContractionReport {
    double c0 = 50.0;
    std::vector<ContractionStep> steps;
    std::size_t failures = 0;
    std::size_t flagged = 0;
};

EnergyContractionReport energy_contraction_check(const std::vector<double> &t, const std::vector<double> &energy,
                                                 double c0 = 50.0, double c0_large = 1e6);

struct LocalConstantRow {
    double kappa = 0.0;
    double max_r = 0.0;
    double min_r = 0.0;
    std::size_t samples = 0;
};

/// r = (m^2 + a^2 - (b^2 + b'^2)/2) / (kappa^2 a^2) over triangles with sides <= kappa.
std::vector<LocalConstantRow> local_constant_probe(const ManifoldSpace &space, const std::vector<double> &kappas,
                                                   std::size_t n_samples, Rng &rng);

struct Example2Result {
    Vec moment;     ///< first moment of (delta_0 + delta_{pi-2eps} + delta_{pi+eps}) / 3
    Vec derivative; ///< its time derivative under the midpoint dynamics at t = 0
    double cross = 0.0;
};

Example2Result example2_moment_derivative(double eps);

struct BetaTildeReport {
    double s = 0.0;
    ContractionReport contraction;
    double expected = 0.0; ///< s^2
    bool equal_ok = false; ///< beta_hat and beta_tilde_hat both match s^2 within CI
    bool bound_ok = false; ///< beta <= beta_tilde + 2 sqrt(beta_tilde) on every pair
};

/// Perpendicular-offset test kernel on R^2.
BetaTildeReport betatilde_relation_check(double s, std::size_t n_pairs, Rng &rng);

struct ScanResult {
    std::size_t samples = 0;
    std::size_t violations = 0;
    double worst = 0.0; ///< largest lhs - rhs (or |residual|) seen
};

/// Apollonius residual of measured random triangles.
ScanResult apollonius_scan(const ManifoldSpace &space, std::size_t n, Rng &rng);
/// Midpoint kernel on S^2: alpha <= -d^2/4 + 2 d min(b, b') + 1e-10.
ScanResult midpoint_bound_scan(std::size_t n, Rng &rng);
/// alpha <= -(1 - beta)/4 d^2 + (1 + sqrt(1 + beta)) d min(b, b') within 3 confidence radii.
ScanResult global_beta_scan(const KernelSpec &kernel, double beta, std::size_t n, std::size_t n_mc, Rng &rng);

struct SandwichResult {
    std::size_t measures = 0;
    std::size_t lower_violations = 0;   ///< W2(rho, delta_xbar)^2 > E
    std::size_t upper_violations = 0;   ///< E > 4 W2(rho, delta_y)^2
    std::size_t tail_violations = 0;
    std::size_t optimality_violations = 0; ///< W2(rho, delta_xbar) > W2(rho, delta_y) + 1e-8
    std::size_t probes = 0;
};

/// Random measures (<= 50 atoms) with probe points.
SandwichResult sandwich_scan(const ManifoldSpace &space, std::size_t n_measures, std::size_t n_probes, Rng &rng);

DiscreteMeasure random_measure(const ManifoldSpace &space, std::size_t max_atoms, Rng &rng);
Point random_probe(const ManifoldSpace &space, Rng &rng);

/// W2(rho_t, delta_{x_inf}) per record from particle snapshots, x_inf the final best center.
std::vector<double> w2_to_limit_series(const ManifoldSpace &space, const TrajectoryRecord &rec);

struct Example1Result {
    double t = 0.0;
    double w2 = 0.0;
    GridRun lower, upper; ///< runs from {0, pi - offset} and {0, pi + offset}
};

/// Grid runs from two-atom data {0, pi -+ offset}; W2 between the two densities at t_end.
Example1Result example1_grid_separation(int M, double dt, double t_end, double offset = 0.05);

} // namespace geoflock
