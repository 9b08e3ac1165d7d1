#pragma once

#include <cstddef>
#include <string>

#include "geoflock/geometry.hpp"
#include "geoflock/parallel.hpp"

namespace geoflock {

enum class KernelFamily {
    Midpoint,
    NoisyEps,   ///< noised endpoint uniform in a ball of radius eps
    NoisyGamma, ///< noised endpoint uniform in a ball of radius gamma * d(x*, x*')
    BDG,        ///< uniform in a ball of radius gamma * d(x_m, x*) around the midpoint
    // Test kernels, not reachable from config strings.
    PerpendicularOffset, ///< R^2: midpoint +- (s d / 2) along the normal of the pair
    ShiftedMidpoint,     ///< exp_{x_m}(h e_1), a fixed tangent offset
};

struct KernelSpec {
    KernelFamily family = KernelFamily::Midpoint;
    double param = 0.0;
    ManifoldSpace space = ManifoldSpace::circle();

    /// "midpoint", "noisy-eps:<eps>", "noisy-gamma:<gamma>", "bdg:<gamma>".
    static KernelSpec parse(const std::string &spec, const ManifoldSpace &space);
    static KernelSpec midpoint(const ManifoldSpace &space) { return {KernelFamily::Midpoint, 0.0, space}; }
    std::string spec() const;
    /// Post-collision law is a Dirac off the antipodal set.
    bool deterministic() const;
};

Point sample_post_collision(const KernelSpec &kernel, const Point &xs, const Point &xs2, Rng &rng);

struct Estimate {
    double value = 0.0;
    double ci = 0.0; ///< 99% normal confidence radius, 0 when exact
};

constexpr double kZ99 = 2.5758293035489004;

/// E[d(X, y)^2] - (d(x*, y)^2 + d(x*', y)^2) / 2.
Estimate alpha(const KernelSpec &kernel, const Point &xs, const Point &xs2, const Point &y, std::size_t n_mc,
               Rng &rng);

struct ContractionOptions {
    std::size_t n_mc = 256;
    int p = 4;
    /// Pairs on noncompact spaces are drawn from this ball around origin().
    double reference_radius = 1.0;
};

struct ContractionReport {
    double beta_hat = 0.0, beta_ci = 0.0;
    double beta_tilde_hat = 0.0, beta_tilde_ci = 0.0;
    double p_constant_hat = 0.0, p_constant_ci = 0.0;
    int p = 4;
    std::size_t n_pairs = 0;
    std::size_t n_mc = 0;
    /// Largest per-pair gap beta_i - (beta_tilde_i + 2 sqrt(beta_tilde_i)), minus its CI.
    double bound_gap = 0.0;
};

/// Stratified pairs: 80% unrestricted, 10% separation < 0.1, 10% within 0.1 of the diameter.
ContractionReport estimate_contraction(const KernelSpec &kernel, std::size_t n_pairs, Rng &rng,
                                       const ContractionOptions &opt = {});

/// Two-sample chi-square test of the post-collision cloud against its point
/// reflection through x_m. Returns the p-value (1 for a degenerate cloud at x_m).
double check_midpoint_symmetry(const KernelSpec &kernel, const Point &xs, const Point &xs2, std::size_t n_mc,
                               int n_bins, Rng &rng, double kappa0 = -1.0);

/// Two-sample chi-square test of K(., x*, x*') against K(., x*', x*).
double check_exchange_symmetry(const KernelSpec &kernel, const Point &xs, const Point &xs2, std::size_t n_mc,
                               int n_bins, Rng &rng);

/// Midpoint kernel on the circle, M even >= 4.
DepositionTable grid_pushforward(const KernelSpec &kernel, int M);

} // namespace geoflock
