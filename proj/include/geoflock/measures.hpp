#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "geoflock/geometry.hpp"

namespace geoflock {

/// Weighted atomic probability measure on one space.
class DiscreteMeasure {
public:
    /// Weights must sum to 1 within 1e-9; deviations above rounding level are renormalised away.
    DiscreteMeasure(ManifoldSpace space, std::vector<Point> points, std::vector<double> weights);

    static DiscreteMeasure uniform(ManifoldSpace space, std::vector<Point> points);
    static DiscreteMeasure dirac(ManifoldSpace space, Point p);

    const ManifoldSpace &space() const { return space_; }
    std::size_t size() const { return points_.size(); }
    const std::vector<Point> &points() const { return points_; }
    const std::vector<double> &weights() const { return weights_; }
    const Point &point(std::size_t i) const { return points_[i]; }
    double weight(std::size_t i) const { return weights_[i]; }
    bool equal_weights() const;

private:
    ManifoldSpace space_;
    std::vector<Point> points_;
    std::vector<double> weights_;
};

struct TransportPlan {
    struct Entry {
        int source;
        int target;
        double mass;
    };
    std::vector<Entry> pairs;
    double cost = 0.0; ///< sum of mass * d^2
};

struct W2Result {
    double value = 0.0;
    TransportPlan plan;
};

constexpr std::size_t kDefaultAtomCap = 2000;

/// sum_ij w_i w_j d(x_i, x_j)^2. Flat spaces use the exact identity 2 sum w |x - mean|^2.
double energy(const DiscreteMeasure &rho);
/// The plain O(N^2) double sum, for any space.
double energy_pairwise(const DiscreteMeasure &rho);

double w2_to_dirac(const DiscreteMeasure &rho, const Point &y);

/// Exact W2. Equal-weight measures of the same size go through optimal assignment.
W2Result w2_exact(const DiscreteMeasure &rho, const DiscreteMeasure &sigma, std::size_t cap = kDefaultAtomCap);
/// Same problem, always through the transportation simplex.
W2Result w2_exact_simplex(const DiscreteMeasure &rho, const DiscreteMeasure &sigma,
                          std::size_t cap = kDefaultAtomCap);

struct DiracCenter {
    Point center;
    double value = 0.0; ///< W2(rho, delta_center)
    bool converged = true;
    int iterations = 0;
};

/// Minimiser of y -> W2(rho, delta_y). `converged` is false when the fixed-point
/// iteration hit its cap; the best candidate seen is still returned.
DiracCenter best_dirac_center(const DiscreteMeasure &rho);

struct TailBounds {
    double mass_tail = 0.0;     ///< rho{d(x, xbar) >= kappa}
    double distance_tail = 0.0; ///< int_{d >= kappa} d(x, xbar) drho
    double energy = 0.0;
    bool bounds_ok = true;
};

TailBounds tail_bounds_check(const DiscreteMeasure &rho, const Point &xbar, double kappa);

struct Moments {
    double m2 = 0.0;       ///< second moment about the best Dirac center (about the mean on flat spaces)
    double tilde_m2 = 0.0; ///< equals E(rho)
    std::optional<Vec> center_of_mass; ///< flat spaces only
};

Moments moments(const DiscreteMeasure &rho);

/// sum w_i x_i in the ambient space of a circle or sphere.
Vec embedded_first_moment(const DiscreteMeasure &rho);

} // namespace geoflock
