#pragma once

#include <Eigen/Dense>

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "geoflock/rng.hpp"

namespace geoflock {

using Vec = Eigen::VectorXd;

enum class Family { Euclidean, Circle, Sphere, Hyperbolic };

std::string to_string(Family f);

/**
 * Constant-curvature position space.
 *
 * Sphere and hyperbolic spaces of curvature K are the unit models with every
 * length multiplied by 1/sqrt(|K|). Coordinates are always those of the unit
 * model: a unit vector in R^{n+1} on the sphere, a point of the upper sheet
 * x0^2 - x1^2 - x2^2 = 1 on the hyperbolic plane, an angle in [0, 2pi) on the
 * circle.
 */
class ManifoldSpace {
public:
    static ManifoldSpace euclidean(int dim);
    static ManifoldSpace circle();
    static ManifoldSpace sphere(int dim, double curvature = 1.0);
    static ManifoldSpace hyperbolic(double curvature = -1.0);

    /// "euclidean:<dim>", "circle", "sphere:<dim>", "hyperbolic:<curvature>".
    static ManifoldSpace parse(const std::string &spec);
    std::string spec() const;

    Family family() const { return family_; }
    int dim() const { return dim_; }
    double curvature() const { return curvature_; }
    double injectivity_radius() const;
    /// Number of stored coordinates per point.
    int ambient_dim() const;
    /// Length conversion from the unit model: 1/sqrt(|K|), or 1 when flat.
    double length_scale() const;
    bool sphere_like() const { return family_ == Family::Circle || family_ == Family::Sphere; }

    bool operator==(const ManifoldSpace &) const = default;

private:
    ManifoldSpace(Family f, int dim, double k) : family_(f), dim_(dim), curvature_(k) {}
    Family family_;
    int dim_;
    double curvature_;
};

/// Coordinates tagged with the family they belong to.
struct Point {
    Family family = Family::Euclidean;
    Vec coords;

    Point() = default;
    Point(Family f, Vec c) : family(f), coords(std::move(c)) {}
};

Point make_point(const ManifoldSpace &space, Vec coords);
Point circle_point(double theta);
Point sphere_point(std::initializer_list<double> xs);
Point euclidean_point(std::initializer_list<double> xs);
/// Hyperboloid point at geodesic polar coordinates (r, phi) around (1,0,0), unit model.
Point hyperbolic_polar(double r, double phi);

/// Throws UsageError unless `p` carries coordinates of `space`.
void check_point(const ManifoldSpace &space, const Point &p);
/// True when the point satisfies the space's coordinate constraint within `tol`.
bool on_space(const ManifoldSpace &space, const Point &p, double tol = 1e-12);

double wrap_angle(double theta);          ///< into [0, 2pi)
double signed_angle(double delta);        ///< into (-pi, pi]
double minkowski(const Vec &a, const Vec &b);

double distance(const ManifoldSpace &space, const Point &a, const Point &b);

/// Midpoints of minimal geodesics. `Equator` is the great subsphere orthogonal
/// to the antipodal pair `poles`; on the circle this is the two-point set
/// {theta_m, theta_m + pi}.
struct MidpointSet {
    enum class Kind { Unique, Equator };
    Kind kind = Kind::Unique;
    Point point;
    std::array<Point, 2> poles;

    bool unique() const { return kind == Kind::Unique; }
};

constexpr double kAntipodalTol = 1e-9;

MidpointSet midpoints(const ManifoldSpace &space, const Point &a, const Point &b);
/// Circle only: the two elements of an antipodal midpoint set, in the order of
/// the two-point rule (theta, theta'), theta = (theta_a + theta_b)/2.
std::array<Point, 2> circle_equator_points(const MidpointSet &set);
/// Geodesic distance from x to the midpoint set.
double distance_to_set(const ManifoldSpace &space, const Point &x, const MidpointSet &set);

/// Tangent vectors are stored in ambient coordinates (a scalar on the circle)
/// and scaled so that their plain norm is the geodesic length: Euclidean norm
/// on spheres, Minkowski norm on the hyperboloid.
double tangent_norm(const ManifoldSpace &space, const Vec &v);
Point exp_map(const ManifoldSpace &space, const Point &base, const Vec &tangent);
Vec log_map(const ManifoldSpace &space, const Point &base, const Point &target);
/// Orthonormal basis (dim vectors) of the tangent space at p.
std::vector<Vec> tangent_basis(const ManifoldSpace &space, const Point &p);

/// exp_c(-log_c(x)).
Point point_symmetry(const ManifoldSpace &space, const Point &center, const Point &x);

/// Residual of the Apollonius identity for half-side a, sides b, b', median m.
/// Zero for any geodesic triangle with its median measured on the space.
double apollonius_residual(const ManifoldSpace &space, double a, double b, double b2, double m);

/// Riemannian-uniform sample. Only defined on compact families.
Point sample_uniform(const ManifoldSpace &space, Rng &rng);
/// Riemannian-uniform sample in the closed geodesic ball; radius < injectivity radius.
Point sample_ball(const ManifoldSpace &space, const Point &center, double radius, Rng &rng);
/// Uniform unit tangent direction at p.
Vec sample_direction(const ManifoldSpace &space, const Point &p, Rng &rng);
/// Uniform point on the equator set of an antipodal pair.
Point sample_equator(const ManifoldSpace &space, const MidpointSet &set, Rng &rng);

/// Base point used for noncompact reference balls: origin of R^n, (1,0,0) on H^2.
Point origin(const ManifoldSpace &space);

} // namespace geoflock
