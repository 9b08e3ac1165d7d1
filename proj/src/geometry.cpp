#include "geoflock/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "geoflock/errors.hpp"

namespace geoflock {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unit-model angle between two unit vectors, accurate near 0 and pi.
double unit_sphere_angle(const Vec &a, const Vec &b) {
    return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

double unit_hyperbolic_distance(const Vec &a, const Vec &b) {
    const Vec d = a - b;
    const double chord2 = std::max(0.0, minkowski(d, d));
    return 2.0 * std::asinh(0.5 * std::sqrt(chord2));
}

Vec project_hyperboloid(Vec x) {
    x(0) = std::sqrt(1.0 + x.tail(x.size() - 1).squaredNorm());
    return x;
}

} // namespace

std::string to_string(Family f) {
    switch (f) {
    case Family::Euclidean: return "euclidean";
    case Family::Circle: return "circle";
    case Family::Sphere: return "sphere";
    case Family::Hyperbolic: return "hyperbolic";
    }
    return "?";
}

ManifoldSpace ManifoldSpace::euclidean(int dim) {
    if (dim < 1) throw UsageError("euclidean dimension must be positive");
    return {Family::Euclidean, dim, 0.0};
}

ManifoldSpace ManifoldSpace::circle() { return {Family::Circle, 1, 1.0}; }

ManifoldSpace ManifoldSpace::sphere(int dim, double curvature) {
    if (dim < 1) throw UsageError("sphere dimension must be positive");
    if (!(curvature > 0.0) || !std::isfinite(curvature))
        throw UsageError("sphere curvature must be positive");
    return {Family::Sphere, dim, curvature};
}

ManifoldSpace ManifoldSpace::hyperbolic(double curvature) {
    if (!(curvature < 0.0) || !std::isfinite(curvature))
        throw UsageError("hyperbolic curvature must be negative");
    return {Family::Hyperbolic, 2, curvature};
}

ManifoldSpace ManifoldSpace::parse(const std::string &spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.empty()) throw ConfigError("space", "empty space spec");

    auto to_int = [&](const std::string &s) {
        std::size_t pos = 0;
        int v = 0;
        try {
            v = std::stoi(s, &pos);
        } catch (const std::exception &) {
            throw ConfigError("space", "bad integer '" + s + "' in '" + spec + "'");
        }
        if (pos != s.size()) throw ConfigError("space", "bad integer '" + s + "' in '" + spec + "'");
        return v;
    };
    auto to_double = [&](const std::string &s) {
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception &) {
            throw ConfigError("space", "bad number '" + s + "' in '" + spec + "'");
        }
        if (pos != s.size()) throw ConfigError("space", "bad number '" + s + "' in '" + spec + "'");
        return v;
    };

    try {
        const std::string &name = parts[0];
        if (name == "circle" && parts.size() == 1) return circle();
        if (name == "euclidean" && parts.size() == 2) return euclidean(to_int(parts[1]));
        if (name == "sphere" && parts.size() == 2) return sphere(to_int(parts[1]));
        if (name == "sphere" && parts.size() == 3) return sphere(to_int(parts[1]), to_double(parts[2]));
        if (name == "hyperbolic" && parts.size() == 2) return hyperbolic(to_double(parts[1]));
    } catch (const UsageError &e) {
        throw ConfigError("space", e.what());
    }
    throw ConfigError("space", "unrecognised space spec '" + spec + "'");
}

std::string ManifoldSpace::spec() const {
    std::ostringstream os;
    os.precision(17);
    switch (family_) {
    case Family::Euclidean: os << "euclidean:" << dim_; break;
    case Family::Circle: os << "circle"; break;
    case Family::Sphere:
        os << "sphere:" << dim_;
        if (curvature_ != 1.0) os << ":" << curvature_;
        break;
    case Family::Hyperbolic: os << "hyperbolic:" << curvature_; break;
    }
    return os.str();
}

double ManifoldSpace::injectivity_radius() const {
    if (sphere_like()) return kPi / std::sqrt(curvature_);
    return std::numeric_limits<double>::infinity();
}

int ManifoldSpace::ambient_dim() const {
    switch (family_) {
    case Family::Euclidean: return dim_;
    case Family::Circle: return 1;
    case Family::Sphere: return dim_ + 1;
    case Family::Hyperbolic: return 3;
    }
    return dim_;
}

double ManifoldSpace::length_scale() const {
    if (family_ == Family::Euclidean) return 1.0;
    return 1.0 / std::sqrt(std::abs(curvature_));
}

Point make_point(const ManifoldSpace &space, Vec coords) {
    if (coords.size() != space.ambient_dim())
        throw UsageError("point has " + std::to_string(coords.size()) + " coordinates, " +
                         space.spec() + " expects " + std::to_string(space.ambient_dim()));
    if (!coords.allFinite()) throw UsageError("point has non-finite coordinates");
    switch (space.family()) {
    case Family::Euclidean: break;
    case Family::Circle: coords(0) = wrap_angle(coords(0)); break;
    case Family::Sphere: {
        const double n = coords.norm();
        if (std::abs(n - 1.0) > 1e-6) throw UsageError("sphere point is not a unit vector");
        if (std::abs(n - 1.0) > 1e-13) coords /= n;
        break;
    }
    case Family::Hyperbolic: {
        if (coords(0) <= 0.0 || std::abs(minkowski(coords, coords) + 1.0) > 1e-6)
            throw UsageError("hyperbolic point is off the upper hyperboloid sheet");
        if (std::abs(minkowski(coords, coords) + 1.0) > 1e-13) coords = project_hyperboloid(std::move(coords));
        break;
    }
    }
    return Point(space.family(), std::move(coords));
}

Point circle_point(double theta) {
    Vec c(1);
    c(0) = wrap_angle(theta);
    return Point(Family::Circle, c);
}

Point sphere_point(std::initializer_list<double> xs) {
    Vec c(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) c(i++) = x;
    return Point(Family::Sphere, c / c.norm());
}

Point euclidean_point(std::initializer_list<double> xs) {
    Vec c(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) c(i++) = x;
    return Point(Family::Euclidean, c);
}

Point hyperbolic_polar(double r, double phi) {
    Vec c(3);
    c << std::cosh(r), std::sinh(r) * std::cos(phi), std::sinh(r) * std::sin(phi);
    return Point(Family::Hyperbolic, c);
}

void check_point(const ManifoldSpace &space, const Point &p) {
    if (p.family != space.family() || p.coords.size() != space.ambient_dim())
        throw UsageError("point of family " + to_string(p.family) + " (" +
                         std::to_string(p.coords.size()) + " coords) used on " + space.spec());
}

bool on_space(const ManifoldSpace &space, const Point &p, double tol) {
    if (p.family != space.family() || p.coords.size() != space.ambient_dim()) return false;
    switch (space.family()) {
    case Family::Euclidean: return p.coords.allFinite();
    case Family::Circle: return p.coords(0) >= 0.0 && p.coords(0) < kTwoPi;
    case Family::Sphere: return std::abs(p.coords.norm() - 1.0) <= tol;
    case Family::Hyperbolic:
        return p.coords(0) > 0.0 && std::abs(minkowski(p.coords, p.coords) + 1.0) <= tol;
    }
    return false;
}

double wrap_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;
    return t;
}

double signed_angle(double delta) {
    double t = std::fmod(delta, kTwoPi);
    if (t > kPi) t -= kTwoPi;
    if (t <= -kPi) t += kTwoPi;
    return t;
}

double minkowski(const Vec &a, const Vec &b) {
    return -a(0) * b(0) + a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
}

double distance(const ManifoldSpace &space, const Point &a, const Point &b) {
    check_point(space, a);
    check_point(space, b);
    switch (space.family()) {
    case Family::Euclidean: return (a.coords - b.coords).norm();
    case Family::Circle: {
        const double d = std::abs(a.coords(0) - b.coords(0));
        return std::min(d, kTwoPi - d);
    }
    case Family::Sphere: return unit_sphere_angle(a.coords, b.coords) * space.length_scale();
    case Family::Hyperbolic: return unit_hyperbolic_distance(a.coords, b.coords) * space.length_scale();
    }
    return 0.0;
}

MidpointSet midpoints(const ManifoldSpace &space, const Point &a, const Point &b) {
    check_point(space, a);
    check_point(space, b);
    MidpointSet out;
    switch (space.family()) {
    case Family::Euclidean:
        out.point = Point(Family::Euclidean, 0.5 * (a.coords + b.coords));
        return out;
    case Family::Circle: {
        // Three-branch rule on angles in [0, 2pi).
        const double ta = a.coords(0), tb = b.coords(0);
        const double gap = std::abs(ta - tb);
        const double half = 0.5 * (ta + tb);
        if (std::abs(gap - kPi) < kAntipodalTol) {
            out.kind = MidpointSet::Kind::Equator;
            out.poles = {a, b};
            out.point = circle_point(half);
            return out;
        }
        double theta = half;
        if (gap > kPi) theta = half < kPi ? half + kPi : half - kPi;
        out.point = circle_point(theta);
        return out;
    }
    case Family::Sphere: {
        const Vec s = a.coords + b.coords;
        const double n = s.norm();
        if (n < kAntipodalTol) {
            out.kind = MidpointSet::Kind::Equator;
            out.poles = {a, b};
            return out;
        }
        out.point = Point(Family::Sphere, s / n);
        return out;
    }
    case Family::Hyperbolic: {
        const Vec s = a.coords + b.coords;
        out.point = Point(Family::Hyperbolic, project_hyperboloid(s / std::sqrt(-minkowski(s, s))));
        return out;
    }
    }
    return out;
}

std::array<Point, 2> circle_equator_points(const MidpointSet &set) {
    if (set.unique() || set.poles[0].family != Family::Circle)
        throw UsageError("circle_equator_points needs an antipodal circle midpoint set");
    const double theta = 0.5 * (set.poles[0].coords(0) + set.poles[1].coords(0));
    const double other = theta < kPi ? theta + kPi : theta - kPi;
    return {circle_point(theta), circle_point(other)};
}

double distance_to_set(const ManifoldSpace &space, const Point &x, const MidpointSet &set) {
    if (set.unique()) return distance(space, x, set.point);
    check_point(space, x);
    if (space.family() == Family::Circle) {
        const auto pts = circle_equator_points(set);
        return std::min(distance(space, x, pts[0]), distance(space, x, pts[1]));
    }
    const double s = std::clamp(x.coords.dot(set.poles[0].coords), -1.0, 1.0);
    return std::abs(std::asin(s)) * space.length_scale();
}

double tangent_norm(const ManifoldSpace &space, const Vec &v) {
    if (space.family() == Family::Hyperbolic) return std::sqrt(std::max(0.0, minkowski(v, v)));
    return v.norm();
}

Point exp_map(const ManifoldSpace &space, const Point &base, const Vec &tangent) {
    check_point(space, base);
    if (tangent.size() != space.ambient_dim()) throw UsageError("tangent vector has wrong size");
    switch (space.family()) {
    case Family::Euclidean: return Point(Family::Euclidean, base.coords + tangent);
    case Family::Circle: return circle_point(base.coords(0) + tangent(0));
    case Family::Sphere: {
        const Vec &x = base.coords;
        const Vec v = tangent - tangent.dot(x) * x;
        const double len = v.norm();
        if (len == 0.0) return base;
        const double t = len / space.length_scale();
        Vec y = std::cos(t) * x + (std::sin(t) / len) * v;
        return Point(Family::Sphere, y / y.norm());
    }
    case Family::Hyperbolic: {
        const Vec &x = base.coords;
        const Vec v = tangent + minkowski(tangent, x) * x;
        const double len = tangent_norm(space, v);
        if (len == 0.0) return base;
        const double t = len / space.length_scale();
        return Point(Family::Hyperbolic, project_hyperboloid(std::cosh(t) * x + (std::sinh(t) / len) * v));
    }
    }
    return base;
}

Vec log_map(const ManifoldSpace &space, const Point &base, const Point &target) {
    check_point(space, base);
    check_point(space, target);
    switch (space.family()) {
    case Family::Euclidean: return target.coords - base.coords;
    case Family::Circle: {
        const double d = signed_angle(target.coords(0) - base.coords(0));
        if (std::abs(d) >= kPi - kAntipodalTol) throw DomainError("log_map: target on the cut locus");
        Vec v(1);
        v(0) = d;
        return v;
    }
    case Family::Sphere: {
        const Vec &x = base.coords;
        const Vec &y = target.coords;
        if ((x + y).norm() < kAntipodalTol) throw DomainError("log_map: target on the cut locus");
        const Vec u = y - y.dot(x) * x;
        const double n = u.norm();
        if (n == 0.0) return Vec::Zero(x.size());
        return u * (unit_sphere_angle(x, y) * space.length_scale() / n);
    }
    case Family::Hyperbolic: {
        const Vec &x = base.coords;
        const Vec &y = target.coords;
        const Vec u = y + minkowski(x, y) * x;
        const double n = tangent_norm(space, u);
        if (n == 0.0) return Vec::Zero(3);
        return u * (unit_hyperbolic_distance(x, y) * space.length_scale() / n);
    }
    }
    return Vec();
}

std::vector<Vec> tangent_basis(const ManifoldSpace &space, const Point &p) {
    check_point(space, p);
    const int n = space.dim();
    const int amb = space.ambient_dim();
    std::vector<Vec> basis;
    switch (space.family()) {
    case Family::Euclidean:
    case Family::Circle:
        for (int i = 0; i < n; ++i) basis.push_back(Vec::Unit(amb, i));
        return basis;
    case Family::Sphere: {
        // Drop the axis most aligned with p, project the others and orthonormalise.
        std::vector<int> axes(amb);
        for (int i = 0; i < amb; ++i) axes[i] = i;
        std::sort(axes.begin(), axes.end(),
                  [&](int i, int j) { return std::abs(p.coords(i)) < std::abs(p.coords(j)); });
        for (int k = 0; k < n; ++k) {
            Vec v = Vec::Unit(amb, axes[k]);
            v -= v.dot(p.coords) * p.coords;
            for (const Vec &b : basis) v -= v.dot(b) * b;
            basis.push_back(v / v.norm());
        }
        return basis;
    }
    case Family::Hyperbolic: {
        for (int k = 1; k <= 2; ++k) {
            Vec v = Vec::Unit(3, k);
            v += minkowski(v, p.coords) * p.coords;
            for (const Vec &b : basis) v -= minkowski(v, b) * b;
            basis.push_back(v / std::sqrt(minkowski(v, v)));
        }
        return basis;
    }
    }
    return basis;
}

Point point_symmetry(const ManifoldSpace &space, const Point &center, const Point &x) {
    return exp_map(space, center, -log_map(space, center, x));
}

double apollonius_residual(const ManifoldSpace &space, double a, double b, double b2, double m) {
    switch (space.family()) {
    case Family::Euclidean: return m * m + a * a - 0.5 * (b * b + b2 * b2);
    case Family::Circle:
    case Family::Sphere: {
        const double s = 1.0 / space.length_scale();
        return 0.5 * (std::cos(s * b) + std::cos(s * b2)) - std::cos(s * a) * std::cos(s * m);
    }
    case Family::Hyperbolic: {
        const double s = 1.0 / space.length_scale();
        return 0.5 * (std::cosh(s * b) + std::cosh(s * b2)) - std::cosh(s * a) * std::cosh(s * m);
    }
    }
    return 0.0;
}

Point origin(const ManifoldSpace &space) {
    Vec c = Vec::Zero(space.ambient_dim());
    if (space.family() == Family::Sphere || space.family() == Family::Hyperbolic) c(0) = 1.0;
    return Point(space.family(), c);
}

Point sample_uniform(const ManifoldSpace &space, Rng &rng) {
    switch (space.family()) {
    case Family::Circle: return circle_point(kTwoPi * uniform01(rng));
    case Family::Sphere: {
        Vec g(space.ambient_dim());
        double n = 0.0;
        do {
            for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = normal01(rng);
            n = g.norm();
        } while (n < 1e-12);
        return Point(Family::Sphere, g / n);
    }
    default: throw DomainError("sample_uniform: no uniform law on " + space.spec());
    }
}

Vec sample_direction(const ManifoldSpace &space, const Point &p, Rng &rng) {
    if (space.family() == Family::Circle) {
        Vec v(1);
        v(0) = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        return v;
    }
    const auto basis = tangent_basis(space, p);
    Vec coef(static_cast<Eigen::Index>(basis.size()));
    double n = 0.0;
    do {
        for (Eigen::Index i = 0; i < coef.size(); ++i) coef(i) = normal01(rng);
        n = coef.norm();
    } while (n < 1e-12);
    Vec v = Vec::Zero(space.ambient_dim());
    for (std::size_t i = 0; i < basis.size(); ++i) v += (coef(static_cast<Eigen::Index>(i)) / n) * basis[i];
    return v;
}

Point sample_ball(const ManifoldSpace &space, const Point &center, double radius, Rng &rng) {
    check_point(space, center);
    if (!(radius >= 0.0)) throw DomainError("sample_ball: negative radius");
    if (radius >= space.injectivity_radius()) throw DomainError("sample_ball: radius reaches the injectivity radius");
    if (radius == 0.0) return center;

    if (space.family() == Family::Circle)
        return circle_point(center.coords(0) + radius * (2.0 * uniform01(rng) - 1.0));

    const int n = space.dim();
    const double scale = space.length_scale();
    const double big_r = radius / scale; // unit-model radius
    double s = 0.0;                      // unit-model radial distance
    const double u = uniform01(rng);
    switch (space.family()) {
    case Family::Euclidean: s = big_r * std::pow(u, 1.0 / n); break;
    case Family::Sphere:
        if (n == 2) {
            s = std::acos(1.0 - u * (1.0 - std::cos(big_r)));
        } else {
            // Radial density sin(s)^{n-1}: rejection from the flat proposal s^{n-1}.
            for (;;) {
                s = big_r * std::pow(uniform01(rng), 1.0 / n);
                const double ratio = s > 0.0 ? std::sin(s) / s : 1.0;
                if (uniform01(rng) <= std::pow(ratio, n - 1)) break;
            }
        }
        break;
    case Family::Hyperbolic: s = std::acosh(1.0 + u * (std::cosh(big_r) - 1.0)); break;
    default: break;
    }
    const Vec dir = sample_direction(space, center, rng);
    return exp_map(space, center, (s * scale) * dir);
}

Point sample_equator(const ManifoldSpace &space, const MidpointSet &set, Rng &rng) {
    if (set.unique()) throw UsageError("sample_equator needs an antipodal midpoint set");
    if (space.family() == Family::Circle) {
        const auto pts = circle_equator_points(set);
        return uniform01(rng) < 0.5 ? pts[0] : pts[1];
    }
    const Vec &pole = set.poles[0].coords;
    Vec g(pole.size());
    double n = 0.0;
    do {
        for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = normal01(rng);
        g -= g.dot(pole) * pole;
        n = g.norm();
    } while (n < 1e-12);
    return Point(Family::Sphere, g / n);
}

} // namespace geoflock
