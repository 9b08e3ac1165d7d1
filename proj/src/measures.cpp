#include "geoflock/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "geoflock/errors.hpp"
#include "geoflock/parallel.hpp"
#include "geoflock/transport.hpp"

namespace geoflock {

DiscreteMeasure::DiscreteMeasure(ManifoldSpace space, std::vector<Point> points, std::vector<double> weights)
    : space_(space), points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.empty()) throw UsageError("measure needs at least one atom");
    if (points_.size() != weights_.size()) throw UsageError("atom and weight counts differ");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw UsageError("weights must be finite and nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw UsageError("weights sum to " + std::to_string(total) + ", not 1");
    // renormalise only beyond rounding level
    const double rounding = 4.0 * static_cast<double>(weights_.size()) * std::numeric_limits<double>::epsilon();
    if (std::abs(total - 1.0) > rounding)
        for (double &w : weights_) w /= total;
    for (const Point &p : points_) check_point(space_, p);
}

DiscreteMeasure DiscreteMeasure::uniform(ManifoldSpace space, std::vector<Point> points) {
    const std::size_t n = points.size();
    if (n == 0) throw UsageError("measure needs at least one atom");
    return DiscreteMeasure(space, std::move(points), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

DiscreteMeasure DiscreteMeasure::dirac(ManifoldSpace space, Point p) {
    return DiscreteMeasure(space, {std::move(p)}, {1.0});
}

bool DiscreteMeasure::equal_weights() const {
    return std::all_of(weights_.begin(), weights_.end(), [&](double w) { return w == weights_[0]; });
}

namespace {

Vec flat_mean(const DiscreteMeasure &rho) {
    Vec c = Vec::Zero(rho.space().ambient_dim());
    for (std::size_t i = 0; i < rho.size(); ++i) c += rho.weight(i) * rho.point(i).coords;
    return c;
}

double objective(const DiscreteMeasure &rho, const Point &y) {
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double d = distance(rho.space(), rho.point(i), y);
        s += rho.weight(i) * d * d;
    }
    return s;
}

DiracCenter circle_center(const DiscreteMeasure &rho) {
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> cuts;
    cuts.reserve(rho.size());
    for (const Point &p : rho.points()) cuts.push_back(wrap_angle(p.coords(0) + std::numbers::pi));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // f is an exact quadratic on every arc between consecutive cut points.
    DiracCenter best;
    best.value = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        const double a = cuts[k];
        const double b = k + 1 < cuts.size() ? cuts[k + 1] : cuts[0] + two_pi;
        const double y0 = 0.5 * (a + b);
        double ystar = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i)
            ystar += rho.weight(i) * (y0 - signed_angle(y0 - rho.point(i).coords(0)));
        ystar = std::clamp(ystar, a, b);
        const Point y = circle_point(ystar);
        const double f = objective(rho, y);
        if (f < best.value) {
            best.value = f;
            best.center = y;
        }
    }
    best.value = std::sqrt(best.value);
    return best;
}

Vec karcher_direction(const DiscreteMeasure &rho, const Point &x) {
    Vec g = Vec::Zero(rho.space().ambient_dim());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        try {
            g += rho.weight(i) * log_map(rho.space(), x, rho.point(i));
        } catch (const DomainError &) {
            // Atom on the cut locus of x: no preferred direction.
        }
    }
    return g;
}

DiracCenter karcher_from(const DiscreteMeasure &rho, Point x) {
    const ManifoldSpace &space = rho.space();
    DiracCenter out;
    out.converged = false;
    double fx = objective(rho, x);
    for (int it = 0; it < 100 && !out.converged; ++it) {
        out.iterations = it + 1;
        const Vec g = karcher_direction(rho, x);
        const double gn = tangent_norm(space, g);
        if (gn < 1e-10) {
            out.converged = true;
            break;
        }
        // Fixed-point step exp_x(g), halved until the objective does not increase.
        double step = 1.0;
        bool moved = false;
        for (; step * gn > 1e-15; step *= 0.5) {
            Point next = exp_map(space, x, step * g);
            const double fn = objective(rho, next);
            if (fn <= fx) {
                x = std::move(next);
                fx = fn;
                moved = true;
                break;
            }
        }
        if (!moved || step * gn < 1e-10) out.converged = true;
    }
    out.center = x;
    out.value = std::sqrt(std::max(fx, 0.0));
    return out;
}

std::vector<Point> karcher_starts(const DiscreteMeasure &rho) {
    const ManifoldSpace &space = rho.space();
    std::vector<Point> starts;
    const Vec s = flat_mean(rho);
    if (space.family() == Family::Sphere && s.norm() > 1e-9) starts.emplace_back(Family::Sphere, s / s.norm());
    if (space.family() == Family::Hyperbolic) {
        Vec h = s / std::sqrt(-minkowski(s, s));
        h(0) = std::sqrt(1.0 + h.tail(2).squaredNorm());
        starts.emplace_back(Family::Hyperbolic, h);
    }
    const std::size_t n = rho.size();
    if (n <= 64) {
        for (const Point &p : rho.points()) starts.push_back(p);
        return starts;
    }
    // Large measures: the 8 best atoms of a strided sample of 64.
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t k = 0; k < 64; ++k) {
        const std::size_t i = k * n / 64;
        cand.emplace_back(objective(rho, rho.point(i)), i);
    }
    std::sort(cand.begin(), cand.end());
    for (std::size_t k = 0; k < 8; ++k) starts.push_back(rho.point(cand[k].second));
    return starts;
}

} // namespace

double energy(const DiscreteMeasure &rho) {
    if (rho.space().family() == Family::Euclidean) {
        const Vec c = flat_mean(rho);
        double s = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i) s += rho.weight(i) * (rho.point(i).coords - c).squaredNorm();
        return 2.0 * s;
    }
    return energy_pairwise(rho);
}

double energy_pairwise(const DiscreteMeasure &rho) {
    const auto rows = par::pairwise_row_sums_omp(rho.space(), rho.points(), rho.weights());
    double e = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) e += rho.weight(i) * rows[i];
    return e;
}

double w2_to_dirac(const DiscreteMeasure &rho, const Point &y) { return std::sqrt(objective(rho, y)); }

namespace {

Eigen::MatrixXd cost_matrix(const DiscreteMeasure &rho, const DiscreteMeasure &sigma) {
    Eigen::MatrixXd c(rho.size(), sigma.size());
    for (std::size_t i = 0; i < rho.size(); ++i)
        for (std::size_t j = 0; j < sigma.size(); ++j) {
            const double d = distance(rho.space(), rho.point(i), sigma.point(j));
            c(i, j) = d * d;
        }
    return c;
}

void check_pair(const DiscreteMeasure &rho, const DiscreteMeasure &sigma, std::size_t cap) {
    if (!(rho.space() == sigma.space()))
        throw UsageError("measures live on different spaces: " + rho.space().spec() + " vs " + sigma.space().spec());
    if (rho.size() > cap || sigma.size() > cap)
        throw ResourceError("atom count exceeds the transport cap of " + std::to_string(cap));
}

} // namespace

W2Result w2_exact_simplex(const DiscreteMeasure &rho, const DiscreteMeasure &sigma, std::size_t cap) {
    check_pair(rho, sigma, cap);
    const Eigen::MatrixXd c = cost_matrix(rho, sigma);
    const Eigen::Map<const Eigen::VectorXd> a(rho.weights().data(), static_cast<Eigen::Index>(rho.size()));
    const Eigen::Map<const Eigen::VectorXd> b(sigma.weights().data(), static_cast<Eigen::Index>(sigma.size()));
    const TransportSolution sol = solve_transportation(a, b, c);
    W2Result out;
    for (const Flow &f : sol.flows) out.plan.pairs.push_back({f.source, f.target, f.mass});
    out.plan.cost = sol.cost;
    out.value = std::sqrt(std::max(sol.cost, 0.0));
    return out;
}

W2Result w2_exact(const DiscreteMeasure &rho, const DiscreteMeasure &sigma, std::size_t cap) {
    check_pair(rho, sigma, cap);
    if (rho.size() != sigma.size() || !rho.equal_weights() || !sigma.equal_weights() || rho.size() == 1)
        return w2_exact_simplex(rho, sigma, cap);
    const Eigen::MatrixXd c = cost_matrix(rho, sigma);
    const auto col = solve_assignment(c);
    const double mass = 1.0 / static_cast<double>(rho.size());
    W2Result out;
    for (std::size_t i = 0; i < col.size(); ++i) {
        out.plan.pairs.push_back({static_cast<int>(i), col[i], mass});
        out.plan.cost += mass * c(static_cast<Eigen::Index>(i), col[i]);
    }
    out.value = std::sqrt(std::max(out.plan.cost, 0.0));
    return out;
}

DiracCenter best_dirac_center(const DiscreteMeasure &rho) {
    const ManifoldSpace &space = rho.space();
    if (rho.size() == 1) return {rho.point(0), 0.0, true, 0};
    switch (space.family()) {
    case Family::Euclidean: {
        Point c(Family::Euclidean, flat_mean(rho));
        return {c, w2_to_dirac(rho, c), true, 0};
    }
    case Family::Circle: return circle_center(rho);
    default: break;
    }
    DiracCenter best;
    best.value = std::numeric_limits<double>::infinity();
    for (const Point &s : karcher_starts(rho)) {
        DiracCenter c = karcher_from(rho, s);
        if (c.value < best.value) best = c;
    }
    return best;
}

TailBounds tail_bounds_check(const DiscreteMeasure &rho, const Point &xbar, double kappa) {
    if (!(kappa > 0.0)) throw UsageError("tail bound radius must be positive");
    TailBounds out;
    out.energy = energy(rho);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double d = distance(rho.space(), rho.point(i), xbar);
        if (d >= kappa) {
            out.mass_tail += rho.weight(i);
            out.distance_tail += rho.weight(i) * d;
        }
    }
    const double slack = 1e-12;
    out.bounds_ok = out.mass_tail <= out.energy / (kappa * kappa) + slack && out.distance_tail <= out.energy / kappa + slack;
    return out;
}

Moments moments(const DiscreteMeasure &rho) {
    Moments out;
    out.tilde_m2 = energy(rho);
    if (rho.space().family() == Family::Euclidean) {
        const Vec c = flat_mean(rho);
        for (std::size_t i = 0; i < rho.size(); ++i) out.m2 += rho.weight(i) * (rho.point(i).coords - c).squaredNorm();
        out.center_of_mass = c;
    } else {
        const double v = best_dirac_center(rho).value;
        out.m2 = v * v;
    }
    return out;
}

Vec embedded_first_moment(const DiscreteMeasure &rho) {
    const ManifoldSpace &space = rho.space();
    if (space.family() == Family::Circle) {
        Vec m = Vec::Zero(2);
        for (std::size_t i = 0; i < rho.size(); ++i) {
            const double t = rho.point(i).coords(0);
            m(0) += rho.weight(i) * std::cos(t);
            m(1) += rho.weight(i) * std::sin(t);
        }
        return m;
    }
    if (space.family() == Family::Sphere) return flat_mean(rho);
    throw UsageError("embedded first moment needs a circle or sphere, got " + space.spec());
}

} // namespace geoflock
