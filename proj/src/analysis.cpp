#include "geoflock/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "geoflock/errors.hpp"

namespace geoflock {

RateFit fit_decay_rate(const std::vector<double> &t, const std::vector<double> &v, double t_min, double t_max) {
    if (t.size() != v.size()) throw UsageError("time and value series differ in length");
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] < t_min || t[k] > t_max) continue;
        if (!(v[k] > 0.0)) throw DomainError("fit window contains a nonpositive value at t = " + std::to_string(t[k]));
        xs.push_back(t[k]);
        ys.push_back(std::log(v[k]));
    }
    if (xs.size() < 5) throw UsageError("fit window holds fewer than 5 points");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    RateFit fit;
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    fit.t_min = xs.front();
    fit.t_max = xs.back();
    fit.n_points = xs.size();
    double ss = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double r = ys[k] - (fit.intercept + fit.slope * xs[k]);
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / n);
    fit.r2 = syy > 0.0 ? 1.0 - ss / syy : 1.0;
    return fit;
}

RateFit fit_decay_rate(const std::vector<double> &t, const std::vector<double> &v) {
    if (t.empty()) throw UsageError("empty series");
    const double span = t.back() - t.front();
    return fit_decay_rate(t, v, t.front() + 0.5 * span, t.front() + 0.95 * span);
}

std::pair<std::vector<double>, std::vector<double>> truncate_at_floor(const std::vector<double> &t,
                                                                      const std::vector<double> &v, double floor) {
    std::pair<std::vector<double>, std::vector<double>> out;
    for (std::size_t k = 0; k < t.size() && k < v.size(); ++k) {
        if (v[k] < floor) break;
        out.first.push_back(t[k]);
        out.second.push_back(v[k]);
    }
    return out;
}

DiracLimitReport track_dirac_limit(const ManifoldSpace &space, const TrajectoryRecord &rec, double t_min,
                                   double tol) {
    if (rec.centers.empty() || rec.centers.size() != rec.times.size())
        throw UsageError("trajectory carries no best-center series");
    DiracLimitReport out;
    out.x_inf = rec.centers.back();
    out.E0 = rec.energy.empty() ? 0.0 : rec.energy.front();
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < rec.times.size(); ++k)
        if (rec.times[k] >= t_min) idx.push_back(k);
    if (idx.empty()) return out;
    for (std::size_t k : idx) {
        out.times.push_back(rec.times[k]);
        out.dist_to_limit.push_back(distance(space, rec.centers[k], out.x_inf));
    }
    for (std::size_t a = 0; a < idx.size(); ++a) {
        double sup = 0.0;
        for (std::size_t b = a; b < idx.size(); ++b)
            sup = std::max(sup, distance(space, rec.centers[idx[a]], rec.centers[idx[b]]));
        out.cauchy_sup.push_back(sup);
    }
    const double t0 = out.times.front();
    const double d0 = out.dist_to_limit.front();
    out.C = out.E0 > 0.0 ? d0 * d0 * std::exp(0.5 * t0) / out.E0 : 0.0;
    for (std::size_t k = 1; k < out.times.size(); ++k) {
        const double bound = out.C * out.E0 * std::exp(-0.5 * out.times[k]);
        const double d = out.dist_to_limit[k];
        if (d * d > (1.0 + tol) * bound + 1e-24) ++out.violations;
    }
    out.rate_ok = out.violations == 0;
    return out;
}

EnergyContractionReport energy_contraction_check(const std::vector<double> &t, const std::vector<double> &energy,
                                                 double c0, double c0_large) {
    if (t.size() != energy.size()) throw UsageError("time and energy series differ in length");
    EnergyContractionReport rep;
    rep.c0 = c0;
    for (std::size_t k = 1; k + 1 < t.size(); ++k) {
        ContractionStep s;
        s.t = t[k];
        s.energy = energy[k];
        s.half_dE = 0.5 * (energy[k + 1] - energy[k - 1]) / (t[k + 1] - t[k - 1]);
        const double e43 = std::pow(std::max(s.energy, 0.0), 4.0 / 3.0);
        s.bound = -0.25 * s.energy + c0 * e43;
        s.margin = s.half_dE - s.bound;
        s.ok = s.margin <= 1e-14 + 1e-9 * std::abs(s.energy);
        s.c0_needed = e43 > 0.0 ? (s.half_dE + 0.25 * s.energy) / e43 : 0.0;
        s.flagged = s.c0_needed > c0_large;
        rep.failures += s.ok ? 0 : 1;
        rep.flagged += s.flagged ? 1 : 0;
        rep.steps.push_back(s);
    }
    return rep;
}

std::vector<LocalConstantRow> local_constant_probe(const ManifoldSpace &space, const std::vector<double> &kappas,
                                                   std::size_t n_samples, Rng &rng) {
    const double threshold = space.sphere_like() ? 2.0 * std::numbers::pi / 3.0 * space.length_scale()
                                                 : std::numeric_limits<double>::infinity();
    std::vector<LocalConstantRow> rows;
    const Point c = space.sphere_like() && space.family() == Family::Circle ? circle_point(0.0) : origin(space);
    for (double kappa : kappas) {
        if (!(kappa > 0.0) || kappa >= threshold)
            throw DomainError("kappa " + std::to_string(kappa) + " is outside the comparison range");
        LocalConstantRow row;
        row.kappa = kappa;
        row.max_r = -std::numeric_limits<double>::infinity();
        row.min_r = std::numeric_limits<double>::infinity();
        while (row.samples < n_samples) {
            const Point xs = sample_ball(space, c, kappa, rng);
            const Point xs2 = sample_ball(space, c, kappa, rng);
            const Point y = sample_ball(space, c, kappa, rng);
            const double d = distance(space, xs, xs2);
            const double b = distance(space, y, xs), b2 = distance(space, y, xs2);
            if (std::max({d, b, b2}) > kappa) continue;
            const double a = 0.5 * d;
            if (a < 1e-2 * kappa) continue;
            const double m = distance(space, y, midpoints(space, xs, xs2).point);
            const double r = (m * m + a * a - 0.5 * (b * b + b2 * b2)) / (kappa * kappa * a * a);
            row.max_r = std::max(row.max_r, r);
            row.min_r = std::min(row.min_r, r);
            ++row.samples;
        }
        rows.push_back(row);
    }
    return rows;
}

Example2Result example2_moment_derivative(double eps) {
    if (!(eps > 0.0) || !(eps < 0.3)) throw UsageError("example 2 needs 0 < eps < 0.3");
    const double pi = std::numbers::pi;
    auto unit = [](double th) {
        Vec v(2);
        v << std::cos(th), std::sin(th);
        return v;
    };
    const Vec rho0 = (unit(0.0) + unit(pi - 2.0 * eps) + unit(pi + eps)) / 3.0;
    const Vec gain = unit(0.5 * pi - eps) + unit(1.5 * pi + 0.5 * eps) + unit(pi - 0.5 * eps);
    Example2Result out;
    out.moment = rho0;
    out.derivative = -2.0 / 3.0 * rho0 + 2.0 / 9.0 * gain;
    out.cross = out.moment(0) * out.derivative(1) - out.moment(1) * out.derivative(0);
    return out;
}

BetaTildeReport betatilde_relation_check(double s, std::size_t n_pairs, Rng &rng) {
    if (!(s >= 0.0) || !(s < 1.0)) throw UsageError("offset fraction must lie in [0, 1)");
    const KernelSpec k{KernelFamily::PerpendicularOffset, s, ManifoldSpace::euclidean(2)};
    BetaTildeReport rep;
    rep.s = s;
    rep.expected = s * s;
    ContractionOptions opt;
    opt.n_mc = 64;
    rep.contraction = estimate_contraction(k, n_pairs, rng, opt);
    const auto &c = rep.contraction;
    rep.equal_ok = std::abs(c.beta_hat - rep.expected) <= c.beta_ci + 1e-9 &&
                   std::abs(c.beta_tilde_hat - rep.expected) <= c.beta_tilde_ci + 1e-9;
    rep.bound_ok = c.bound_gap <= 1e-12;
    return rep;
}

namespace {

Point scan_point(const ManifoldSpace &space, Rng &rng) {
    return space.sphere_like() ? sample_uniform(space, rng) : sample_ball(space, origin(space), 2.0, rng);
}

} // namespace

ScanResult apollonius_scan(const ManifoldSpace &space, std::size_t n, Rng &rng) {
    ScanResult out;
    while (out.samples < n) {
        const Point xs = scan_point(space, rng), xs2 = scan_point(space, rng), y = scan_point(space, rng);
        const MidpointSet ms = midpoints(space, xs, xs2);
        if (!ms.unique()) continue;
        const double a = 0.5 * distance(space, xs, xs2);
        const double r = apollonius_residual(space, a, distance(space, y, xs), distance(space, y, xs2),
                                             distance(space, y, ms.point));
        out.worst = std::max(out.worst, std::abs(r));
        if (std::abs(r) >= 1e-12) ++out.violations;
        ++out.samples;
    }
    return out;
}

ScanResult midpoint_bound_scan(std::size_t n, Rng &rng) {
    const ManifoldSpace s2 = ManifoldSpace::sphere(2);
    ScanResult out;
    out.worst = -std::numeric_limits<double>::infinity();
    while (out.samples < n) {
        const Point xs = sample_uniform(s2, rng), xs2 = sample_uniform(s2, rng), y = sample_uniform(s2, rng);
        const MidpointSet ms = midpoints(s2, xs, xs2);
        if (!ms.unique()) continue;
        const double d = distance(s2, xs, xs2);
        const double b = distance(s2, y, xs), b2 = distance(s2, y, xs2);
        const double m = distance(s2, y, ms.point);
        const double alpha = m * m - 0.5 * (b * b + b2 * b2);
        const double gap = alpha - (-0.25 * d * d + 2.0 * d * std::min(b, b2));
        out.worst = std::max(out.worst, gap);
        if (gap > 1e-10) ++out.violations;
        ++out.samples;
    }
    return out;
}

ScanResult global_beta_scan(const KernelSpec &kernel, double beta, std::size_t n, std::size_t n_mc, Rng &rng) {
    const ManifoldSpace &space = kernel.space;
    ScanResult out;
    out.worst = -std::numeric_limits<double>::infinity();
    while (out.samples < n) {
        const Point xs = scan_point(space, rng), xs2 = scan_point(space, rng), y = scan_point(space, rng);
        if (!midpoints(space, xs, xs2).unique()) continue;
        const double d = distance(space, xs, xs2);
        const double b = distance(space, y, xs), b2 = distance(space, y, xs2);
        const Estimate a = alpha(kernel, xs, xs2, y, n_mc, rng);
        const double rhs = -0.25 * (1.0 - beta) * d * d + (1.0 + std::sqrt(1.0 + beta)) * d * std::min(b, b2);
        const double gap = a.value - rhs - 3.0 * a.ci;
        out.worst = std::max(out.worst, gap);
        if (gap > 1e-12) ++out.violations;
        ++out.samples;
    }
    return out;
}

DiscreteMeasure random_measure(const ManifoldSpace &space, std::size_t max_atoms, Rng &rng) {
    const std::size_t n = 1 + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(max_atoms));
    std::vector<Point> pts;
    std::vector<double> w;
    double total = 0.0;
    const bool spread = uniform01(rng) < 0.5;
    const double radius = 0.05 + 1.45 * uniform01(rng);
    const Point c = space.sphere_like() ? sample_uniform(space, rng) : origin(space);
    for (std::size_t i = 0; i < n; ++i) {
        if (space.sphere_like() && spread)
            pts.push_back(sample_uniform(space, rng));
        else
            pts.push_back(sample_ball(space, c, space.sphere_like() ? radius : 2.0 * radius, rng));
        w.push_back(-std::log1p(-uniform01(rng)) + 1e-3);
        total += w.back();
    }
    for (double &x : w) x /= total;
    return DiscreteMeasure(space, std::move(pts), std::move(w));
}

Point random_probe(const ManifoldSpace &space, Rng &rng) {
    return space.sphere_like() ? sample_uniform(space, rng) : sample_ball(space, origin(space), 3.0, rng);
}

SandwichResult sandwich_scan(const ManifoldSpace &space, std::size_t n_measures, std::size_t n_probes, Rng &rng) {
    SandwichResult out;
    for (std::size_t k = 0; k < n_measures; ++k) {
        const DiscreteMeasure rho = random_measure(space, 50, rng);
        const double e = energy(rho);
        const DiracCenter c = best_dirac_center(rho);
        ++out.measures;
        if (c.value * c.value > e + 1e-9) ++out.lower_violations;
        std::vector<Point> probes(rho.points().begin(), rho.points().end());
        for (std::size_t p = 0; p < n_probes; ++p) probes.push_back(random_probe(space, rng));
        for (const Point &y : probes) {
            const double w = w2_to_dirac(rho, y);
            ++out.probes;
            if (e > 4.0 * w * w + 1e-9) ++out.upper_violations;
            if (c.value > w + 1e-8) ++out.optimality_violations;
        }
        std::vector<double> kappas{0.5};
        if (e > 0.0) {
            kappas.push_back(std::pow(e, 1.0 / 6.0));
            kappas.push_back(std::sqrt(e));
        }
        for (double kappa : kappas)
            if (!tail_bounds_check(rho, c.center, kappa).bounds_ok) ++out.tail_violations;
    }
    return out;
}

std::vector<double> w2_to_limit_series(const ManifoldSpace &space, const TrajectoryRecord &rec) {
    if (rec.particles.empty() || rec.centers.empty()) throw UsageError("trajectory has no particle snapshots");
    const Point &x_inf = rec.centers.back();
    std::vector<double> out;
    for (const auto &snap : rec.particles) out.push_back(w2_to_dirac(DiscreteMeasure::uniform(space, snap), x_inf));
    return out;
}

Example1Result example1_grid_separation(int M, double dt, double t_end, double offset) {
    const double pi = std::numbers::pi;
    const long steps = static_cast<long>(std::floor(t_end / dt + 1e-9));
    if (steps < 1) throw UsageError("t_end shorter than one step");
    SimConfig cfg;
    cfg.space = ManifoldSpace::circle();
    cfg.kernel = KernelSpec::midpoint(cfg.space);
    cfg.grid_size = M;
    cfg.dt = dt;
    cfg.record_interval = static_cast<double>(steps) * dt;
    cfg.t_end = cfg.record_interval;
    cfg.diagnostics = false;
    cfg.init.kind = InitSpec::Kind::Atoms;
    cfg.init.weights = {0.5, 0.5};

    Example1Result out;
    out.t = cfg.t_end;
    cfg.init.atoms = {circle_point(0.0), circle_point(pi - offset)};
    out.lower = run_circle_grid(cfg);
    cfg.init.atoms = {circle_point(0.0), circle_point(pi + offset)};
    out.upper = run_circle_grid(cfg);

    auto positive_part = [](const GridDensity &g) {
        std::vector<Point> pts;
        std::vector<double> w;
        for (int k = 0; k < g.M; ++k)
            if (g.values[k] > 0.0) {
                pts.push_back(circle_point(k * g.dtheta()));
                w.push_back(g.values[k] * g.dtheta());
            }
        return DiscreteMeasure(ManifoldSpace::circle(), std::move(pts), std::move(w));
    };
    out.w2 = w2_exact_simplex(positive_part(out.lower.final_state), positive_part(out.upper.final_state)).value;
    return out;
}

} // namespace geoflock
